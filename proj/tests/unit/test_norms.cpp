#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "smlab/atoms.hpp"
#include "smlab/norms.hpp"

using namespace smlab;
using std::numbers::pi;

namespace {

const GridSpec pg{3, 32, 0.25, 32, 4.0};

LabParams lab0() {
  LabParams p;
  p.k_y = 0;
  return p;
}

Atom x_atom(int k, int j, std::uint64_t seed, double target = 1.0) {
  AtomSpec a;
  a.kind = AtomKind::x;
  a.k = k;
  a.j = j;
  a.seed = seed;
  a.target = target;
  return make_atom(pg, a);
}

Atom y_atom(int k, int kp, std::vector<int> e, std::uint64_t seed) {
  AtomSpec a;
  a.kind = AtomKind::y;
  a.k = k;
  a.kprime = kp;
  a.e = make_direction(e);
  a.seed = seed;
  return make_atom(pg, a, lab0());
}

}  // namespace

TEST(Weights, Examples) {
  EXPECT_DOUBLE_EQ(beta_weight(2, 4), 2.0);
  EXPECT_DOUBLE_EQ(beta_weight(-1, 2), 3.0);
  EXPECT_DOUBLE_EQ(beta_weight(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(gamma_weight(3, 2, 1), 64.0);
  EXPECT_DOUBLE_EQ(gamma_weight(3, 2, 3), 1.0 / 64.0);
  EXPECT_THROW(gamma_weight(3, 2, 0), Error);
  EXPECT_THROW(gamma_weight(3, 2, 4), Error);
  EXPECT_THROW(beta_weight(0, -1), Error);
  EXPECT_EQ(sector_range(2), (std::vector<int>{2, 3}));
  EXPECT_EQ(sector_range(10), (std::vector<int>{9, 10, 11}));
  EXPECT_EQ(sector_range(0), (std::vector<int>{1}));
}

TEST(Besov, SingleModeOracle) {
  const double h = pg.freq_step;
  SpatialField phi = SpatialField::zeros(pg, Domain::fourier);
  const int on_plateau[3] = {4, 0, 0};  // |xi| = 1
  phi.data[spatial_offset(on_plateau, 3, pg.n)] = cplx(3.0, 4.0);
  EXPECT_NEAR(besov_norm(phi, 1.5).total, 5.0 * std::pow(h, 1.5), 1e-14);

  SpatialField psi = SpatialField::zeros(pg, Domain::fourier);
  const int straddle[3] = {6, 0, 0};  // |xi| = 1.5 splits between shells 0 and 1
  psi.data[spatial_offset(straddle, 3, pg.n)] = 1.0;
  // eta0(1.5) and 1 - eta0(1.5), frozen from the bump formula
  const double expect = std::pow(h, 1.5) * (0.10909682119561329 + 0.8909031788043867 * std::pow(2.0, 1.5));
  EXPECT_NEAR(besov_norm(psi, 1.5).total, expect, 1e-13);
  // larger sigma only reweights shells with k > 0
  const double expect2 = std::pow(h, 1.5) * (0.10909682119561329 + 0.8909031788043867 * std::pow(2.0, 2.0));
  EXPECT_NEAR(besov_norm(psi, 2.0).total, expect2, 1e-13);
  EXPECT_THROW(besov_norm(psi, 1.0), Error);
}

TEST(Besov, ScaleInvariantProperty) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    AtomSpec a;
    a.kind = AtomKind::besov_shell;
    a.k = -1 + static_cast<int>(seed % 3);
    a.seed = seed;
    SpatialField phi = make_atom(pg, a).data;
    const double n0 = besov_norm(phi, 1.5).total;
    EXPECT_NEAR(n0, 1.0, 1e-12);
    const double n1 = besov_norm(dyadic_rescale(phi), 1.5).total;
    EXPECT_NEAR(n1, n0, 1e-10);
  }
}

TEST(Xk, SingleModeOracle) {
  SpaceTimeField f = SpaceTimeField::zeros(pg, Domain::fourier);
  const int m[3] = {4, 0, 0};  // |xi|^2 = 1
  const std::size_t S = pg.spatial_size();
  // tau = -1 puts mu at 0, j = 0
  const int mt = -static_cast<int>(std::lround(1.0 / pg.tau_step()));
  const double mu = mt * pg.tau_step() + 1.0;
  ASSERT_LE(std::abs(mu), 1.25);
  f.data[bin_of(mt, pg.nt) * S + spatial_offset(m, 3, pg.n)] = 2.0;
  const double w = std::pow(pg.freq_step, 3) * 2.0 * pi / pg.t_window;
  const auto r = xk_norm(f, 0);
  EXPECT_NEAR(r.value, 2.0 * 2.0 * std::sqrt(w), 1e-13);  // beta_{0,0} = 2
  EXPECT_NEAR(r.terms[0], r.value, 1e-15);
}

TEST(Xk, AtomsHaveTheirTargetNorm) {
  for (int k = -1; k <= 1; ++k)
    for (int j : {0, 2, 4}) {
      const Atom a = x_atom(k, j, 100 + k * 10 + j, 0.7);
      EXPECT_NEAR(xk_norm(a.field, k).value, 0.7, 1e-12) << k << " " << j;
    }
}

TEST(Xk, AdditiveAcrossModulationsProperty) {
  const Atom a = x_atom(0, 1, 1), b = x_atom(0, 4, 2);
  SpaceTimeField sum = a.field;
  for (std::size_t i = 0; i < sum.data.size(); ++i) sum.data[i] += b.field.data[i];
  EXPECT_NEAR(xk_norm(sum, 0).value, 2.0, 1e-12);
  // the same modulation adds in L^2 only
  const Atom c = x_atom(0, 1, 3);
  SpaceTimeField same = a.field;
  for (std::size_t i = 0; i < same.data.size(); ++i) same.data[i] += c.field.data[i];
  EXPECT_LE(xk_norm(same, 0).value, 2.0 + 1e-12);
}

TEST(Xk, SupportViolation) {
  const Atom a = x_atom(1, 0, 5);
  EXPECT_THROW(xk_norm(a.field, -1), Error);
  EXPECT_THROW(xk_norm(to_physical(a.field), 1), Error);
}

TEST(Yk, SingleModeOracle) {
  // one coefficient v at (xi, tau): the physical function has constant modulus
  // A = (2 pi)^{-2} |v| |mu + i| h^3 dtau on the torus x window
  const GridSpec& g = pg;
  SpaceTimeField f = SpaceTimeField::zeros(g, Domain::fourier);
  const int m[3] = {4, 0, 0};
  const int mt = 3;
  const cplx v{0.5, -1.5};
  f.data[bin_of(mt, g.nt) * g.spatial_size() + spatial_offset(m, 3, g.n)] = v;
  const double mu = mt * g.tau_step() + 1.0;
  const double A = std::pow(2 * pi, -2.0) * std::abs(v) * std::hypot(mu, 1.0) * std::pow(g.freq_step, 3) * g.tau_step();
  const double L = g.period(), T = g.t_window;
  for (std::vector<int> dir : {std::vector<int>{1, 0, 0}, {1, 1, 0}, {1, 1, 1}}) {
    const Direction e = make_direction(dir);
    const double ell = L / e.lattice_norm();  // range of r = x.e on the torus
    const double l12 = A * std::sqrt(L * L * L * T / ell) * ell;
    for (int kp = 1; kp <= 2; ++kp) {
      const double expect = std::pow(2.0, -0.5 * kp) * gamma_weight(3, 1, kp) * l12;
      EXPECT_NEAR(detail::yk_value(f, 1, e, kp), expect, 1e-12 * expect);
    }
  }
}

TEST(Yk, HomogeneityProperty) {
  const Atom a = y_atom(1, 1, {1, 0, 0}, 7);
  const Direction e = make_direction({1, 0, 0});
  const double n1 = yk_e_norm(a.field, 1, e, lab0()).value;
  EXPECT_GT(n1, 0.0);
  SpaceTimeField b = a.field;
  for (auto& z : b.data) z *= cplx(0.0, -3.0);
  EXPECT_NEAR(yk_e_norm(b, 1, e, lab0()).value, 3.0 * n1, 1e-12 * n1);
}

TEST(Yk, TrivialBelowKy) {
  const Atom a = x_atom(0, 0, 8);
  EXPECT_THROW(yk_norm(a.field, 0, axis_direction(3, 0), 1), Error);  // default k_y = 2
}

TEST(Zk, BoundedByXkProperty) {
  const LabParams p = lab0();
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Atom a = y_atom(1, 2, {1, 0, 0}, seed);
    const double z = zk_norm_upper(a.field, 1, p).value;
    const double x = xk_norm(a.field, 1).value;
    EXPECT_LE(z, x * (1 + 1e-12));
    // the Y-atom certificate is itself a candidate of the search
    EXPECT_LE(z, a.norm_bound * (1 + 1e-9));
    // homogeneity
    SpaceTimeField b = a.field;
    for (auto& c : b.data) c *= 2.5;
    EXPECT_NEAR(zk_norm_upper(b, 1, p).value, 2.5 * z, 1e-12 * z);
  }
  // below k_y only the pure X candidate exists
  const Atom xa = x_atom(1, 3, 9);
  EXPECT_NEAR(zk_norm_upper(xa.field, 1).value, 1.0, 1e-12);
}

TEST(Zk, DecompositionReconstructsProperty) {
  const LabParams p = lab0();
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Atom a = y_atom(1, 1 + static_cast<int>(seed % 2), {1, 0, 1}, seed);
    const Atom b = x_atom(1, 2, seed + 50, 0.3);
    SpaceTimeField f = a.field;
    for (std::size_t i = 0; i < f.data.size(); ++i) f.data[i] += b.field.data[i];
    const auto dec = atomic_decompose(f, 1, p);
    SpaceTimeField sum = SpaceTimeField::zeros(pg, Domain::fourier);
    double norms = 0.0;
    for (const auto& x : dec.x_pieces) {
      for (std::size_t i = 0; i < sum.data.size(); ++i) sum.data[i] += x.field.data[i];
      norms += x.norm;
    }
    for (const auto& y : dec.y_pieces) {
      for (std::size_t i = 0; i < sum.data.size(); ++i) sum.data[i] += y.field.data[i];
      norms += y.norm;
    }
    EXPECT_LT(relative_l2_diff(sum.data, f.data), 1e-12);
    EXPECT_NEAR(norms, dec.norm_bound, 1e-10 * dec.norm_bound);
    EXPECT_NEAR(dec.norm_bound, zk_norm_upper(f, 1, p).value, 1e-12 * dec.norm_bound);
  }
}

TEST(ShellSums, SingleShellMatchesZk) {
  const Atom a = x_atom(0, 2, 12);
  // a plateau-supported field is fixed by its own shell multiplier
  const auto fs = fsigma_norm(a.field, 1.5);
  ASSERT_EQ(fs.per_shell.size(), 1u);
  EXPECT_NEAR(fs.total, 1.0, 1e-12);
  const auto f2 = fsigma_norm(a.field, 2.0);
  EXPECT_NEAR(f2.total, 1.0, 1e-12);  // k = 0 weight is 1 for every sigma
  const auto ns = nsigma_norm(resolvent_multiplier(a.field, ResolventMode::multiply), 1.5);
  EXPECT_NEAR(ns.total, 1.0, 1e-10);
  EXPECT_THROW(fsigma_norm(a.field, 1.0), Error);
}
