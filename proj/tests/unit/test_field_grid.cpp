#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "smlab/dealias.hpp"
#include "smlab/evolution.hpp"
#include "smlab/fiber.hpp"
#include "smlab/modulation.hpp"
#include "smlab/random.hpp"

using namespace smlab;
using std::numbers::pi;

namespace {

const GridSpec small{3, 8, 1.0, 16, 8.0};

SpaceTimeField random_field(const GridSpec& g, std::uint64_t seed, Domain d = Domain::physical) {
  Rng rng(seed);
  SpaceTimeField u = SpaceTimeField::zeros(g, d);
  for (auto& z : u.data) z = rng.complex_normal();
  return u;
}

double mass(const SpaceTimeField& u) { return l2_norm(u); }

}  // namespace

TEST(Grid, DerivedQuantities) {
  const GridSpec g{3, 32, 0.25, 32, 4.0};
  EXPECT_DOUBLE_EQ(g.period(), 8.0 * pi);
  EXPECT_DOUBLE_EQ(g.dt(), 0.125);
  EXPECT_DOUBLE_EQ(g.spatial_nyquist(), 4.0);
  const auto sh = g.shells();
  EXPECT_EQ(sh.k_min, -2);
  EXPECT_EQ(sh.k_max, 1);
  EXPECT_GE(sh.j_max, 4);
}

TEST(Grid, ValidationAndJson) {
  EXPECT_THROW((GridSpec{3, 12, 1.0, 16, 8.0}.validate()), Error);
  EXPECT_THROW((GridSpec{3, 8, -1.0, 16, 8.0}.validate()), Error);
  const nlohmann::json j = small;
  EXPECT_EQ(j.get<GridSpec>(), small);
}

TEST(Fft, ConstantGoesToDc) {
  SpatialField f = SpatialField::zeros(small);
  for (auto& z : f.data) z = 1.0;
  const SpatialField F = fft_space(f);
  const double L = small.period();
  EXPECT_NEAR(F.data[0].real(), std::pow(2 * pi, -1.5) * L * L * L, 1e-10);
  for (std::size_t s = 1; s < F.data.size(); ++s) EXPECT_LT(std::abs(F.data[s]), 1e-12);
  EXPECT_NEAR(l2_norm(F), std::sqrt(L * L * L), 1e-10);
}

TEST(Fft, PlaneWaveLandsOnItsBin) {
  const GridSpec& g = small;
  const int m[3] = {1, -2, 3};
  const int mt = 2;
  SpaceTimeField u = SpaceTimeField::zeros(g);
  const std::size_t S = g.spatial_size();
  for (int p = 0; p < g.nt; ++p)
    for (int a = 0; a < g.n; ++a)
      for (int b = 0; b < g.n; ++b)
        for (int c = 0; c < g.n; ++c) {
          const double phase = g.dx() * g.freq_step * (m[0] * a + m[1] * b + m[2] * c) + mt * g.tau_step() * g.time_at(p);
          u.data[p * S + (a * g.n + b) * g.n + c] = std::polar(1.0, phase);
        }
  const SpaceTimeField F = fft_spacetime(u);
  const std::size_t s0 = spatial_offset(m, 3, g.n);
  const std::size_t target = bin_of(mt, g.nt) * S + s0;
  const double L = g.period();
  const double expect = std::pow(2 * pi, -2.0) * L * L * L * g.t_window;
  EXPECT_NEAR(F.data[target].real(), expect, 1e-9 * expect);
  EXPECT_NEAR(F.data[target].imag(), 0.0, 1e-9 * expect);
  for (std::size_t i = 0; i < F.data.size(); ++i)
    if (i != target) {
      EXPECT_LT(std::abs(F.data[i]), 1e-9 * expect);
    }
}

TEST(Fft, RoundTripAndPlancherelProperty) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SpaceTimeField u = random_field(small, seed);
    for (Domain d : {Domain::fourier, Domain::mixed}) {
      const SpaceTimeField F = convert(u, d);
      EXPECT_NEAR(mass(F), mass(u), 1e-12 * mass(u));
      const SpaceTimeField back = convert(F, Domain::physical);
      EXPECT_LT(relative_l2_diff(back.data, u.data), 1e-13);
    }
    const SpaceTimeField mixed = convert(u, Domain::mixed);
    EXPECT_LT(relative_l2_diff(convert(mixed, Domain::fourier).data, convert(u, Domain::fourier).data), 1e-13);
  }
}

TEST(Fft, DomainChecks) {
  const SpaceTimeField u = random_field(small, 3);
  EXPECT_THROW(ifft_spacetime(u), Error);
  EXPECT_THROW(fft_spacetime(to_fourier(u)), Error);
}

TEST(Fiber, GroupingMatchesBruteForce) {
  const GridSpec g{3, 8, 1.0, 2, 8.0};
  for (std::vector<int> v : {std::vector<int>{1, 0, 0}, {0, 0, 1}, {1, 1, 0}, {1, -1, 1}, {2, 1, 0}}) {
    const Direction e = make_direction(v);
    const auto idx = fiber_index(g, e);
    std::vector<int> count(g.n, 0);
    for (int a = 0; a < g.n; ++a)
      for (int b = 0; b < g.n; ++b)
        for (int c = 0; c < g.n; ++c) {
          // x.v measured in units of dx, folded onto the torus
          const double r = (a * v[0] + b * v[1] + c * v[2]) * g.dx();
          const int expect = static_cast<int>(std::lround(std::fmod(std::fmod(r, g.period()) + g.period(), g.period()) / g.dx())) % g.n;
          EXPECT_EQ(idx[(a * g.n + b) * g.n + c], expect);
          ++count[expect];
        }
    for (int c : count) EXPECT_EQ(c, g.n * g.n);
    EXPECT_DOUBLE_EQ(fiber_spacing(g, e), g.dx() / std::sqrt(double(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])));
  }
  EXPECT_NO_THROW(fiber_index(g, make_direction({1, 1, 1})));
}

TEST(Fiber, EvenDirectionRejected) {
  Direction e;
  e.lattice = {2, 0, 0};
  e.unit = {1.0, 0.0, 0.0};
  EXPECT_THROW(fiber_index(small, e), Error);
}

TEST(MixedNorm, MatchesBruteForce) {
  const GridSpec g{3, 8, 1.0, 8, 8.0};
  const SpaceTimeField u = random_field(g, 21);
  const std::size_t S = g.spatial_size();
  for (std::vector<int> v : {std::vector<int>{1, 0, 0}, {0, 1, 0}, {1, 1, 0}}) {
    const Direction e = make_direction(v);
    const double vn = std::sqrt(double(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
    const double dr = g.dx() / vn;
    std::vector<double> l2(g.n, 0.0), sup(g.n, 0.0);
    for (int a = 0; a < g.n; ++a)
      for (int b = 0; b < g.n; ++b)
        for (int c = 0; c < g.n; ++c) {
          const int r = (((a * v[0] + b * v[1] + c * v[2]) % g.n) + g.n) % g.n;
          for (int t = 0; t < g.nt; ++t) {
            const cplx z = u.data[t * S + (a * g.n + b) * g.n + c];
            l2[r] += std::norm(z) * std::pow(g.dx(), 3) * g.dt() / dr;
            sup[r] = std::max(sup[r], std::abs(z));
          }
        }
    double l1_2 = 0, l2_2 = 0, linf_2 = 0, l2_inf = 0, linf_inf = 0;
    for (int r = 0; r < g.n; ++r) {
      l1_2 += std::sqrt(l2[r]) * dr;
      l2_2 += l2[r] * dr;
      linf_2 = std::max(linf_2, std::sqrt(l2[r]));
      l2_inf += sup[r] * sup[r] * dr;
      linf_inf = std::max(linf_inf, sup[r]);
    }
    using X = Exponent;
    EXPECT_NEAR(mixed_norm(u, e, X::one, X::two), l1_2, 1e-12 * l1_2);
    EXPECT_NEAR(mixed_norm(u, e, X::two, X::two), std::sqrt(l2_2), 1e-12 * std::sqrt(l2_2));
    EXPECT_NEAR(mixed_norm(u, e, X::inf, X::two), linf_2, 1e-12 * linf_2);
    EXPECT_NEAR(mixed_norm(u, e, X::two, X::inf), std::sqrt(l2_inf), 1e-12 * std::sqrt(l2_inf));
    EXPECT_NEAR(mixed_norm(u, e, X::inf, X::inf), linf_inf, 1e-12 * linf_inf);
    // Fourier input goes through Parseval in time
    EXPECT_NEAR(mixed_norm(to_fourier(u), e, X::one, X::two), l1_2, 1e-12 * l1_2);
    // L^{2,2} is the plain L^2 norm
    EXPECT_NEAR(std::sqrt(l2_2), l2_norm(u), 1e-12 * l2_norm(u));
  }
  EXPECT_THROW(mixed_norm(u, axis_direction(3, 0), Exponent::two, Exponent::one), Error);
}

TEST(Modulation, PieceSumsTelescope) {
  const GridSpec g{3, 8, 1.0, 32, 8.0};
  const SpaceTimeField F = to_fourier(random_field(g, 31));
  const int jm = g.shells().j_max;
  SpaceTimeField sum = SpaceTimeField::zeros(g, Domain::fourier);
  for (int j = 0; j <= jm; ++j) {
    const SpaceTimeField pj = modulation_multiplier(F, j, ModVariant::exact);
    const SpaceTimeField pp = modulation_multiplier(F, j, ModVariant::plus);
    const SpaceTimeField pm = modulation_multiplier(F, j, ModVariant::minus);
    for (std::size_t i = 0; i < F.data.size(); ++i) {
      sum.data[i] += pj.data[i];
      EXPECT_NEAR(std::abs(pp.data[i] + pm.data[i] - pj.data[i]), 0.0, 1e-14);
    }
    // eta_{<=j} equals the partial sum so far
    const SpaceTimeField le = modulation_multiplier(F, j, ModVariant::le);
    if (j < jm) {
      EXPECT_LT(relative_l2_diff(le.data, sum.data), 1e-13);
    }
  }
  EXPECT_LT(relative_l2_diff(sum.data, F.data), 1e-13);
  EXPECT_THROW(modulation_multiplier(F, jm + 1, ModVariant::exact), Error);
}

TEST(Modulation, CommutesWithTranslation) {
  const GridSpec g{3, 8, 1.0, 16, 8.0};
  const SpaceTimeField u = random_field(g, 41);
  // shift by one cell along x_1
  SpaceTimeField v = u;
  const std::size_t S = g.spatial_size();
  for (int t = 0; t < g.nt; ++t)
    for (int a = 0; a < g.n; ++a)
      for (int b = 0; b < g.n; ++b)
        for (int c = 0; c < g.n; ++c)
          v.data[t * S + (a * g.n + (b + 1) % g.n) * g.n + c] = u.data[t * S + (a * g.n + b) * g.n + c];
  const SpaceTimeField pu = to_physical(modulation_multiplier(to_fourier(u), 2, ModVariant::exact));
  const SpaceTimeField pv = to_physical(modulation_multiplier(to_fourier(v), 2, ModVariant::exact));
  for (int t = 0; t < g.nt; ++t)
    for (int a = 0; a < g.n; ++a)
      for (int b = 0; b < g.n; ++b)
        for (int c = 0; c < g.n; ++c)
          EXPECT_LT(std::abs(pv.data[t * S + (a * g.n + (b + 1) % g.n) * g.n + c] - pu.data[t * S + (a * g.n + b) * g.n + c]), 1e-12);
}

TEST(Modulation, FreeSolutionSitsAtLowModulation) {
  const GridSpec g{3, 16, 0.5, 128, 8.0};
  Rng rng(51);
  SpatialField phi = SpatialField::zeros(g, Domain::fourier);
  const auto lat = lattice_of(g);
  for (std::size_t s = 0; s < phi.data.size(); ++s)
    if (lat->absxi[s] <= 2.0) phi.data[s] = rng.complex_normal();
  const SpaceTimeField F = to_fourier(cutoff_free_solution(phi));
  const double total = l2_norm(F);
  // mass outside |mu| <= 2^j decays fast in j
  double prev = 1.0;
  for (int j = 1; j <= 4; ++j) {
    const SpaceTimeField hi = modulation_multiplier(F, j + 1, ModVariant::ge);
    const double frac = l2_norm(hi) / total;
    EXPECT_LE(frac, prev);
    prev = frac;
  }
  EXPECT_LT(prev, 0.05);
}

TEST(Dealias, ProjectionIsIdempotent) {
  const SpaceTimeField F = to_fourier(random_field(small, 61));
  const SpaceTimeField P = two_thirds_project(F);
  EXPECT_LT(mass_outside_box(P), 1e-14);
  EXPECT_GT(mass_outside_box(F), 0.1);
  EXPECT_LT(relative_l2_diff(two_thirds_project(P).data, P.data), 1e-15);
}
