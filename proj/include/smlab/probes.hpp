#pragma once

// Boundedness probes for the dyadic, linear, bilinear and trilinear
// estimates: random atoms in, certified LHS/RHS out, growth verdicts from
// log-ratio regression over the swept dyadic parameters.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "smlab/atoms.hpp"
#include "smlab/convolve.hpp"
#include "smlab/dealias.hpp"
#include "smlab/evolution.hpp"
#include "smlab/gauge.hpp"
#include "smlab/norms.hpp"

namespace smlab {

using ParamPoint = std::vector<std::pair<std::string, int>>;

inline std::string to_string(const ParamPoint& p) {
  std::string s;
  for (const auto& [k, v] : p) {
    if (!s.empty()) s += ";";
    s += k + "=" + std::to_string(v);
  }
  return s;
}

inline int param(const ParamPoint& p, const std::string& name) {
  for (const auto& [k, v] : p)
    if (k == name) return v;
  throw Error(ErrorCode::invalid_argument, "probe parameter '" + name + "' missing");
}

struct ProbeSample {
  std::string variant = "main";
  std::string branch = "plain";
  double lhs = 0.0;
  double rhs = 0.0;
  std::string direction;
  std::string atoms;
  bool in_verdict = true;
};

struct EstimateProbeResult {
  std::string estimate_id;
  std::string variant;
  std::string branch;
  ParamPoint params;
  std::string direction;
  std::string atoms;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  std::uint64_t seed = 0;
  int trial = 0;
  bool skipped = false;
  bool in_verdict = true;
};

struct ProbeContext {
  GridSpec grid;
  LabParams lab;
};

using TrialFn = std::function<std::vector<ProbeSample>(const ProbeContext&, const ParamPoint&, int trial, Rng&)>;

struct EstimateRegistryEntry {
  std::string id;
  std::string anchor;
  std::string lhs_recipe;
  std::string rhs_recipe;
  std::vector<ParamPoint> domain;
  TrialFn trial;
  std::optional<double> absolute_bound;  // identity checks: max ratio must stay below
};

// wide grid: free waves at the top shell do not wrap within the window
inline GridSpec probe_grid() { return GridSpec{3, 32, 0.25, 32, 4.0}; }

inline LabParams probe_lab() {
  LabParams p;
  p.k_y = 0;
  return p;
}

struct ProbeConfig {
  GridSpec grid = probe_grid();
  LabParams lab = probe_lab();
  int trials = 50;
  std::uint64_t seed = 1;
  double slope_threshold = 0.1;
  int workers = 1;
  std::vector<ParamPoint> points;  // empty: the entry's default domain
};

// ---- trial helpers -----------------------------------------------------------

namespace probe_detail {

struct ZAtom {
  SpaceTimeField f;
  double bound = 0.0;
  std::string label;
  std::optional<Direction> e;
};

inline std::string label_of(const Direction& e) {
  std::string s = "[";
  for (std::size_t i = 0; i < e.lattice.size(); ++i) s += (i ? "," : "") + std::to_string(e.lattice[i]);
  return s + "]";
}

inline const Direction& random_direction(const ProbeContext& c, Rng& rng) {
  const auto& dirs = directions_of(c.lab, c.grid.dim);
  return dirs.directions[rng.uniform_int(0, static_cast<int>(dirs.size()) - 1)];
}

inline ZAtom x_atom(const ProbeContext& c, int k, int j, Rng& rng) {
  AtomSpec a;
  a.kind = AtomKind::x;
  a.k = k;
  a.j = std::min(j, c.grid.shells().j_max);
  a.seed = rng.engine()();
  auto at = make_atom(c.grid, a, c.lab);
  return {std::move(at.field), at.norm_bound, "X(k=" + std::to_string(k) + ",j=" + std::to_string(a.j) + ")", {}};
}

inline ZAtom y_atom(const ProbeContext& c, int k, Rng& rng) {
  const auto sectors = sector_range(k);
  for (int attempt = 0; attempt < 8; ++attempt) {
    AtomSpec a;
    a.kind = AtomKind::y;
    a.k = k;
    a.e = random_direction(c, rng);
    a.kprime = sectors[rng.uniform_int(0, static_cast<int>(sectors.size()) - 1)];
    a.seed = rng.engine()();
    try {
      auto at = make_atom(c.grid, a, c.lab);
      return {std::move(at.field), at.norm_bound,
              "Y(k=" + std::to_string(k) + ",k'=" + std::to_string(a.kprime) + ",e=" + label_of(a.e) + ")", a.e};
    } catch (const Error& err) {
      if (err.code() != ErrorCode::unrepresentable) throw;
    }
  }
  throw Error(ErrorCode::unrepresentable, "no representable Y-atom at k = " + std::to_string(k));
}

// Z_k atom: Y-atoms on odd trials where Y_k is active, X-atoms with j in
// [j_lo, j_hi] otherwise
inline ZAtom z_atom(const ProbeContext& c, int k, int trial, Rng& rng, int j_lo = 0, int j_hi = 2) {
  if (k >= c.lab.k_y && trial % 2 == 1 && !sector_range(k).empty()) return y_atom(c, k, rng);
  return x_atom(c, k, rng.uniform_int(j_lo, j_hi), rng);
}

inline SpaceTimeField maybe_conj(const SpaceTimeField& f, bool conj) { return conj ? conj_reflect(f) : f; }

inline double pow2(double x) { return std::exp2(x); }

inline double zk(const SpaceTimeField& f, int k, const LabParams& p) {
  if (sum_sq(f.data) == 0.0) return 0.0;
  return zk_norm_upper(f, k, p).value;
}

// Z_k norm of eta_k(xi) f on f's own (possibly padded) grid
inline double zk_shell(const SpaceTimeField& f, int k, const LabParams& p) {
  const auto sh = f.grid.shells();
  require(k >= sh.k_min && k <= sh.k_max, ErrorCode::unrepresentable,
          "output shell " + std::to_string(k) + " not representable");
  return zk(shell_restrict(f, k), k, p);
}

inline double sup_time_l2(const SpaceTimeField& f) {
  const SpaceTimeField m = convert(f, Domain::mixed);
  const std::size_t S = m.grid.spatial_size();
  const double w = measure(m.grid, Domain::fourier, false);
  double best = 0.0;
  for (int p = 0; p < m.grid.nt; ++p) {
    double s = 0.0;
    for (std::size_t i = 0; i < S; ++i) s += std::norm(m.data[p * S + i]);
    best = std::max(best, s * w);
  }
  return std::sqrt(best);
}

inline double xi_e(const double* xi, const Direction& e) {
  double v = 0.0;
  for (std::size_t a = 0; a < e.unit.size(); ++a) v += xi[a] * e.unit[a];
  return v;
}

inline std::string branch_name(std::initializer_list<bool> conj) {
  std::string s;
  for (bool b : conj) s += b ? 'c' : 'p';
  return s;
}

// product of physical fields on a common padded grid, returned in Fourier
inline SpaceTimeField physical_product(const std::vector<SpaceTimeField>& fs) {
  std::vector<const SpaceTimeField*> ptrs;
  for (const auto& f : fs) ptrs.push_back(&f);
  const GridSpec g = product_grid(ptrs);
  SpaceTimeField acc = to_physical(regrid(fs.front(), g));
  for (std::size_t i = 1; i < fs.size(); ++i) {
    const SpaceTimeField p = to_physical(regrid(fs[i], g));
    for (std::size_t n = 0; n < acc.data.size(); ++n) acc.data[n] *= p.data[n];
  }
  return to_fourier(acc);
}

inline SpaceTimeField derivative(const SpaceTimeField& f, int axis) {
  return apply_frequency_symbol(f, [axis](const double* xi, double) { return xi[axis]; });
}

inline ParamPoint pp(std::initializer_list<std::pair<std::string, int>> l) { return ParamPoint(l); }

// sqrt(w A_max) for supports of g1, g2 restricted to the output region:
// the sharp Cauchy-Schwarz constant of the discrete convolution
inline double sharp_l2conv_constant(const SpaceTimeField& g1, const SpaceTimeField& g2, int k, int j) {
  auto indicator = [](const SpaceTimeField& f) {
    SpaceTimeField ind = f;
    for (auto& v : ind.data) v = v == cplx{} ? cplx{} : cplx(1.0);
    return ind;
  };
  const SpaceTimeField a = indicator(g1), b = indicator(g2);
  const SpaceTimeField cnt = convolve(a, b);
  const double w = cnt.grid.cell_volume_xi() * cnt.grid.tau_step();
  const auto lat = lattice_of(cnt.grid);
  const std::size_t S = cnt.grid.spatial_size();
  double amax = 0.0;
  for (int m = 0; m < cnt.grid.nt; ++m) {
    const double tau = tau_of_bin(cnt.grid, m);
    for (std::size_t s = 0; s < S; ++s) {
      if (!in_shell_interval(k, lat->absxi[s]) || !in_modulation_interval(j, tau + lat->xi2[s])) continue;
      amax = std::max(amax, std::round(cnt.data[m * S + s].real() / w));
    }
  }
  return std::sqrt(w * amax);
}

inline double region_l2(const SpaceTimeField& f, int k, int j) {
  const auto lat = lattice_of(f.grid);
  const std::size_t S = f.grid.spatial_size();
  double acc = 0.0;
  for (int m = 0; m < f.grid.nt; ++m) {
    const double tau = tau_of_bin(f.grid, m);
    for (std::size_t s = 0; s < S; ++s)
      if (in_shell_interval(k, lat->absxi[s]) && in_modulation_interval(j, tau + lat->xi2[s]))
        acc += std::norm(f.data[m * S + s]);
  }
  return std::sqrt(acc * measure(f.grid, Domain::fourier, true));
}

}  // namespace probe_detail

// ---- registry ------------------------------------------------------------------

inline std::vector<EstimateRegistryEntry> build_registry() {
  using namespace probe_detail;
  std::vector<EstimateRegistryEntry> reg;
  const double dd = 3.0;  // probe grids are three-dimensional

  // L2CONV
  {
    EstimateRegistryEntry e{"L2CONV", "bt0", "||1_{D_{k,j}} (g1~ * g2~)||_{L^2}",
                            "2^{d min(k1,k2,k)/2} 2^{min(j1,j2,j)/2} ||g1|| ||g2||", {}, {}, {}};
    for (auto [k1, k2] : {std::pair{-1, 0}, std::pair{0, 0}})
      for (int k : {-1, 0, 1}) e.domain.push_back(pp({{"k1", k1}, {"k2", k2}, {"k", k}, {"j", 1}}));
    for (int j : {0, 2}) e.domain.push_back(pp({{"k1", 0}, {"k2", 0}, {"k", 0}, {"j", j}}));
    e.trial = [dd](const ProbeContext& c, const ParamPoint& p, int trial, Rng& rng) {
      const int k1 = param(p, "k1"), k2 = param(p, "k2"), k = param(p, "k"), j = param(p, "j");
      const bool c1 = trial & 1, c2 = (trial >> 1) & 1;
      const auto a1 = x_atom(c, k1, j, rng), a2 = x_atom(c, k2, j, rng);
      const SpaceTimeField g1 = maybe_conj(a1.f, c1), g2 = maybe_conj(a2.f, c2);
      const double n1 = l2_norm(g1), n2 = l2_norm(g2);
      const SpaceTimeField conv = convolve(g1, g2);
      const double lhs = region_l2(conv, k, j);
      const double rhs = pow2(dd * std::min({k1, k2, k}) / 2.0) * pow2(j / 2.0) * n1 * n2;
      const double sharp = sharp_l2conv_constant(g1, g2, k, j) * n1 * n2;
      const std::string br = branch_name({c1, c2});
      const std::string at = a1.label + "*" + a2.label;
      return std::vector<ProbeSample>{{"main", br, lhs, rhs, "", at, true}, {"sharp", br, lhs, sharp, "", at, false}};
    };
    reg.push_back(std::move(e));
  }

  // HIGHMOD
  {
    EstimateRegistryEntry e{"HIGHMOD", "qq1", "||f1~_{>=j1} * f2~_{>=j2}||_{L^2}",
                            "(2^{j2/2}+2^{(k1+k2)/2})^{-1} (b_{k1,j1} b_{k2,j2})^{-1} 2^{d k1/2} ||f1||_Z ||f2||_Z",
                            {}, {}, {}};
    for (auto [k1, k2] : {std::pair{-1, -1}, std::pair{-1, 0}, std::pair{0, 0}})
      for (int j : {0, 2}) e.domain.push_back(pp({{"k1", k1}, {"k2", k2}, {"j1", j}, {"j2", j}}));
    e.trial = [dd](const ProbeContext& c, const ParamPoint& p, int trial, Rng& rng) {
      const int k1 = param(p, "k1"), k2 = param(p, "k2"), j1 = param(p, "j1"), j2 = param(p, "j2");
      const bool c1 = (trial >> 1) & 1, c2 = (trial >> 2) & 1;
      const auto a1 = z_atom(c, k1, trial, rng, j1, j1 + 1);
      const auto a2 = z_atom(c, k2, trial, rng, j2, j2 + 1);
      auto ge = [](const SpaceTimeField& f, int j) {
        return apply_modulation_symbol(f, [j](double mu, std::size_t) { return eta_ge(j, mu); });
      };
      const SpaceTimeField f1 = maybe_conj(ge(a1.f, j1), c1), f2 = maybe_conj(ge(a2.f, j2), c2);
      const double lhs = l2_norm(convolve(f1, f2));
      const double rhs = a1.bound * a2.bound * pow2(dd * k1 / 2.0) /
                         ((pow2(j2 / 2.0) + pow2((k1 + k2) / 2.0)) * beta_weight(k1, j1) * beta_weight(k2, j2));
      return std::vector<ProbeSample>{{"main", branch_name({c1, c2}), lhs, rhs, "", a1.label + "*" + a2.label, true}};
    };
    reg.push_back(std::move(e));
  }

  // MAX
  {
    EstimateRegistryEntry e{"MAX", "pr40", "||F^{-1} f||_{L^{2,inf}_e'}", "2^{(d-1)k/2} ||f||_Z", {}, {}, {}};
    for (int k : {-1, 0, 1})
      for (int j : {0, 2}) e.domain.push_back(pp({{"k", k}, {"j", j}}));
    e.trial = [dd](const ProbeContext& c, const ParamPoint& p, int trial, Rng& rng) {
      const int k = param(p, "k"), j = param(p, "j");
      const auto a = z_atom(c, k, trial, rng, j, j);
      const Direction& ep = random_direction(c, rng);
      const double lhs = mixed_norm(a.f, ep, Exponent::two, Exponent::inf);
      const double rhs = pow2((dd - 1.0) * k / 2.0) * a.bound;
      return std::vector<ProbeSample>{{"main", "plain", lhs, rhs, label_of(ep), a.label, true}};
    };
    reg.push_back(std::move(e));
  }

  // SMOOTH
  {
    EstimateRegistryEntry e{"SMOOTH", "gu40main", "||F^{-1}[f eta_1(xi.e'/2^{k-l})]||_{L^{inf,2}_e'}",
                            "2^{-k/2} ||f||_Z", {}, {}, {}};
    for (int k : {-1, 0, 1})
      for (int l : {1, 2}) e.domain.push_back(pp({{"k", k}, {"l", l}}));
    e.trial = [](const ProbeContext& c, const ParamPoint& p, int trial, Rng& rng) {
      const int k = param(p, "k"), l = param(p, "l");
      const auto a = z_atom(c, k, trial, rng);
      // aligned with the Y-atom direction on Y trials, random otherwise
      const Direction ep = a.e && rng.uniform() < 0.5 ? *a.e : random_direction(c, rng);
      const double scale = std::ldexp(1.0, l - k);
      const SpaceTimeField g = apply_frequency_symbol(
          a.f, [&](const double* xi, double) { return eta_j(1, xi_e(xi, ep) * scale); });
      const double lhs = mixed_norm(g, ep, Exponent::inf, Exponent::two);
      const double rhs = pow2(-k / 2.0) * a.bound;
      return std::vector<ProbeSample>{{"main", "plain", lhs, rhs, label_of(ep), a.label, true}};
    };
    reg.push_back(std::move(e));
  }

  // ENERGY
  {
    EstimateRegistryEntry e{"ENERGY", "lb4/lb44", "sup_t ||F^{-1}f(t)||_{L^2_x} ; ||F^{-1}f||_{L^inf}",
                            "||f||_Z ; 2^{dk/2} ||f||_Z", {}, {}, {}};
    for (int k : {-1, 0, 1})
      for (int j : {0, 3}) e.domain.push_back(pp({{"k", k}, {"j", j}}));
    e.trial = [dd](const ProbeContext& c, const ParamPoint& p, int trial, Rng& rng) {
      const int k = param(p, "k"), j = param(p, "j");
      const auto a = z_atom(c, k, trial, rng, j, j);
      const double l2 = sup_time_l2(a.f);
      const double linf = sup_norm(to_physical(a.f).data);
      return std::vector<ProbeSample>{{"lb4", "plain", l2, a.bound, "", a.label, true},
                                      {"lb44", "plain", linf, pow2(dd * k / 2.0) * a.bound, "", a.label, true}};
    };
    reg.push_back(std::move(e));
  }

  // MODCUT
  {
    EstimateRegistryEntry e{"MODCUT", "vvs1", "||f eta_j(mu)||_{X_k}", "||f||_Z (Y-atoms)", {}, {}, {}};
    for (int k : {0, 1})
      for (int j = 0; j <= 4; ++j) e.domain.push_back(pp({{"k", k}, {"j", j}}));
    e.trial = [](const ProbeContext& c, const ParamPoint& p, int, Rng& rng) {
      const int k = param(p, "k"), j = param(p, "j");
      const auto a = y_atom(c, k, rng);
      const int j_max = c.grid.shells().j_max;
      const SpaceTimeField g =
          apply_modulation_symbol(a.f, [&](double mu, std::size_t) { return clamped_eta(std::min(j, j_max), j_max, mu); });
      const double lhs = sum_sq(g.data) == 0.0 ? 0.0 : xk_norm(g, k).value;
      return std::vector<ProbeSample>{{"main", "plain", lhs, a.bound, "", a.label, true}};
    };
    reg.push_back(std::move(e));
  }

  // MULTSMOOTH
  {
    EstimateRegistryEntry e{"MULTSMOOTH", "hv1/bt70", "||eta_{<=j}(mu) f||_Z", "||f||_Z", {}, {}, {}};
    for (int k : {-1, 0, 1})
      for (int j : {0, 2}) e.domain.push_back(pp({{"k", k}, {"j", j}}));
    e.trial = [](const ProbeContext& c, const ParamPoint& p, int trial, Rng& rng) {
      const int k = param(p, "k"), j = param(p, "j");
      const auto a = z_atom(c, k, trial, rng, 0, 3);
      const SpaceTimeField g = apply_modulation_symbol(a.f, [j](double mu, std::size_t) { return eta_le(j, mu); });
      return std::vector<ProbeSample>{{"main", "plain", zk(g, k, c.lab), a.bound, "", a.label, true}};
    };
    reg.push_back(std::move(e));
  }

  // MULT
  {
    EstimateRegistryEntry e{"MULT", "mi2", "||m(xi) f||_Z", "||F^{-1} m||_{L^1} ||f||_Z", {}, {}, {}};
    for (int k : {-1, 0, 1})
      for (int w : {0, 1}) e.domain.push_back(pp({{"k", k}, {"w", w}}));
    e.trial = [](const ProbeContext& c, const ParamPoint& p, int trial, Rng& rng) {
      const int k = param(p, "k"), wi = param(p, "w");
      const auto a = z_atom(c, k, trial, rng);
      const GridSpec& g = c.grid;
      const double s = std::ldexp(0.5, k - wi);
      std::vector<double> ctr(g.dim), x0(g.dim);
      for (auto& v : ctr) v = rng.normal();
      double nrm = 0.0;
      for (double v : ctr) nrm += v * v;
      const double rad = std::ldexp(rng.uniform(0.8, 1.25), k) / std::sqrt(nrm);
      for (auto& v : ctr) v *= rad;
      for (auto& v : x0) v = rng.uniform(-2.0, 2.0);
      auto m = [&](const double* xi) {
        double d2 = 0.0, ph = 0.0;
        for (int i = 0; i < g.dim; ++i) {
          d2 += (xi[i] - ctr[i]) * (xi[i] - ctr[i]);
          ph += x0[i] * xi[i];
        }
        return std::exp(-0.5 * d2 / (s * s)) * std::polar(1.0, -ph);
      };
      // ||F^{-1} m||_{L^1} on the torus, continuum normalization
      SpatialField mf = SpatialField::zeros(g, Domain::fourier);
      const auto lat = lattice_of(g);
      for (std::size_t i = 0; i < mf.data.size(); ++i) mf.data[i] = m(lat->xi_at(i));
      const SpatialField mx = to_physical(mf);
      double l1 = 0.0;
      for (const auto& v : mx.data) l1 += std::abs(v);
      l1 *= g.cell_volume_x();
      SpaceTimeField f = a.f;
      const std::size_t S = g.spatial_size();
      for (int t = 0; t < g.nt; ++t)
        for (std::size_t i = 0; i < S; ++i) f.data[t * S + i] *= mf.data[i];
      return std::vector<ProbeSample>{{"main", "plain", zk(f, k, c.lab), l1 * a.bound, "", a.label, true}};
    };
    reg.push_back(std::move(e));
  }

  // XX1
  {
    EstimateRegistryEntry e{"XX1", "xx1", "||f eta_j(mu)||_Z, f supported in xi.e >= 2^{k-offset}",
                            "2^{-k/2} ||F^{-1}[(mu+i) f]||_{L^{1,2}_e}", {}, {}, {}};
    for (int k : {-1, 0, 1})
      for (int j : {0, 2}) e.domain.push_back(pp({{"k", k}, {"j", j}}));
    e.trial = [](const ProbeContext& c, const ParamPoint& p, int trial, Rng& rng) {
      const int k = param(p, "k"), j = param(p, "j");
      const int j_max = c.grid.shells().j_max;
      const auto a = z_atom(c, k, trial, rng, std::max(0, j - 1), j + 1);
      const Direction e = a.e ? *a.e : random_direction(c, rng);
      const int off = c.lab.offset;
      SpaceTimeField f = apply_frequency_symbol(a.f, [&](const double* xi, double) {
        const double v = xi_e(xi, e);
        return v > 0.0 ? 1.0 - eta0(std::ldexp(v, off - k)) : 0.0;
      });
      if (sum_sq(f.data) == 0.0) return std::vector<ProbeSample>{{"main", "plain", 0.0, 0.0, label_of(e), a.label, true}};
      const SpaceTimeField g =
          apply_modulation_symbol(f, [&](double mu, std::size_t) { return clamped_eta(std::min(j, j_max), j_max, mu); });
      const double lhs = zk(g, k, c.lab);
      const double rhs =
          pow2(-k / 2.0) * mixed_norm(resolvent_multiplier(f, ResolventMode::multiply), e, Exponent::one, Exponent::two);
      return std::vector<ProbeSample>{{"main", "plain", lhs, rhs, label_of(e), a.label, true}};
    };
    reg.push_back(std::move(e));
  }

  // LINHOM
  {
    EstimateRegistryEntry e{"LINHOM", "Lemma 3.1", "||psi W(t) phi||_{F^sigma}", "||phi||_{B^sigma}", {}, {}, {}};
    for (int k : {-2, -1, 0, 1})
      for (int s : {0, 1}) e.domain.push_back(pp({{"k", k}, {"s", s}}));
    e.trial = [](const ProbeContext& c, const ParamPoint& p, int, Rng& rng) {
      const int k = param(p, "k");
      const double sigma = 0.5 * c.grid.dim + param(p, "s");
      AtomSpec a;
      a.kind = AtomKind::besov_shell;
      a.k = k;
      a.sigma = sigma;
      a.seed = rng.engine()();
      const auto at = make_atom(c.grid, a, c.lab);
      const double lhs = fsigma_norm(cutoff_free_solution(at.data), sigma, c.lab).total;
      return std::vector<ProbeSample>{{"main", "plain", lhs, at.norm_bound, "", "B(k=" + std::to_string(k) + ")", true}};
    };
    reg.push_back(std::move(e));
  }

  // LININH
  {
    EstimateRegistryEntry e{"LININH", "ni5", "||T f||_{Z_k}", "||f||_{Z_k}", {}, {}, {}};
    for (int k : {-1, 0, 1})
      for (int j : {0, 2}) e.domain.push_back(pp({{"k", k}, {"j", j}}));
    e.trial = [](const ProbeContext& c, const ParamPoint& p, int trial, Rng& rng) {
      const int k = param(p, "k"), j = param(p, "j");
      const auto a = z_atom(c, k, trial, rng, j, j);
      // T f = i sqrt(2 pi) F[Duhamel(F^{-1}[(mu + i) f])]
      const SpaceTimeField u = resolvent_multiplier(a.f, ResolventMode::multiply);
      const SpaceTimeField tf = scaled(to_fourier(duhamel(u)), cplx(0.0, std::sqrt(2.0 * std::numbers::pi)));
      return std::vector<ProbeSample>{{"main", "plain", zk(tf, k, c.lab), a.bound, "", a.label, true}};
    };
    reg.push_back(std::move(e));
  }

  // BIL1
  {
    EstimateRegistryEntry e{"BIL1", "bt1main", "2^{dk/2} ||eta_k (f1~ * f2)||_{Z_k}",
                            "2^{-|k2-k|/4} (2^{dk1/2}||f1||_Z)(2^{dk2/2}||f2||_Z)", {}, {}, {}};
    for (auto [k1, k2] : {std::pair{-1, -1}, std::pair{-1, 0}, std::pair{0, 0}})
      for (int k : {-1, 0, 1}) e.domain.push_back(pp({{"k1", k1}, {"k2", k2}, {"k", k}}));
    e.trial = [dd](const ProbeContext& c, const ParamPoint& p, int trial, Rng& rng) {
      const int k1 = param(p, "k1"), k2 = param(p, "k2"), k = param(p, "k");
      const bool c1 = (trial >> 1) & 1;
      const auto a1 = z_atom(c, k1, trial, rng), a2 = z_atom(c, k2, trial >> 2, rng);
      const SpaceTimeField conv = convolve(maybe_conj(a1.f, c1), a2.f);
      const double lhs = pow2(dd * k / 2.0) * zk_shell(conv, k, c.lab);
      const double rhs =
          pow2(-std::abs(k2 - k) / 4.0) * pow2(dd * k1 / 2.0) * a1.bound * pow2(dd * k2 / 2.0) * a2.bound;
      return std::vector<ProbeSample>{{"main", branch_name({c1}), lhs, rhs, "", a1.label + "*" + a2.label, true}};
    };
    reg.push_back(std::move(e));
  }

  // BIL2
  {
    EstimateRegistryEntry e{"BIL2", "bc1main", "2^{dk/2} ||eta_k (mu+i)^{-1} [f1~ * ((mu2+i) f2)]||_{Z_k}",
                            "(2^{dk1/2}||f1||_Z)(2^{dk2/2}||f2||_Z)", {}, {}, {}};
    for (int k : {-1, 0, 1}) e.domain.push_back(pp({{"k1", -2}, {"k2", 0}, {"k", k}}));
    e.trial = [dd](const ProbeContext& c, const ParamPoint& p, int trial, Rng& rng) {
      const int k1 = param(p, "k1"), k2 = param(p, "k2"), k = param(p, "k");
      require(k1 <= k2 - c.lab.offset && std::abs(k - k2) <= 2, ErrorCode::invalid_argument,
              "BIL2 needs k1 <= k2 - offset and |k - k2| <= 2");
      const bool c1 = (trial >> 1) & 1;
      const auto a1 = z_atom(c, k1, trial, rng), a2 = z_atom(c, k2, trial >> 2, rng);
      const SpaceTimeField conv =
          convolve(maybe_conj(a1.f, c1), resolvent_multiplier(a2.f, ResolventMode::multiply));
      const double lhs = pow2(dd * k / 2.0) * zk_shell(resolvent_multiplier(conv, ResolventMode::divide), k, c.lab);
      const double rhs = pow2(dd * k1 / 2.0) * a1.bound * pow2(dd * k2 / 2.0) * a2.bound;
      return std::vector<ProbeSample>{{"main", branch_name({c1}), lhs, rhs, "", a1.label + "*" + a2.label, true}};
    };
    reg.push_back(std::move(e));
  }

  // BIL3
  {
    EstimateRegistryEntry e{"BIL3", "br1main", "2^{dk/2} ||eta_k (mu+i)^{-1} [((mu1+i) f1) * f2]||_{Z_k}",
                            "2^{-|k2-k|/4} (2^{dk1/2}||f1||_Z)(2^{dk2/2}||f2||_Z)", {}, {}, {}};
    for (auto [k1, k2] : {std::pair{-1, 0}, std::pair{0, 0}, std::pair{0, -1}})
      for (int k : {-1, 0, 1}) e.domain.push_back(pp({{"k1", k1}, {"k2", k2}, {"k", k}}));
    e.trial = [dd](const ProbeContext& c, const ParamPoint& p, int trial, Rng& rng) {
      const int k1 = param(p, "k1"), k2 = param(p, "k2"), k = param(p, "k");
      const auto a1 = z_atom(c, k1, trial, rng), a2 = z_atom(c, k2, trial >> 1, rng);
      const SpaceTimeField conv = convolve(resolvent_multiplier(a1.f, ResolventMode::multiply), a2.f);
      const double lhs = pow2(dd * k / 2.0) * zk_shell(resolvent_multiplier(conv, ResolventMode::divide), k, c.lab);
      const double rhs =
          pow2(-std::abs(k2 - k) / 4.0) * pow2(dd * k1 / 2.0) * a1.bound * pow2(dd * k2 / 2.0) * a2.bound;
      return std::vector<ProbeSample>{{"main", "plain", lhs, rhs, "", a1.label + "*" + a2.label, true}};
    };
    reg.push_back(std::move(e));
  }

  // TRIL
  {
    EstimateRegistryEntry e{"TRIL", "vm1", "2^{k2+k3} 2^{dk/2} ||eta_k (mu+i)^{-1} (f1~ * f2~ * f3~)||_{Z_k}",
                            "2^{-|max(k1,k2,k3)-k|/4} prod (2^{dki/2}||fi||_Z)", {}, {}, {}};
    for (auto [k1, k2, k3] : {std::tuple{-1, -1, -1}, std::tuple{0, -1, -1}, std::tuple{-1, -1, 0}})
      for (int k : {-1, 0, 1}) e.domain.push_back(pp({{"k1", k1}, {"k2", k2}, {"k3", k3}, {"k", k}}));
    e.trial = [dd](const ProbeContext& c, const ParamPoint& p, int trial, Rng& rng) {
      const int k1 = param(p, "k1"), k2 = param(p, "k2"), k3 = param(p, "k3"), k = param(p, "k");
      require(std::min({k, k2, k3}) <= k1 + 20, ErrorCode::invalid_argument, "TRIL needs min(k,k2,k3) <= k1+20");
      const bool c1 = (trial >> 1) & 1, c2 = (trial >> 2) & 1, c3 = (trial >> 3) & 1;
      const auto a1 = z_atom(c, k1, trial, rng), a2 = z_atom(c, k2, trial, rng), a3 = z_atom(c, k3, trial, rng);
      const SpaceTimeField f1 = maybe_conj(a1.f, c1), f2 = maybe_conj(a2.f, c2), f3 = maybe_conj(a3.f, c3);
      const SpaceTimeField conv = convolve_all({&f1, &f2, &f3});
      const double lhs = pow2(k2 + k3) * pow2(dd * k / 2.0) *
                         zk_shell(resolvent_multiplier(conv, ResolventMode::divide), k, c.lab);
      const double rhs = pow2(-std::abs(std::max({k1, k2, k3}) - k) / 4.0) * pow2(dd * k1 / 2.0) * a1.bound *
                         pow2(dd * k2 / 2.0) * a2.bound * pow2(dd * k3 / 2.0) * a3.bound;
      return std::vector<ProbeSample>{
          {"main", branch_name({c1, c2, c3}), lhs, rhs, "", a1.label + "*" + a2.label + "*" + a3.label, true}};
    };
    reg.push_back(std::move(e));
  }

  // ALG
  {
    EstimateRegistryEntry e{"ALG", "Lemma 3.3", "(a) ||uv||_{F^{d/2}} ; (c) ||u~ 2 grad v . grad w||_{N^{d/2}}",
                            "(a) ||u||_F ||v||_F ; (c) ||u||_F ||v||_F ||w||_F", {}, {}, {}};
    for (auto [k1, k2] : {std::pair{-1, -1}, std::pair{-1, 0}, std::pair{0, 0}})
      e.domain.push_back(pp({{"k1", k1}, {"k2", k2}}));
    for (auto [k1, k2, k3] : {std::tuple{-1, -1, -1}, std::tuple{0, -1, -1}, std::tuple{-1, -1, 0}})
      e.domain.push_back(pp({{"k1", k1}, {"k2", k2}, {"k3", k3}}));
    e.trial = [dd](const ProbeContext& c, const ParamPoint& p, int trial, Rng& rng) {
      const double sigma = 0.5 * dd;
      // X-atoms on shell plateaus: ||F^{-1} f||_{F^{d/2}} <= 2^{dk/2} ||f||_{X_k}
      auto f_atom = [&](int k) { return x_atom(c, k, rng.uniform_int(0, 2), rng); };
      if (p.size() == 2) {
        const int k1 = param(p, "k1"), k2 = param(p, "k2");
        const auto a1 = f_atom(k1), a2 = f_atom(k2);
        const SpaceTimeField prod = physical_product({a1.f, a2.f});
        const double lhs = fsigma_norm(prod, sigma, c.lab).total;
        const double rhs = pow2(dd * k1 / 2.0) * a1.bound * pow2(dd * k2 / 2.0) * a2.bound;
        return std::vector<ProbeSample>{{"a", "plain", lhs, rhs, "", a1.label + "*" + a2.label, true}};
      }
      const int k1 = param(p, "k1"), k2 = param(p, "k2"), k3 = param(p, "k3");
      const bool c1 = trial & 1;
      const auto a1 = f_atom(k1), a2 = f_atom(k2), a3 = f_atom(k3);
      const SpaceTimeField u = maybe_conj(a1.f, c1);
      std::vector<const SpaceTimeField*> ptrs{&u, &a2.f, &a3.f};
      const GridSpec g = product_grid(ptrs);
      const SpaceTimeField up = to_physical(regrid(u, g));
      SpaceTimeField acc = SpaceTimeField::zeros(g);
      for (int l = 0; l < g.dim; ++l) {
        const SpaceTimeField dv = to_physical(regrid(scaled(derivative(a2.f, l), cplx(0.0, 1.0)), g));
        const SpaceTimeField dw = to_physical(regrid(scaled(derivative(a3.f, l), cplx(0.0, 1.0)), g));
        for (std::size_t n = 0; n < acc.data.size(); ++n) acc.data[n] += 2.0 * up.data[n] * dv.data[n] * dw.data[n];
      }
      const double lhs = nsigma_norm(to_fourier(acc), sigma, c.lab).total;
      const double rhs = pow2(dd * k1 / 2.0) * a1.bound * pow2(dd * k2 / 2.0) * a2.bound * pow2(dd * k3 / 2.0) * a3.bound;
      return std::vector<ProbeSample>{
          {"c", branch_name({c1}), lhs, rhs, "", a1.label + "*" + a2.label + "*" + a3.label, true}};
    };
    reg.push_back(std::move(e));
  }

  // NL
  {
    EstimateRegistryEntry e{"NL", "jj2", "||N(u) - N(v)||_{N^{d/2}}", "eps^2 ||u - v||_{F^{d/2}}", {}, {}, {}};
    for (int k : {-2, -1})
      for (int m : {0, 1, 2}) e.domain.push_back(pp({{"k", k}, {"m", m}}));
    e.trial = [dd](const ProbeContext& c, const ParamPoint& p, int, Rng& rng) {
      const int k = param(p, "k"), m = param(p, "m");
      const double sigma = 0.5 * dd;
      const double eps = 0.01 * std::ldexp(1.0, -m);
      AtomSpec a;
      a.kind = AtomKind::besov_shell;
      a.k = k;
      a.sigma = sigma;
      a.target = eps;
      a.seed = rng.engine()();
      const auto phi = make_atom(c.grid, a, c.lab).data;
      a.seed = rng.engine()();
      a.target = 0.1 * eps;
      const auto dphi = make_atom(c.grid, a, c.lab).data;
      const SpaceTimeField u = cutoff_free_solution(phi);
      const SpaceTimeField v = cutoff_free_solution(linear_combination(cplx(1.0), phi, cplx(1.0), dphi));
      const double fu = fsigma_norm(u, sigma, c.lab).total, fv = fsigma_norm(v, sigma, c.lab).total;
      const double radius = std::max(fu, fv);
      const SpaceTimeField diff = linear_combination(cplx(1.0), to_fourier(u), cplx(-1.0), to_fourier(v));
      const SpaceTimeField ndiff =
          linear_combination(cplx(1.0), to_fourier(nonlinearity(u)), cplx(-1.0), to_fourier(nonlinearity(v)));
      const double lhs = nsigma_norm(ndiff, sigma, c.lab).total;
      const double rhs = radius * radius * fsigma_norm(diff, sigma, c.lab).total;
      return std::vector<ProbeSample>{{"main", "plain", lhs, rhs, "", "B(k=" + std::to_string(k) + ")", true}};
    };
    reg.push_back(std::move(e));
  }

  // NULLFORM: exact identity, residual reported as the ratio
  {
    EstimateRegistryEntry e{"NULLFORM", "null", "relative residual of 2 grad v . grad w = H(vw) - w Hv - v Hw", "1",
                            {pp({{"n", 0}})}, {}, 1e-10};
    e.trial = [](const ProbeContext& c, const ParamPoint&, int, Rng& rng) {
      const GridSpec& g = c.grid;
      const int cut = g.n / 6, tcut = g.nt / 6;
      auto field = [&]() {
        SpaceTimeField f = SpaceTimeField::zeros(g, Domain::fourier);
        const auto lat = lattice_of(g);
        const std::size_t S = g.spatial_size();
        for (int m = 0; m < g.nt; ++m) {
          if (std::abs(signed_index(m, g.nt)) > tcut) continue;
          for (std::size_t s = 0; s < S; ++s) {
            bool in = true;
            for (int a = 0; a < g.dim; ++a) in = in && std::abs(lat->index_at(s)[a]) <= cut;
            if (in) f.data[m * S + s] = rng.complex_normal();
          }
        }
        return f;
      };
      const double r = null_form_residual(field(), field());
      return std::vector<ProbeSample>{{"main", "plain", r, 1.0, "", "band-limited pair", true}};
    };
    reg.push_back(std::move(e));
  }
  return reg;
}

inline const std::vector<EstimateRegistryEntry>& registry() {
  static const std::vector<EstimateRegistryEntry> reg = build_registry();
  return reg;
}

inline const EstimateRegistryEntry& find_entry(const std::string& id) {
  for (const auto& e : registry())
    if (e.id == id) return e;
  throw Error(ErrorCode::invalid_argument, "unknown estimate id '" + id + "'");
}

inline std::vector<std::string> acceptance_probe_ids() {
  return {"L2CONV", "HIGHMOD", "MAX",  "SMOOTH", "ENERGY", "MODCUT", "MULTSMOOTH", "MULT", "XX1",
          "LINHOM", "LININH",  "BIL1", "BIL2",   "BIL3",   "TRIL",   "ALG",        "NL"};
}

// ---- running ---------------------------------------------------------------------

inline std::uint64_t trial_seed(std::uint64_t base, const std::string& id, const ParamPoint& p, int trial) {
  return derive_seed(base, {hash_string(id.c_str()), hash_string(to_string(p).c_str()), static_cast<std::uint64_t>(trial)});
}

inline std::vector<EstimateProbeResult> run_probe(const EstimateRegistryEntry& entry, const ProbeConfig& cfg) {
  require(cfg.trials >= 1, ErrorCode::invalid_argument, "run_probe: trials must be positive");
  const auto& points = cfg.points.empty() ? entry.domain : cfg.points;
  const ProbeContext ctx{cfg.grid, cfg.lab};
  const std::size_t n_tasks = points.size() * static_cast<std::size_t>(cfg.trials);
  std::vector<std::vector<EstimateProbeResult>> slots(n_tasks);
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;

  auto work = [&]() {
    for (std::size_t t; (t = next.fetch_add(1)) < n_tasks;) {
      const auto& pt = points[t / cfg.trials];
      const int trial = static_cast<int>(t % cfg.trials);
      const std::uint64_t seed = trial_seed(cfg.seed, entry.id, pt, trial);
      try {
        Rng rng(seed);
        for (const auto& s : entry.trial(ctx, pt, trial, rng)) {
          EstimateProbeResult r{entry.id, s.variant, s.branch, pt, s.direction, s.atoms, s.lhs, s.rhs, 0.0,
                                seed,     trial,     false,    s.in_verdict};
          require(s.lhs >= 0.0 && s.rhs >= 0.0 && std::isfinite(s.lhs) && std::isfinite(s.rhs),
                  ErrorCode::invalid_argument, entry.id + ": non-finite or negative probe value");
          if (s.rhs == 0.0)
            r.skipped = true;
          else
            r.ratio = s.lhs / s.rhs;
          slots[t].push_back(std::move(r));
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
        next = n_tasks;
      }
    }
  };
  const int workers = std::max(1, cfg.workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);
  std::vector<EstimateProbeResult> out;
  for (auto& s : slots)
    for (auto& r : s) out.push_back(std::move(r));
  std::stable_sort(out.begin(), out.end(), [](const EstimateProbeResult& a, const EstimateProbeResult& b) {
    return std::tie(a.estimate_id, a.params, a.seed, a.variant) < std::tie(b.estimate_id, b.params, b.seed, b.variant);
  });
  return out;
}

// ---- verdicts --------------------------------------------------------------------------

struct VariantSummary {
  double max_ratio = 0.0;
  std::map<std::string, double> slopes;  // swept parameter -> slope of log2(max ratio)
  std::map<std::string, double> max_ratio_by_branch;
  bool in_verdict = true;
  bool pass = true;
  EstimateProbeResult worst;
};

struct ProbeSummary {
  std::string estimate_id;
  double max_ratio = 0.0;
  int n_trials = 0;
  int n_skipped = 0;
  bool pass = true;
  std::map<std::string, VariantSummary> variants;
};

// least-squares slope of y against x
inline double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx == 0.0 ? 0.0 : sxy / sxx;
}

inline ProbeSummary summarize(const std::string& id, const std::vector<EstimateProbeResult>& rs, double threshold,
                              std::optional<double> absolute_bound = std::nullopt) {
  ProbeSummary sum;
  sum.estimate_id = id;
  std::set<std::pair<std::string, int>> trials;
  for (const auto& r : rs) {
    trials.insert({to_string(r.params), r.trial});
    if (r.skipped) {
      ++sum.n_skipped;
      continue;
    }
    auto& v = sum.variants[r.variant];
    v.in_verdict = r.in_verdict;
    if (r.ratio >= v.max_ratio) {
      v.max_ratio = r.ratio;
      v.worst = r;
    }
    auto& b = v.max_ratio_by_branch[r.branch];
    b = std::max(b, r.ratio);
  }
  sum.n_trials = static_cast<int>(trials.size());
  for (auto& [name, v] : sum.variants) {
    // group maxima per value of each parameter
    std::map<std::string, std::map<int, double>> groups;
    for (const auto& r : rs) {
      if (r.skipped || r.variant != name) continue;
      for (const auto& [pn, pv] : r.params) {
        auto& g = groups[pn][pv];
        g = std::max(g, r.ratio);
      }
    }
    for (const auto& [pn, g] : groups) {
      std::vector<double> x, y;
      for (const auto& [pv, mx] : g)
        if (mx > 0.0) {
          x.push_back(pv);
          y.push_back(std::log2(mx));
        }
      if (x.size() < 2) continue;
      v.slopes[pn] = regression_slope(x, y);
    }
    if (absolute_bound)
      v.pass = v.max_ratio <= *absolute_bound;
    else
      for (const auto& [pn, s] : v.slopes) v.pass = v.pass && s <= threshold;
    if (v.in_verdict) {
      sum.pass = sum.pass && v.pass;
      sum.max_ratio = std::max(sum.max_ratio, v.max_ratio);
    }
  }
  return sum;
}

// ---- output ------------------------------------------------------------------------------

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline void write_csv_header(std::ostream& os) {
  os << "estimate_id,variant,branch,params,trial,seed,lhs,rhs,ratio,skipped,direction,atoms\n";
}

inline void write_csv_rows(std::ostream& os, const std::vector<EstimateProbeResult>& rs) {
  for (const auto& r : rs)
    os << r.estimate_id << ',' << r.variant << ',' << r.branch << ',' << to_string(r.params) << ',' << r.trial << ','
       << r.seed << ',' << format_double(r.lhs) << ',' << format_double(r.rhs) << ',' << format_double(r.ratio) << ','
       << (r.skipped ? 1 : 0) << ",\"" << r.direction << "\",\"" << r.atoms << "\"\n";
}

inline nlohmann::json summary_json(const ProbeSummary& s) {
  nlohmann::json j;
  j["estimate_id"] = s.estimate_id;
  j["max_ratio"] = s.max_ratio;
  j["n_trials"] = s.n_trials;
  j["n_skipped"] = s.n_skipped;
  j["verdict"] = s.pass ? "PASS" : "FAIL";
  nlohmann::json vs = nlohmann::json::object();
  double slope = 0.0;
  bool any = false;
  for (const auto& [name, v] : s.variants) {
    nlohmann::json jv;
    jv["max_ratio"] = v.max_ratio;
    jv["regression_slopes"] = v.slopes;
    jv["max_ratio_by_branch"] = v.max_ratio_by_branch;
    jv["in_verdict"] = v.in_verdict;
    jv["verdict"] = v.pass ? "PASS" : "FAIL";
    jv["worst"] = {{"params", to_string(v.worst.params)},
                   {"trial", v.worst.trial},
                   {"seed", v.worst.seed},
                   {"direction", v.worst.direction},
                   {"atoms", v.worst.atoms}};
    vs[name] = jv;
    if (v.in_verdict)
      for (const auto& [pn, sl] : v.slopes) {
        slope = any ? std::max(slope, sl) : sl;
        any = true;
      }
  }
  j["regression_slope"] = slope;
  j["variants"] = vs;
  return j;
}

}  // namespace smlab
