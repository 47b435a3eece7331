#pragma once

// Besov, mixed, X_k, Y_k and Z_k norms on discretized fields.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "smlab/directions.hpp"
#include "smlab/dyadic.hpp"
#include "smlab/fiber.hpp"
#include "smlab/field.hpp"
#include "smlab/modulation.hpp"

namespace smlab {

// Desk-scale parameters of the Y_k / Z_k machinery.
struct LabParams {
  int k_y = 2;            // Y_k^e is trivial for k < k_y
  int offset = 2;         // replaces the large exponent gaps (2k+10 -> 2k+offset, k'-80 -> k'-offset, ...)
  int shortlist = 3;      // directions tried per Z_k evaluation
  double support_tol = 1e-8;
  std::shared_ptr<const DirectionSet> directions;  // null: default set for the grid dimension
};

inline std::shared_ptr<const DirectionSet> default_direction_set(int dim) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const DirectionSet>> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(dim); it != cache.end()) return it->second;
  auto set = std::make_shared<const DirectionSet>(build_direction_set(dim, 0.5));
  cache.emplace(dim, set);
  return set;
}

inline const DirectionSet& directions_of(const LabParams& p, int dim) {
  if (p.directions) return *p.directions;
  return *default_direction_set(dim);
}

inline double beta_weight(int k, int j) {
  require(j >= 0, ErrorCode::invalid_argument, "beta_weight: negative j");
  const int kp = std::max(k, 0);
  return 1.0 + std::pow(2.0, 0.5 * (j - 2 * kp));
}

inline double gamma_weight(int d, int k, int kprime) {
  if (kprime < 1 || kprime > k + 1)
    throw Error(ErrorCode::invalid_argument, "gamma_weight: k' = " + std::to_string(kprime) + " outside [1, k+1]");
  return std::pow(2.0, 2.0 * d * (k - kprime));
}

inline double besov_weight(int d, int k, double sigma) { return std::max(std::pow(2.0, 0.5 * d * k), std::pow(2.0, sigma * k)); }

// T_k = [9k/10, k+1] intersected with [1, k+1]
inline std::vector<int> sector_range(int k) {
  std::vector<int> out;
  const int lo = std::max(1, static_cast<int>(std::ceil(0.9 * k - 1e-12)));
  for (int kp = lo; kp <= k + 1; ++kp) out.push_back(kp);
  return out;
}

// ---- Besov ----------------------------------------------------------------

struct BesovNormResult {
  double sigma = 0.0;
  double total = 0.0;
  std::map<int, double> per_shell;  // weighted contributions
  double outside_mass = 0.0;        // L^2 mass not covered by representable shells
};

inline BesovNormResult besov_norm(const SpatialField& phi, double sigma) {
  const SpatialField f = to_fourier(phi);
  const GridSpec& g = f.grid;
  require(sigma >= 0.5 * g.dim - 1e-12, ErrorCode::invalid_argument, "besov_norm: sigma must be at least d/2");
  const auto lat = lattice_of(g);
  const auto sh = g.shells();
  const double w = measure(g, Domain::fourier, false);
  BesovNormResult r;
  r.sigma = sigma;
  std::vector<double> acc(sh.k_max - sh.k_min + 1, 0.0);
  double outside = 0.0;
  for (std::size_t s = 0; s < f.data.size(); ++s) {
    const double e = std::norm(f.data[s]);
    if (e == 0.0) continue;
    double covered = 0.0;
    for (int k = sh.k_min; k <= sh.k_max; ++k) {
      const double c = shell_symbol_abs(k, lat->absxi[s]);
      covered += c;
      acc[k - sh.k_min] += c * c * e;
    }
    outside += (1.0 - covered) * (1.0 - covered) * e;
  }
  for (int k = sh.k_min; k <= sh.k_max; ++k) {
    const double v = besov_weight(g.dim, k, sigma) * std::sqrt(acc[k - sh.k_min] * w);
    r.per_shell[k] = v;
    r.total += v;
  }
  r.outside_mass = std::sqrt(outside * w);
  return r;
}

inline double sphere_distance(const SphereField& f, const SphereField& g, double sigma) {
  require(f.grid.same_space(g.grid), ErrorCode::grid_mismatch, "sphere_distance: grids differ");
  double total = 0.0;
  for (int l = 0; l < 3; ++l) {
    SpatialField d = SpatialField::zeros(f.grid);
    for (std::size_t s = 0; s < d.data.size(); ++s) d.data[s] = f.data[s][l] - g.data[s][l];
    total += besov_norm(d, sigma).total;
  }
  return total;
}

// ---- support checks ----------------------------------------------------------

inline void check_shell_support(const SpaceTimeField& f, int k, double tol, const char* what) {
  const auto lat = lattice_of(f.grid);
  const std::size_t S = f.grid.spatial_size();
  double in = 0.0, out = 0.0;
  for (int m = 0; m < f.grid.nt; ++m)
    for (std::size_t s = 0; s < S; ++s) {
      const double e = std::norm(f.data[m * S + s]);
      if (e == 0.0) continue;
      (in_shell_interval(k, lat->absxi[s]) ? in : out) += e;
    }
  if (out > 0.0 && std::sqrt(out / (in + out)) > tol)
    throw Error(ErrorCode::support_violation, std::string(what) + ": relative mass " +
                                                  std::to_string(std::sqrt(out / (in + out))) + " outside shell " +
                                                  std::to_string(k));
}

// ---- X_k ---------------------------------------------------------------------

struct XkNormResult {
  double value = 0.0;
  std::vector<double> terms;  // 2^{j/2} beta_{k,j} ||eta_j f||, j = 0..j_max
};

namespace detail {

// weighted X_k sum from per-j squared L^2 energies
inline XkNormResult xk_from_energies(const std::vector<double>& energy, int k, double w) {
  XkNormResult r;
  r.terms.resize(energy.size());
  for (std::size_t j = 0; j < energy.size(); ++j) {
    r.terms[j] = std::pow(2.0, 0.5 * j) * beta_weight(k, static_cast<int>(j)) * std::sqrt(energy[j] * w);
    r.value += r.terms[j];
  }
  return r;
}

}  // namespace detail

inline XkNormResult xk_norm(const SpaceTimeField& f, int k, double tol = 1e-8) {
  require_domain(f.domain, Domain::fourier, "xk_norm");
  check_shell_support(f, k, tol, "xk_norm");
  const GridSpec& g = f.grid;
  const int j_max = g.shells().j_max;
  const auto lat = lattice_of(g);
  const std::size_t S = g.spatial_size();
  std::vector<double> energy(j_max + 1, 0.0);
  for (int m = 0; m < g.nt; ++m) {
    const double tau = tau_of_bin(g, m);
    for (std::size_t s = 0; s < S; ++s) {
      const double e = std::norm(f.data[m * S + s]);
      if (e == 0.0) continue;
      modulation_partition(tau + lat->xi2[s], j_max, [&](int j, double wj) { energy[j] += wj * wj * e; });
    }
  }
  return detail::xk_from_energies(energy, k, measure(g, Domain::fourier, true));
}

// ---- Y_k ---------------------------------------------------------------------

inline double xi_dot(const Lattice& lat, std::size_t s, const Direction& e) {
  const double* x = lat.xi_at(s);
  double v = 0.0;
  for (int a = 0; a < lat.dim; ++a) v += x[a] * e.unit[a];
  return v;
}

inline void check_y_support(const SpaceTimeField& f, int k, const Direction& e, int kprime, const LabParams& p) {
  const GridSpec& g = f.grid;
  const auto lat = lattice_of(g);
  const std::size_t S = g.spatial_size();
  const double mu_cap = std::ldexp(1.0, 2 * k + p.offset + 1);
  double in = 0.0, out = 0.0;
  for (int m = 0; m < g.nt; ++m) {
    const double tau = tau_of_bin(g, m);
    for (std::size_t s = 0; s < S; ++s) {
      const double en = std::norm(f.data[m * S + s]);
      if (en == 0.0) continue;
      const double xe = xi_dot(*lat, s, e);
      const bool ok = in_shell_interval(k, lat->absxi[s]) && xe >= 0.0 && in_shell_interval(kprime, xe) &&
                      std::abs(tau + lat->xi2[s]) <= mu_cap;
      (ok ? in : out) += en;
    }
  }
  if (out > 0.0 && std::sqrt(out / (in + out)) > p.support_tol)
    throw Error(ErrorCode::support_violation, "yk_norm: relative mass " + std::to_string(std::sqrt(out / (in + out))) +
                                                  " outside D^{e,k'}_{k,<=2k+offset}");
}

namespace detail {

struct SparseEntry {
  int m;          // time-frequency bin
  std::size_t s;  // spatial bin
  cplx v;
};

// ||F^{-1}[(mu + i) f]||_{L^{1,2}_e} from the nonzero coefficients of f,
// sorted by m; only the occupied tau slices are transformed
inline double resolvent_l12(const GridSpec& g, const std::vector<SparseEntry>& es, const Direction& e) {
  const auto idx = fiber_index(g, e);
  const auto lat = lattice_of(g);
  const double dr = fiber_spacing(g, e);
  const std::size_t S = g.spatial_size();
  const auto dims = spatial_dims(g);
  const double c = space_backward_scale(g);
  std::vector<double> acc(g.n, 0.0);
  std::vector<cplx> slice(S);
  for (std::size_t i = 0; i < es.size();) {
    const int m = es[i].m;
    const double tau = tau_of_bin(g, m);
    std::fill(slice.begin(), slice.end(), cplx{});
    for (; i < es.size() && es[i].m == m; ++i) slice[es[i].s] = es[i].v * cplx(tau + lat->xi2[es[i].s], 1.0);
    fft::transform(slice.data(), dims, fft::Sign::backward);
    for (std::size_t s = 0; s < S; ++s) acc[idx[s]] += std::norm(slice[s]);
  }
  const double w = c * c * g.cell_volume_x() * g.tau_step() / dr;
  for (auto& v : acc) v = std::sqrt(v * w);
  return outer_norm(acc, dr, Exponent::one);
}

inline std::vector<SparseEntry> sparse_entries(const SpaceTimeField& f) {
  const std::size_t S = f.grid.spatial_size();
  std::vector<SparseEntry> es;
  for (int m = 0; m < f.grid.nt; ++m)
    for (std::size_t s = 0; s < S; ++s)
      if (f.data[m * S + s] != cplx{}) es.push_back({m, s, f.data[m * S + s]});
  return es;
}

inline double yk_scale(int d, int k, int kprime) { return std::pow(2.0, -0.5 * kprime) * gamma_weight(d, k, kprime); }

// 2^{-k'/2} gamma ||F^{-1}[(mu + i) f]||_{L^{1,2}_e} without support checks
inline double yk_value(const SpaceTimeField& f, int k, const Direction& e, int kprime) {
  require_domain(f.domain, Domain::fourier, "yk_value");
  return yk_scale(f.grid.dim, k, kprime) * resolvent_l12(f.grid, sparse_entries(f), e);
}

}  // namespace detail

inline double yk_norm(const SpaceTimeField& f, int k, const Direction& e, int kprime, const LabParams& p = {}) {
  require_domain(f.domain, Domain::fourier, "yk_norm");
  require(k >= p.k_y, ErrorCode::invalid_argument,
          "yk_norm: Y spaces are trivial for k < k_Y = " + std::to_string(p.k_y));
  gamma_weight(f.grid.dim, k, kprime);
  check_y_support(f, k, e, kprime, p);
  return detail::yk_value(f, k, e, kprime);
}

struct YkeNormResult {
  double value = 0.0;
  std::map<int, double> per_sector;  // k' -> ||f eta^+_{k'}(xi.e)||_{Y^{e,k'}}
};

inline YkeNormResult yk_e_norm(const SpaceTimeField& f, int k, const Direction& e, const LabParams& p = {}) {
  require_domain(f.domain, Domain::fourier, "yk_e_norm");
  YkeNormResult r;
  const auto lat = lattice_of(f.grid);
  for (int kp = 1; kp <= k + 1; ++kp) {
    SpaceTimeField piece =
        apply_frequency_symbol(f, [&](const double* xi, double) {
          double v = 0.0;
          for (int a = 0; a < lat->dim; ++a) v += xi[a] * e.unit[a];
          return eta_plus(kp, v);
        });
    if (sum_sq(piece.data) == 0.0) continue;
    const double v = yk_norm(piece, k, e, kp, p);
    r.per_sector[kp] = v;
    r.value += v;
  }
  return r;
}

// ---- Z_k ---------------------------------------------------------------------

struct ZkChoice {
  bool pure_x = true;
  Direction direction;
  int threshold = -1;           // low part is f * eta_{<= threshold}(mu)
  std::vector<int> sectors;     // k' values receiving Y pieces
};

struct ZkNormResult {
  double value = 0.0;
  double x_part = 0.0;
  double y_part = 0.0;
  ZkChoice choice;
  std::vector<double> x_terms;
  std::map<int, double> y_terms;
  int candidates = 0;
};

namespace detail {

struct SparseBin {
  std::size_t index;  // m * S + s
  std::size_t s;
  double mu;
};

inline std::vector<SparseBin> nonzero_bins(const SpaceTimeField& f) {
  const auto lat = lattice_of(f.grid);
  const std::size_t S = f.grid.spatial_size();
  std::vector<SparseBin> out;
  for (int m = 0; m < f.grid.nt; ++m) {
    const double tau = tau_of_bin(f.grid, m);
    for (std::size_t s = 0; s < S; ++s)
      if (f.data[m * S + s] != cplx{}) out.push_back({m * S + s, s, tau + lat->xi2[s]});
  }
  return out;
}

// per-bin factor sum_{k'} eta^+_{k'}(xi.e) for the given sectors
inline double sector_weight(const Lattice& lat, std::size_t s, const Direction& e, const std::vector<int>& sectors) {
  const double xe = xi_dot(lat, s, e);
  double w = 0.0;
  for (int kp : sectors) w += eta_plus(kp, xe);
  return w;
}

}  // namespace detail

inline ZkNormResult zk_norm_upper(const SpaceTimeField& f, int k, const LabParams& p = {}) {
  require_domain(f.domain, Domain::fourier, "zk_norm_upper");
  check_shell_support(f, k, p.support_tol, "zk_norm_upper");
  const GridSpec& g = f.grid;
  const int j_max = g.shells().j_max;
  const double w = measure(g, Domain::fourier, true);
  const auto lat = lattice_of(g);
  const auto bins = detail::nonzero_bins(f);

  ZkNormResult best;
  {
    std::vector<double> energy(j_max + 1, 0.0);
    for (const auto& b : bins) {
      const double e = std::norm(f.data[b.index]);
      modulation_partition(b.mu, j_max, [&](int j, double wj) { energy[j] += wj * wj * e; });
    }
    auto x = detail::xk_from_energies(energy, k, w);
    best.value = best.x_part = x.value;
    best.x_terms = std::move(x.terms);
    best.candidates = 1;
  }
  const auto sectors = sector_range(k);
  if (k < p.k_y || sectors.empty() || bins.empty()) return best;

  // shortlist directions by the energy they capture
  const DirectionSet& dirs = directions_of(p, g.dim);
  std::vector<double> spatial_energy(g.spatial_size(), 0.0);
  for (const auto& b : bins) spatial_energy[b.s] += std::norm(f.data[b.index]);
  std::vector<std::pair<double, int>> ranked;
  for (std::size_t l = 0; l < dirs.size(); ++l) {
    double c = 0.0;
    for (std::size_t s = 0; s < spatial_energy.size(); ++s) {
      if (spatial_energy[s] == 0.0) continue;
      const double sw = detail::sector_weight(*lat, s, dirs.directions[l], sectors);
      c += sw * sw * spatial_energy[s];
    }
    ranked.emplace_back(-c, static_cast<int>(l));
  }
  std::sort(ranked.begin(), ranked.end());
  const int n_dirs = std::min<int>(p.shortlist, static_cast<int>(ranked.size()));
  const int top_threshold = std::min(2 * k + p.offset, j_max);

  for (int r = 0; r < n_dirs; ++r) {
    if (ranked[r].first == 0.0) break;
    const Direction& e = dirs.directions[ranked[r].second];
    std::vector<double> sw(bins.size());
    for (std::size_t i = 0; i < bins.size(); ++i) sw[i] = detail::sector_weight(*lat, bins[i].s, e, sectors);
    std::vector<double> prev_low;
    for (int js = 0; js <= top_threshold; ++js) {
      std::vector<double> low(bins.size());
      bool any_low = false;
      for (std::size_t i = 0; i < bins.size(); ++i) {
        low[i] = eta_le(js, bins[i].mu) * sw[i];
        any_low = any_low || low[i] > 0.0;
      }
      // thresholds that leave the split unchanged give the same candidate
      if (!any_low || low == prev_low) continue;
      prev_low = low;
      ++best.candidates;
      std::vector<double> energy(j_max + 1, 0.0);
      for (std::size_t i = 0; i < bins.size(); ++i) {
        const double keep = 1.0 - low[i];
        const double e = std::norm(f.data[bins[i].index]) * keep * keep;
        if (e == 0.0) continue;
        modulation_partition(bins[i].mu, j_max, [&](int j, double wj) { energy[j] += wj * wj * e; });
      }
      auto x = detail::xk_from_energies(energy, k, w);
      if (x.value >= best.value) continue;
      double y_total = 0.0;
      std::map<int, double> y_terms;
      const std::size_t S = g.spatial_size();
      for (int kp : sectors) {
        std::vector<detail::SparseEntry> es;
        for (std::size_t i = 0; i < bins.size(); ++i) {
          if (low[i] == 0.0) continue;
          const double c = eta_le(js, bins[i].mu) * eta_plus(kp, xi_dot(*lat, bins[i].s, e));
          if (c == 0.0) continue;
          es.push_back({static_cast<int>(bins[i].index / S), bins[i].s, f.data[bins[i].index] * c});
        }
        if (es.empty()) continue;
        const double v = detail::yk_scale(g.dim, k, kp) * detail::resolvent_l12(g, es, e);
        y_terms[kp] = v;
        y_total += v;
        if (x.value + y_total >= best.value) break;
      }
      if (x.value + y_total < best.value) {
        const int cand = best.candidates;
        best = ZkNormResult{};
        best.candidates = cand;
        best.value = x.value + y_total;
        best.x_part = x.value;
        best.y_part = y_total;
        best.x_terms = std::move(x.terms);
        best.y_terms = std::move(y_terms);
        best.choice.pure_x = false;
        best.choice.direction = e;
        best.choice.threshold = js;
        best.choice.sectors = sectors;
      }
    }
  }
  return best;
}

// ---- atomic decomposition ----------------------------------------------------

struct YPiece {
  Direction direction;
  int kprime = 0;
  SpaceTimeField field;
  double norm = 0.0;
};

struct XPiece {
  int j = 0;
  SpaceTimeField field;
  double norm = 0.0;  // 2^{j/2} beta_{k,j} ||g_j||
};

struct ZkDecomposition {
  int k = 0;
  std::vector<XPiece> x_pieces;
  std::vector<YPiece> y_pieces;
  double norm_bound = 0.0;
  ZkChoice choice;
};

inline ZkDecomposition atomic_decompose(const SpaceTimeField& f, int k, const LabParams& p = {}) {
  const ZkNormResult z = zk_norm_upper(f, k, p);
  const GridSpec& g = f.grid;
  const int j_max = g.shells().j_max;
  const auto lat = lattice_of(g);
  const auto bins = detail::nonzero_bins(f);
  ZkDecomposition dec;
  dec.k = k;
  dec.choice = z.choice;
  dec.norm_bound = z.value;

  std::vector<cplx> rest(bins.size());
  for (std::size_t i = 0; i < bins.size(); ++i) rest[i] = f.data[bins[i].index];
  if (!z.choice.pure_x) {
    const auto& e = z.choice.direction;
    for (int kp : z.choice.sectors) {
      YPiece y{e, kp, SpaceTimeField::zeros(g, Domain::fourier), 0.0};
      bool nonzero = false;
      for (std::size_t i = 0; i < bins.size(); ++i) {
        const double c = eta_le(z.choice.threshold, bins[i].mu) * eta_plus(kp, xi_dot(*lat, bins[i].s, e));
        if (c == 0.0) continue;
        const cplx v = f.data[bins[i].index] * c;
        y.field.data[bins[i].index] = v;
        rest[i] -= v;
        nonzero = true;
      }
      if (!nonzero) continue;
      y.norm = detail::yk_value(y.field, k, e, kp);
      dec.y_pieces.push_back(std::move(y));
    }
  }
  std::vector<SpaceTimeField> xs(j_max + 1);
  std::vector<bool> used(j_max + 1, false);
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (rest[i] == cplx{}) continue;
    modulation_partition(bins[i].mu, j_max, [&](int j, double wj) {
      if (!used[j]) {
        xs[j] = SpaceTimeField::zeros(g, Domain::fourier);
        used[j] = true;
      }
      xs[j].data[bins[i].index] += wj * rest[i];
    });
  }
  for (int j = 0; j <= j_max; ++j) {
    if (!used[j]) continue;
    const double nrm = std::pow(2.0, 0.5 * j) * beta_weight(k, j) * l2_norm(xs[j]);
    dec.x_pieces.push_back({j, std::move(xs[j]), nrm});
  }
  return dec;
}

// ---- F^sigma and N^sigma ----------------------------------------------------

struct ShellSumResult {
  double total = 0.0;
  std::map<int, double> per_shell;  // weighted Z_k contributions
};

inline ShellSumResult fsigma_norm(const SpaceTimeField& u, double sigma, const LabParams& p = {}) {
  const SpaceTimeField f = to_fourier(u);
  require(sigma >= 0.5 * f.grid.dim - 1e-12, ErrorCode::invalid_argument, "fsigma_norm: sigma must be at least d/2");
  const auto sh = f.grid.shells();
  ShellSumResult r;
  for (int k = sh.k_min; k <= sh.k_max; ++k) {
    const SpaceTimeField fk = shell_restrict(f, k);
    if (sum_sq(fk.data) == 0.0) continue;
    const double v = besov_weight(f.grid.dim, k, sigma) * zk_norm_upper(fk, k, p).value;
    r.per_shell[k] = v;
    r.total += v;
  }
  return r;
}

inline ShellSumResult nsigma_norm(const SpaceTimeField& u, double sigma, const LabParams& p = {}) {
  return fsigma_norm(resolvent_multiplier(to_fourier(u), ResolventMode::divide), sigma, p);
}

}  // namespace smlab
