#pragma once

// Free propagator, time-cutoff Duhamel operator, Picard solver for
// (i d_t + Lap) u = N(u), a Strang split-step reference solver and the
// Lipschitz probe of the solution map.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "smlab/dealias.hpp"
#include "smlab/dyadic.hpp"
#include "smlab/field.hpp"
#include "smlab/gauge.hpp"
#include "smlab/norms.hpp"

namespace smlab {

// time cutoff: 1 on [-5/4, 5/4], supported in [-8/5, 8/5]
inline double time_cutoff(double t) { return eta0(t); }

inline void require_window(const GridSpec& g) {
  require(0.5 * g.t_window >= bump_support, ErrorCode::window_too_short,
          "time window " + std::to_string(g.t_window) + " does not contain the cutoff support");
}

inline SpatialField free_evolution(const SpatialField& phi, double t) {
  SpatialField f = to_fourier(phi);
  const auto lat = lattice_of(f.grid);
  for (std::size_t s = 0; s < f.data.size(); ++s) f.data[s] *= std::polar(1.0, -t * lat->xi2[s]);
  return phi.domain == Domain::physical ? to_physical(f) : f;
}

// psi(t) W(t) phi on the space-time grid of phi.grid, in the mixed domain
inline SpaceTimeField cutoff_free_solution(const SpatialField& phi) {
  const GridSpec& g = phi.grid;
  require_window(g);
  const SpatialField f = to_fourier(phi);
  const auto lat = lattice_of(g);
  const std::size_t S = g.spatial_size();
  SpaceTimeField u = SpaceTimeField::zeros(g, Domain::mixed);
  for (int p = 0; p < g.nt; ++p) {
    const double t = g.time_at(p);
    const double c = time_cutoff(t);
    if (c == 0.0) continue;
    cplx* row = u.slice(p);
    for (std::size_t s = 0; s < S; ++s) row[s] = c * f.data[s] * std::polar(1.0, -t * lat->xi2[s]);
  }
  return u;
}

// psi(t) int_0^t W(t - s) u(s) ds, exact per spatial mode for the
// trigonometric interpolant of u in time. Returns the mixed domain.
inline SpaceTimeField duhamel(const SpaceTimeField& u) {
  const GridSpec& g = u.grid;
  require_window(g);
  SpaceTimeField a = convert(u, Domain::mixed);
  const auto lat = lattice_of(g);
  const std::size_t S = g.spatial_size();
  const int nt = g.nt;

  // c_m = (-1)^m DFT_m / N_t are the coefficients of sum_m c_m e^{i t tau_m}
  fft::transform_strided(a.data.data(), nt, static_cast<int>(S), static_cast<int>(S), fft::Sign::forward);
  std::vector<cplx> sum_b(S, cplx{}), sum_res(S, cplx{});
  for (int m = 0; m < nt; ++m) {
    const double tau = tau_of_bin(g, m);
    const double sign = (m & 1) ? -1.0 : 1.0;
    cplx* row = a.data.data() + m * S;
    for (std::size_t s = 0; s < S; ++s) {
      const cplx c = row[s] * (sign / nt);
      const double mu = tau + lat->xi2[s];
      if (std::abs(mu) <= 1e-12 * std::max(1.0, lat->xi2[s])) {
        sum_res[s] += c;
        row[s] = {};
      } else {
        const cplx b = c / cplx(0.0, mu);
        sum_b[s] += b;
        row[s] = b * sign;  // phase for the inverse transform at t_p = t0 + p dt
      }
    }
  }
  fft::transform_strided(a.data.data(), nt, static_cast<int>(S), static_cast<int>(S), fft::Sign::backward);
  for (int p = 0; p < nt; ++p) {
    const double t = g.time_at(p);
    const double c = time_cutoff(t);
    cplx* row = a.slice(p);
    if (c == 0.0) {
      std::fill(row, row + S, cplx{});
      continue;
    }
    for (std::size_t s = 0; s < S; ++s) {
      const cplx ph = std::polar(1.0, -t * lat->xi2[s]);
      row[s] = c * (row[s] - ph * sum_b[s] + t * ph * sum_res[s]);
    }
  }
  return a;
}

// ---- Picard --------------------------------------------------------------------

struct SolverConfig {
  double epsilon = 0.01;
  int max_iters = 50;
  double tolerance = 1e-10;
  bool dealias = true;
  bool track_f_norm = false;
  int divergence_window = 5;
  double residual_window = 1.0;  // strong residual over |t| <= this
};

struct IterationTrace {
  std::vector<double> increment_l2;  // relative grid L^2
  std::vector<double> increment_f;   // F^{d/2} surrogate (only when tracked)
  std::vector<double> ratio;         // increment_n / increment_{n-1}, NaN for n = 0
  std::vector<double> residual;      // integral-equation residual of iterate n (relative)
  double integral_residual = 0.0;
  double strong_residual = 0.0;      // relative to ||Lap u|| on the residual window
  double data_norm = 0.0;            // ||phi||_{B^{d/2}}
  bool within_radius = true;
  bool converged = false;
  int iterations = 0;
};

class SolverDivergence : public Error {
 public:
  SolverDivergence(const std::string& what, IterationTrace trace)
      : Error(ErrorCode::divergence, what), trace_(std::move(trace)) {}
  const IterationTrace& trace() const { return trace_; }

 private:
  IterationTrace trace_;
};

namespace detail {

inline SpaceTimeField picard_map(const SpaceTimeField& u0, const SpaceTimeField& u) {
  SpaceTimeField d = duhamel(nonlinearity(u));
  for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] = u0.data[i] - cplx(0.0, 1.0) * d.data[i];
  return d;
}

inline double relative_increment(const SpaceTimeField& next, const SpaceTimeField& prev) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < next.data.size(); ++i) {
    num += std::norm(next.data[i] - prev.data[i]);
    den += std::norm(next.data[i]);
  }
  return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

}  // namespace detail

// Relative residual of (i d_t + Lap) u - N(u) on |t| <= window: 4th-order
// central differences in time, spectral Laplacian.
inline double strong_residual(const SpaceTimeField& u, double window) {
  const SpaceTimeField m = convert(u, Domain::mixed);
  const GridSpec& g = m.grid;
  const auto lat = lattice_of(g);
  const std::size_t S = g.spatial_size();
  const double dt = g.dt();
  std::vector<cplx> nl(S);
  double acc = 0.0, ref = 0.0;
  for (int p = 2; p + 2 < g.nt; ++p) {
    const double t = g.time_at(p);
    if (std::abs(t) > window + 1e-12) continue;
    nonlinearity_slice(m.slice(p), g, nl.data());
    for (std::size_t s = 0; s < S; ++s) {
      const cplx dtu = (-m.slice(p + 2)[s] + 8.0 * m.slice(p + 1)[s] - 8.0 * m.slice(p - 1)[s] + m.slice(p - 2)[s]) /
                       (12.0 * dt);
      const cplx lap = -lat->xi2[s] * m.slice(p)[s];
      acc += std::norm(cplx(0.0, 1.0) * dtu + lap - nl[s]);
      ref += std::norm(lap);
    }
  }
  return ref == 0.0 ? std::sqrt(acc) : std::sqrt(acc / ref);
}

struct PicardResult {
  SpaceTimeField u;  // mixed domain
  IterationTrace trace;
};

inline PicardResult picard_solve(const SpatialField& phi, const SolverConfig& cfg = {}) {
  require(cfg.max_iters >= 1 && cfg.tolerance > 0.0, ErrorCode::config, "picard_solve: bad iteration settings");
  SpatialField data = to_fourier(phi);
  if (cfg.dealias) data = two_thirds_project(data);
  IterationTrace tr;
  tr.data_norm = besov_norm(data, 0.5 * data.grid.dim).total;
  tr.within_radius = tr.data_norm <= cfg.epsilon * (1.0 + 1e-9);

  const SpaceTimeField u0 = cutoff_free_solution(data);
  SpaceTimeField u = u0;
  int bad = 0;
  for (int n = 0; n < cfg.max_iters; ++n) {
    SpaceTimeField next = detail::picard_map(u0, u);
    const double inc = detail::relative_increment(next, u);
    tr.increment_l2.push_back(inc);
    if (n > 0) tr.residual.push_back(inc);
    if (cfg.track_f_norm) {
      const SpaceTimeField diff = linear_combination(cplx(1.0), next, cplx(-1.0), u);
      tr.increment_f.push_back(fsigma_norm(to_fourier(diff), 0.5 * data.grid.dim).total);
    }
    const double prev = n > 0 ? tr.increment_l2[n - 1] : std::numeric_limits<double>::quiet_NaN();
    const double ratio = n > 0 ? (prev > 0.0 ? inc / prev : 0.0) : std::numeric_limits<double>::quiet_NaN();
    tr.ratio.push_back(ratio);
    u = std::move(next);
    tr.iterations = n + 1;
    if (inc <= cfg.tolerance) {
      tr.converged = true;
      break;
    }
    bad = (n > 0 && ratio >= 1.0) ? bad + 1 : 0;
    if (bad >= cfg.divergence_window)
      throw SolverDivergence("picard_solve: increment ratio >= 1 for " + std::to_string(bad) + " iterations", tr);
  }
  tr.integral_residual = detail::relative_increment(detail::picard_map(u0, u), u);
  tr.residual.push_back(tr.integral_residual);
  tr.strong_residual = strong_residual(u, cfg.residual_window);
  if (!tr.converged) throw SolverDivergence("picard_solve: no convergence within max_iters", tr);
  return {std::move(u), std::move(tr)};
}

// Spatial field at time sample p of a solver output.
inline SpatialField time_slice(const SpaceTimeField& u, int p) {
  const SpaceTimeField m = convert(u, Domain::mixed);
  SpatialField f = SpatialField::zeros(m.grid, Domain::fourier);
  std::copy(m.slice(p), m.slice(p) + m.grid.spatial_size(), f.data.begin());
  return f;
}

// grid sample index of time t, if t lies on the grid
inline std::optional<int> time_index(const GridSpec& g, double t) {
  const double q = (t - g.t0()) / g.dt();
  const long r = std::lround(q);
  if (std::abs(q - r) > 1e-9 || r < 0 || r >= g.nt) return std::nullopt;
  return static_cast<int>(r);
}

// ---- split-step reference -------------------------------------------------------

namespace detail {

inline void linear_step(std::vector<cplx>& f, const Lattice& lat, double h) {
  for (std::size_t s = 0; s < f.size(); ++s) f[s] *= std::polar(1.0, -h * lat.xi2[s]);
}

// one RK4 step of u' = -i N(u) on Fourier coefficients
inline void nonlinear_step(std::vector<cplx>& f, const GridSpec& g, double h) {
  const std::size_t S = f.size();
  auto rhs = [&](const std::vector<cplx>& x) {
    std::vector<cplx> out(S);
    nonlinearity_slice(x.data(), g, out.data());
    for (auto& z : out) z *= cplx(0.0, -1.0);
    return out;
  };
  std::vector<cplx> tmp(S);
  const auto k1 = rhs(f);
  for (std::size_t s = 0; s < S; ++s) tmp[s] = f[s] + 0.5 * h * k1[s];
  const auto k2 = rhs(tmp);
  for (std::size_t s = 0; s < S; ++s) tmp[s] = f[s] + 0.5 * h * k2[s];
  const auto k3 = rhs(tmp);
  for (std::size_t s = 0; s < S; ++s) tmp[s] = f[s] + h * k3[s];
  const auto k4 = rhs(tmp);
  for (std::size_t s = 0; s < S; ++s) f[s] += h / 6.0 * (k1[s] + 2.0 * k2[s] + 2.0 * k3[s] + k4[s]);
}

}  // namespace detail

// States at t = 0, h, 2h, ..., t_end with h = t_end / steps (Fourier domain).
inline std::vector<SpatialField> splitstep_trajectory(const SpatialField& phi, double t_end, int steps,
                                                      bool with_nonlinearity = true, bool dealias = true) {
  require(steps >= 1, ErrorCode::invalid_argument, "splitstep: steps must be at least 1");
  SpatialField f = to_fourier(phi);
  if (dealias) f = two_thirds_project(f);
  const auto lat = lattice_of(f.grid);
  const double h = t_end / steps;
  std::vector<SpatialField> out;
  out.reserve(steps + 1);
  out.push_back(f);
  for (int n = 0; n < steps; ++n) {
    detail::linear_step(f.data, *lat, 0.5 * h);
    if (with_nonlinearity) detail::nonlinear_step(f.data, f.grid, h);
    detail::linear_step(f.data, *lat, 0.5 * h);
    out.push_back(f);
  }
  return out;
}

inline SpatialField splitstep_solve(const SpatialField& phi, double t_end, int steps, bool with_nonlinearity = true) {
  require(steps >= 1, ErrorCode::invalid_argument, "splitstep: steps must be at least 1");
  SpatialField f = two_thirds_project(to_fourier(phi));
  const auto lat = lattice_of(f.grid);
  const double h = t_end / steps;
  for (int n = 0; n < steps; ++n) {
    detail::linear_step(f.data, *lat, 0.5 * h);
    if (with_nonlinearity) detail::nonlinear_step(f.data, f.grid, h);
    detail::linear_step(f.data, *lat, 0.5 * h);
  }
  return phi.domain == Domain::physical ? to_physical(f) : f;
}

// ---- Lipschitz probe ----------------------------------------------------------------

struct LipschitzResult {
  double ratio = 0.0;
  double data_distance = 0.0;
  double sup_distance = 0.0;
  double worst_time = 0.0;
  bool degenerate = false;
};

inline LipschitzResult lipschitz_probe(const SpatialField& phi, const SpatialField& phi2, const SolverConfig& cfg = {}) {
  require(phi.grid == phi2.grid, ErrorCode::grid_mismatch, "lipschitz_probe: grids differ");
  const double sigma = 0.5 * phi.grid.dim;
  LipschitzResult r;
  const SpatialField a = two_thirds_project(to_fourier(phi));
  const SpatialField b = two_thirds_project(to_fourier(phi2));
  r.data_distance = besov_norm(linear_combination(cplx(1.0), a, cplx(-1.0), b), sigma).total;
  if (r.data_distance == 0.0) {
    r.degenerate = true;
    return r;
  }
  const auto u = picard_solve(a, cfg).u;
  const auto v = picard_solve(b, cfg).u;
  const GridSpec& g = u.grid;
  for (int p = 0; p < g.nt; ++p) {
    const double t = g.time_at(p);
    if (std::abs(t) > 1.0 + 1e-12) continue;
    const SpatialField d = linear_combination(cplx(1.0), time_slice(u, p), cplx(-1.0), time_slice(v, p));
    const double dist = besov_norm(d, sigma).total;
    if (dist > r.sup_distance) {
      r.sup_distance = dist;
      r.worst_time = t;
    }
  }
  r.ratio = r.sup_distance / r.data_distance;
  return r;
}

}  // namespace smlab
