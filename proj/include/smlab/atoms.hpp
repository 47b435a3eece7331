#pragma once

// Frequency-localized random atoms with certified norm bounds.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "smlab/dyadic.hpp"
#include "smlab/field.hpp"
#include "smlab/norms.hpp"
#include "smlab/random.hpp"

namespace smlab {

enum class AtomKind { x, y, besov_shell, wave_packet };

inline const char* to_string(AtomKind k) {
  switch (k) {
    case AtomKind::x: return "X";
    case AtomKind::y: return "Y";
    case AtomKind::besov_shell: return "besov_shell";
    case AtomKind::wave_packet: return "wave_packet";
  }
  return "?";
}

struct AtomSpec {
  AtomKind kind = AtomKind::x;
  int k = 0;
  int j = 0;             // X-atoms
  Direction e;           // Y-atoms and wave packets
  int kprime = 1;        // Y-atoms
  double width = 0.25;   // wave packets: Gaussian width in units of 2^k
  double sigma = 1.5;    // Besov-shell atoms
  std::uint64_t seed = 0;
  double target = 1.0;
};

struct Atom {
  SpaceTimeField field;  // Fourier domain (empty for Besov-shell atoms)
  SpatialField data;     // Fourier domain, Besov-shell atoms only
  double norm_bound = 0.0;
  std::string norm;      // "X_k", "Z_k", "B^sigma"
};

// plateau of the shell symbol: eta_k = 1 for |xi| in [0.8, 1.25] 2^k
inline bool on_shell_plateau(int k, double abs_xi) {
  return abs_xi >= std::ldexp(0.8, k) && abs_xi <= std::ldexp(bump_plateau, k);
}

// plateau of the clamped eta_j in the modulation variable
inline bool on_modulation_plateau(int j, int j_max, double mu) {
  const double a = std::abs(mu);
  if (j == 0) return a <= bump_plateau;
  if (j >= j_max) return a >= std::ldexp(0.8, j_max);
  return a >= std::ldexp(0.8, j) && a <= std::ldexp(bump_plateau, j);
}

namespace detail {

inline void scale_to(std::vector<cplx>& v, double from, double to) {
  if (from == 0.0) throw Error(ErrorCode::unrepresentable, "atom has zero norm");
  for (auto& c : v) c *= to / from;
}

inline Atom make_x_atom(const GridSpec& g, const AtomSpec& a) {
  const int j_max = g.shells().j_max;
  require(a.j >= 0 && a.j <= j_max, ErrorCode::unrepresentable,
          "X-atom: j = " + std::to_string(a.j) + " outside [0, " + std::to_string(j_max) + "]");
  const auto lat = lattice_of(g);
  const std::size_t S = g.spatial_size();
  Rng rng(a.seed);
  Atom out{SpaceTimeField::zeros(g, Domain::fourier), {}, 0.0, "X_k"};
  for (int m = 0; m < g.nt; ++m) {
    const double tau = tau_of_bin(g, m);
    for (std::size_t s = 0; s < S; ++s) {
      if (!on_shell_plateau(a.k, lat->absxi[s])) continue;
      if (!on_modulation_plateau(a.j, j_max, tau + lat->xi2[s])) continue;
      out.field.data[m * S + s] = rng.complex_normal();
    }
  }
  if (sum_sq(out.field.data) == 0.0)
    throw Error(ErrorCode::unrepresentable,
                "X-atom: no lattice bins in D_{" + std::to_string(a.k) + "," + std::to_string(a.j) + "}");
  if (a.target == 0.0) {
    std::fill(out.field.data.begin(), out.field.data.end(), cplx{});
    return out;
  }
  const double w = std::pow(2.0, 0.5 * a.j) * beta_weight(a.k, a.j);
  scale_to(out.field.data, w * l2_norm(out.field), a.target);
  out.norm_bound = a.target;
  return out;
}

}  // namespace detail

// Kernel of the Y-atom at one bin: everything except the random profile A.
struct YKernel {
  int k = 0;
  int kprime = 1;
  int offset = 2;
  double y0 = 0.0;

  cplx operator()(const double* xi, const Direction& e, int dim, double tau) const {
    double x1 = 0.0, r2 = 0.0;
    for (int a = 0; a < dim; ++a) {
      x1 += xi[a] * e.unit[a];
      r2 += xi[a] * xi[a];
    }
    const double perp2 = r2 - x1 * x1;
    const double s = -tau - perp2;
    if (s <= 0.0) return {};
    const double M = std::sqrt(s);
    const double cm = eta_range(std::max(1, kprime - 1), kprime + 1, M);
    if (cm == 0.0) return {};
    // eta_0 at scale 2^{k'-offset}; the scale may be fractional
    const double cl = eta0(std::ldexp(x1 - M, offset - kprime));
    if (cl == 0.0) return {};
    const double pre = std::pow(2.0, -0.5 * kprime);
    const cplx den{x1 - M, std::ldexp(1.0, -kprime)};
    return pre * cm * cl / den * std::exp(cplx(0.0, -y0 * x1));
  }
};

namespace detail {

// smooth indicator of -tau - |xi'|^2 in [2^{2k'-offset}, 2^{2k'+offset}]
inline double y_region(double s, int kprime, int offset) {
  if (s <= 0.0) return 0.0;
  const double lo = std::ldexp(1.0, 2 * kprime - offset);
  const double hi = std::ldexp(1.0, 2 * kprime + offset);
  return smooth_step((s - lo) / (0.25 * lo)) * smooth_step((hi - s) / (0.25 * hi));
}

inline Atom make_y_atom(const GridSpec& g, const AtomSpec& a, const LabParams& p) {
  require(a.k >= p.k_y, ErrorCode::unrepresentable,
          "Y-atom: k = " + std::to_string(a.k) + " below k_Y = " + std::to_string(p.k_y));
  gamma_weight(g.dim, a.k, a.kprime);
  require(a.e.dim() == g.dim, ErrorCode::unrepresentable, "Y-atom: direction dimension differs from grid");
  const auto lat = lattice_of(g);
  const std::size_t S = g.spatial_size();
  Rng rng(a.seed);
  const double L = g.period();
  YKernel ker{a.k, a.kprime, p.offset, rng.uniform(-0.25 * L, 0.25 * L)};
  std::vector<double> x0(g.dim);
  for (auto& c : x0) c = rng.uniform(-0.25 * L, 0.25 * L);
  const double t0 = rng.uniform(-1.0, 1.0);
  const cplx amp = rng.complex_normal();
  const double mu_top = 2 * a.k + p.offset;

  Atom out{SpaceTimeField::zeros(g, Domain::fourier), {}, 0.0, "Z_k"};
  for (int m = 0; m < g.nt; ++m) {
    const double tau = tau_of_bin(g, m);
    for (std::size_t s = 0; s < S; ++s) {
      const double shell = shell_symbol_abs(a.k, lat->absxi[s]);
      if (shell == 0.0) continue;
      const double cmu = eta_le(static_cast<int>(mu_top), tau + lat->xi2[s]);
      if (cmu == 0.0) continue;
      const double* xi = lat->xi_at(s);
      double x1 = 0.0, phase = t0 * tau;
      for (int d = 0; d < g.dim; ++d) x1 += xi[d] * a.e.unit[d];
      for (int d = 0; d < g.dim; ++d) phase += x0[d] * (xi[d] - x1 * a.e.unit[d]);
      const double region = y_region(-tau - (lat->xi2[s] - x1 * x1), a.kprime, p.offset);
      if (region == 0.0) continue;
      const cplx v = ker(xi, a.e, g.dim, tau);
      if (v == cplx{}) continue;
      out.field.data[m * S + s] = shell * cmu * region * amp * std::exp(cplx(0.0, -phase)) * v;
    }
  }
  if (sum_sq(out.field.data) == 0.0)
    throw Error(ErrorCode::unrepresentable, "Y-atom: empty support at k = " + std::to_string(a.k) +
                                                ", k' = " + std::to_string(a.kprime));
  if (a.target == 0.0) {
    std::fill(out.field.data.begin(), out.field.data.end(), cplx{});
    return out;
  }
  // certified Z_k bound: Y pieces on the sectors of e, the remainder in X_k
  const auto sectors = sector_range(a.k);
  SpaceTimeField rest = out.field;
  double bound = 0.0;
  for (int kp : sectors) {
    SpaceTimeField piece = apply_frequency_symbol(out.field, [&](const double* xi, double) {
      double v = 0.0;
      for (int d = 0; d < g.dim; ++d) v += xi[d] * a.e.unit[d];
      return eta_plus(kp, v);
    });
    if (sum_sq(piece.data) == 0.0) continue;
    bound += yk_norm(piece, a.k, a.e, kp, p);
    for (std::size_t i = 0; i < rest.data.size(); ++i) rest.data[i] -= piece.data[i];
  }
  bound += xk_norm(rest, a.k, p.support_tol).value;
  scale_to(out.field.data, bound, a.target);
  out.norm_bound = a.target;
  return out;
}

inline Atom make_besov_atom(const GridSpec& g, const AtomSpec& a) {
  const auto lat = lattice_of(g);
  Rng rng(a.seed);
  Atom out{{}, SpatialField::zeros(g, Domain::fourier), 0.0, "B^sigma"};
  for (std::size_t s = 0; s < lat->size(); ++s)
    if (on_shell_plateau(a.k, lat->absxi[s])) out.data.data[s] = rng.complex_normal();
  if (sum_sq(out.data.data) == 0.0)
    throw Error(ErrorCode::unrepresentable, "Besov atom: shell " + std::to_string(a.k) + " has no lattice points");
  if (a.target == 0.0) {
    std::fill(out.data.data.begin(), out.data.data.end(), cplx{});
    return out;
  }
  scale_to(out.data.data, besov_weight(g.dim, a.k, a.sigma) * l2_norm(out.data), a.target);
  out.norm_bound = a.target;
  return out;
}

inline Atom make_wave_packet(const GridSpec& g, const AtomSpec& a) {
  require(a.e.dim() == g.dim, ErrorCode::unrepresentable, "wave packet: direction dimension differs from grid");
  require(a.width > 0.0, ErrorCode::unrepresentable, "wave packet: width must be positive");
  const auto lat = lattice_of(g);
  const std::size_t S = g.spatial_size();
  Rng rng(a.seed);
  const double c = std::ldexp(1.0, a.k);
  const double w = a.width * c;
  std::vector<double> x0(g.dim);
  for (auto& v : x0) v = rng.uniform(-0.25 * g.period(), 0.25 * g.period());
  std::vector<cplx> spatial(S);
  for (std::size_t s = 0; s < S; ++s) {
    const double* xi = lat->xi_at(s);
    double d2 = 0.0, ph = 0.0;
    for (int d = 0; d < g.dim; ++d) {
      d2 += (xi[d] - c * a.e.unit[d]) * (xi[d] - c * a.e.unit[d]);
      ph += x0[d] * xi[d];
    }
    spatial[s] = shell_symbol_abs(a.k, lat->absxi[s]) * std::exp(-0.5 * d2 / (w * w)) * std::exp(cplx(0.0, -ph));
  }
  Atom out{SpaceTimeField::zeros(g, Domain::fourier), {}, 0.0, "X_k"};
  for (int m = 0; m < g.nt; ++m) {
    const double tau = tau_of_bin(g, m);
    for (std::size_t s = 0; s < S; ++s) {
      if (spatial[s] == cplx{}) continue;
      out.field.data[m * S + s] = spatial[s] * eta0(tau + lat->xi2[s]);
    }
  }
  if (sum_sq(out.field.data) == 0.0) throw Error(ErrorCode::unrepresentable, "wave packet: empty support");
  if (a.target == 0.0) {
    std::fill(out.field.data.begin(), out.field.data.end(), cplx{});
    return out;
  }
  scale_to(out.field.data, xk_norm(out.field, a.k).value, a.target);
  out.norm_bound = a.target;
  return out;
}

}  // namespace detail

inline Atom make_atom(const GridSpec& g, const AtomSpec& a, const LabParams& p = {}) {
  require(a.target >= 0.0, ErrorCode::invalid_argument, "make_atom: negative target");
  const auto sh = g.shells();
  require(a.k >= sh.k_min && a.k <= sh.k_max, ErrorCode::unrepresentable,
          "make_atom: shell " + std::to_string(a.k) + " outside [" + std::to_string(sh.k_min) + ", " +
              std::to_string(sh.k_max) + "]");
  switch (a.kind) {
    case AtomKind::x: return detail::make_x_atom(g, a);
    case AtomKind::y: return detail::make_y_atom(g, a, p);
    case AtomKind::besov_shell: return detail::make_besov_atom(g, a);
    case AtomKind::wave_packet: return detail::make_wave_packet(g, a);
  }
  throw Error(ErrorCode::invalid_argument, "make_atom: unknown kind");
}

}  // namespace smlab
