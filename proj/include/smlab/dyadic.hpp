#pragma once

// Littlewood-Paley cutoffs in the modulation and frequency variables, and
// the lattice cutoffs chi_{k,n}.

#include <cmath>
#include <span>
#include <string>

#include "smlab/error.hpp"

namespace smlab {

inline constexpr double bump_support = 8.0 / 5.0;
inline constexpr double bump_plateau = 5.0 / 4.0;

namespace detail {
inline double exp_inv(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
}  // namespace detail

// C-infinity step: 0 for x <= 0, 1 for x >= 1, and S(x) + S(1-x) = 1.
inline double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = detail::exp_inv(x);
  const double b = detail::exp_inv(1.0 - x);
  return a / (a + b);
}

inline double eta0(double mu) {
  return smooth_step((bump_support - std::abs(mu)) / (bump_support - bump_plateau));
}

// eta_{<=j}: eta0(mu / 2^j) for j >= 0, identically zero for j < 0.
inline double eta_le(int j, double mu) {
  if (j < 0) return 0.0;
  return eta0(std::ldexp(mu, -j));
}

inline double eta_j(int j, double mu) {
  if (j < 0) throw Error(ErrorCode::invalid_argument, "eta_j: negative index " + std::to_string(j));
  if (j == 0) return eta0(mu);
  return eta0(std::ldexp(mu, -j)) - eta0(std::ldexp(mu, -(j - 1)));
}

// eta_{[j1,j2]} = sum_{j1<=j'<=j2} eta_{j'}, with eta_{j'} = 0 for j' < 0.
inline double eta_range(int j1, int j2, double mu) {
  if (j2 < 0 || j1 > j2) return 0.0;
  return eta_le(j2, mu) - eta_le(j1 - 1, mu);
}

inline double eta_ge(int j, double mu) { return 1.0 - eta_le(j - 1, mu); }

inline double eta_plus(int j, double mu) { return mu >= 0.0 ? eta_j(j, mu) : 0.0; }
inline double eta_minus(int j, double mu) { return mu < 0.0 ? eta_j(j, mu) : 0.0; }
inline double eta_range_plus(int j1, int j2, double mu) { return mu >= 0.0 ? eta_range(j1, j2, mu) : 0.0; }
inline double eta_range_minus(int j1, int j2, double mu) { return mu < 0.0 ? eta_range(j1, j2, mu) : 0.0; }

// eta_k^{(d)} as a function of |xi|; k ranges over all integers.
inline double shell_symbol_abs(int k, double abs_xi) {
  return eta0(std::ldexp(abs_xi, -k)) - eta0(std::ldexp(abs_xi, -(k - 1)));
}

inline double shell_symbol(int k, std::span<const double> xi) {
  double s = 0.0;
  for (double c : xi) s += c * c;
  return shell_symbol_abs(k, std::sqrt(s));
}

// I_k = {|xi| in [2^{k-1}, 2^{k+1}]}
inline bool in_shell_interval(int k, double abs_xi) {
  return abs_xi >= std::ldexp(1.0, k - 1) && abs_xi <= std::ldexp(1.0, k + 1);
}

// I_j for modulations: [-2,2] for j = 0, |mu| in [2^{j-1}, 2^{j+1}] otherwise.
inline bool in_modulation_interval(int j, double mu) {
  const double a = std::abs(mu);
  if (j == 0) return a <= 2.0;
  return a >= std::ldexp(1.0, j - 1) && a <= std::ldexp(1.0, j + 1);
}

struct ShellIndexSet {
  int k_min = 0;
  int k_max = 0;
  int j_max = 0;
};

// ---- lattice cutoffs ------------------------------------------------------

namespace detail {
inline double theta(double x) { return smooth_step(3.0 * x + 0.5); }
}  // namespace detail

// chi^{(1)}: support [-2/3, 2/3], integer translates sum to one.
inline double chi1(double x) { return detail::theta(x + 0.5) * detail::theta(0.5 - x); }

// chi~^{(1)}: equal to 1 on [-3, 3], support [-4, 4].
inline double chi1_wide(double x) { return smooth_step(4.0 - std::abs(x)); }

namespace detail {
inline void check_lattice_point(int k, std::span<const double> n) {
  require(k >= 0, ErrorCode::invalid_argument, "lattice_cutoff: negative scale");
  const double step = std::ldexp(1.0, k);
  for (double c : n) {
    const double q = c / step;
    require(std::abs(q - std::round(q)) < 1e-12, ErrorCode::off_lattice,
            "lattice_cutoff: point is not on the 2^k lattice");
  }
}
}  // namespace detail

inline double lattice_cutoff(int k, std::span<const double> n, std::span<const double> xi) {
  require(n.size() == xi.size(), ErrorCode::invalid_argument, "lattice_cutoff: dimension mismatch");
  detail::check_lattice_point(k, n);
  double v = 1.0;
  for (std::size_t i = 0; i < xi.size(); ++i) v *= chi1(std::ldexp(xi[i] - n[i], -k));
  return v;
}

inline double lattice_cutoff_wide(int k, std::span<const double> n, std::span<const double> xi) {
  require(n.size() == xi.size(), ErrorCode::invalid_argument, "lattice_cutoff_wide: dimension mismatch");
  detail::check_lattice_point(k, n);
  double v = 1.0;
  for (std::size_t i = 0; i < xi.size(); ++i) v *= chi1_wide(std::ldexp(xi[i] - n[i], -k));
  return v;
}

}  // namespace smlab
