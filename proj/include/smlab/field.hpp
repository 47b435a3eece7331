#pragma once

// Field containers and continuum-normalized Fourier transforms.
//
// F u(xi, tau) = (2 pi)^{-(d+1)/2} dx^d dt sum_{x,t} u(x,t) e^{-i(x.xi + t tau)}
// so that sum |u|^2 dx^d dt = sum |F u|^2 h^d h_tau (Plancherel) and F
// approximates the transform on R^d x R for data living inside the box.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "smlab/error.hpp"
#include "smlab/fft.hpp"
#include "smlab/grid.hpp"

namespace smlab {

using cplx = std::complex<double>;

// `mixed` = Fourier in space, physical in time (solver working layout).
enum class Domain { physical, fourier, mixed };

inline const char* to_string(Domain d) {
  switch (d) {
    case Domain::physical: return "physical";
    case Domain::fourier: return "fourier";
    case Domain::mixed: return "mixed";
  }
  return "?";
}

inline Domain domain_from_string(const std::string& s) {
  if (s == "physical") return Domain::physical;
  if (s == "fourier") return Domain::fourier;
  if (s == "mixed") return Domain::mixed;
  throw Error(ErrorCode::io, "unknown domain flag '" + s + "'");
}

struct SpatialField {
  GridSpec grid;
  Domain domain = Domain::physical;
  std::vector<cplx> data;

  static SpatialField zeros(const GridSpec& g, Domain d = Domain::physical) {
    return SpatialField{g, d, std::vector<cplx>(g.spatial_size())};
  }
  std::size_t size() const { return data.size(); }
};

struct SpaceTimeField {
  GridSpec grid;
  Domain domain = Domain::physical;
  std::vector<cplx> data;

  static SpaceTimeField zeros(const GridSpec& g, Domain d = Domain::physical) {
    return SpaceTimeField{g, d, std::vector<cplx>(g.size())};
  }
  std::size_t size() const { return data.size(); }
  std::size_t spatial_size() const { return grid.spatial_size(); }
  cplx* slice(int t) { return data.data() + static_cast<std::size_t>(t) * grid.spatial_size(); }
  const cplx* slice(int t) const { return data.data() + static_cast<std::size_t>(t) * grid.spatial_size(); }
};

struct SphereField {
  GridSpec grid;
  std::vector<std::array<double, 3>> data;

  static SphereField constant(const GridSpec& g, std::array<double, 3> q) {
    return SphereField{g, std::vector<std::array<double, 3>>(g.spatial_size(), q)};
  }
};

inline void require_domain(Domain have, Domain want, const char* what) {
  if (have != want)
    throw Error(ErrorCode::domain_mismatch,
                std::string(what) + ": expected " + to_string(want) + " domain, got " + to_string(have));
}

// ---- transforms ------------------------------------------------------------

namespace detail {

inline std::vector<int> spatial_dims(const GridSpec& g) { return std::vector<int>(g.dim, g.n); }

inline double space_forward_scale(const GridSpec& g) {
  return std::pow(2.0 * std::numbers::pi, -0.5 * g.dim) * g.cell_volume_x();
}
inline double space_backward_scale(const GridSpec& g) {
  return std::pow(2.0 * std::numbers::pi, -0.5 * g.dim) * g.cell_volume_xi();
}

inline void scale(std::vector<cplx>& v, double c) {
  for (auto& z : v) z *= c;
}

// spatial transform of every time slice
inline void space_pass(std::vector<cplx>& v, const GridSpec& g, int slices, fft::Sign sign) {
  fft::transform_batch(v.data(), spatial_dims(g), slices, sign);
  scale(v, sign == fft::Sign::forward ? space_forward_scale(g) : space_backward_scale(g));
}

// time transform of every spatial point, including the t0 = -T/2 phase
inline void time_pass(std::vector<cplx>& v, const GridSpec& g, fft::Sign sign) {
  const std::size_t S = g.spatial_size();
  const double c = (sign == fft::Sign::forward ? g.dt() : g.tau_step()) / std::sqrt(2.0 * std::numbers::pi);
  if (sign == fft::Sign::backward) {
    for (int m = 1; m < g.nt; m += 2)
      for (std::size_t s = 0; s < S; ++s) v[m * S + s] = -v[m * S + s];
  }
  fft::transform_strided(v.data(), g.nt, static_cast<int>(S), static_cast<int>(S), sign);
  for (int m = 0; m < g.nt; ++m) {
    const double f = (sign == fft::Sign::forward && (m & 1)) ? -c : c;
    for (std::size_t s = 0; s < S; ++s) v[m * S + s] *= f;
  }
}

}  // namespace detail

inline SpatialField fft_space(const SpatialField& f) {
  require_domain(f.domain, Domain::physical, "fft_space");
  SpatialField out = f;
  detail::space_pass(out.data, f.grid, 1, fft::Sign::forward);
  out.domain = Domain::fourier;
  return out;
}

inline SpatialField ifft_space(const SpatialField& f) {
  require_domain(f.domain, Domain::fourier, "ifft_space");
  SpatialField out = f;
  detail::space_pass(out.data, f.grid, 1, fft::Sign::backward);
  out.domain = Domain::physical;
  return out;
}

inline SpatialField to_fourier(const SpatialField& f) { return f.domain == Domain::fourier ? f : fft_space(f); }
inline SpatialField to_physical(const SpatialField& f) { return f.domain == Domain::physical ? f : ifft_space(f); }

// Converts a space-time field to any of the three domains.
inline SpaceTimeField convert(SpaceTimeField u, Domain target) {
  if (u.domain == target) return u;
  const int slices = u.grid.nt;
  const bool space_fourier_now = u.domain != Domain::physical;
  const bool time_fourier_now = u.domain == Domain::fourier;
  const bool space_fourier_want = target != Domain::physical;
  const bool time_fourier_want = target == Domain::fourier;
  if (time_fourier_now && !time_fourier_want) detail::time_pass(u.data, u.grid, fft::Sign::backward);
  if (space_fourier_now != space_fourier_want)
    detail::space_pass(u.data, u.grid, slices, space_fourier_want ? fft::Sign::forward : fft::Sign::backward);
  if (!time_fourier_now && time_fourier_want) detail::time_pass(u.data, u.grid, fft::Sign::forward);
  u.domain = target;
  return u;
}

inline SpaceTimeField fft_spacetime(const SpaceTimeField& u) {
  require_domain(u.domain, Domain::physical, "fft_spacetime");
  return convert(u, Domain::fourier);
}

inline SpaceTimeField ifft_spacetime(const SpaceTimeField& u) {
  require_domain(u.domain, Domain::fourier, "ifft_spacetime");
  return convert(u, Domain::physical);
}

inline SpaceTimeField to_fourier(const SpaceTimeField& u) { return convert(u, Domain::fourier); }
inline SpaceTimeField to_physical(const SpaceTimeField& u) { return convert(u, Domain::physical); }

// ---- measures and norms ----------------------------------------------------

inline double measure(const GridSpec& g, Domain d, bool spacetime) {
  const double space = d == Domain::physical ? g.cell_volume_x() : g.cell_volume_xi();
  if (!spacetime) return space;
  const double time = d == Domain::fourier ? g.tau_step() : g.dt();
  return space * time;
}

inline double sum_sq(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return s;
}

inline double l2_norm(const SpatialField& f) { return std::sqrt(sum_sq(f.data) * measure(f.grid, f.domain, false)); }
inline double l2_norm(const SpaceTimeField& u) { return std::sqrt(sum_sq(u.data) * measure(u.grid, u.domain, true)); }

inline double sup_norm(const std::vector<cplx>& v) {
  double m = 0.0;
  for (const auto& z : v) m = std::max(m, std::abs(z));
  return m;
}

inline double relative_l2_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  require(a.size() == b.size(), ErrorCode::grid_mismatch, "relative_l2_diff: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  if (den == 0.0) return std::sqrt(num);
  return std::sqrt(num / den);
}

// ---- arithmetic ------------------------------------------------------------

template <class F>
F linear_combination(cplx a, const F& x, cplx b, const F& y) {
  require(x.grid == y.grid, ErrorCode::grid_mismatch, "linear_combination: grids differ");
  require_domain(y.domain, x.domain, "linear_combination");
  F out = x;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = a * x.data[i] + b * y.data[i];
  return out;
}

template <class F>
F scaled(const F& x, cplx a) {
  F out = x;
  for (auto& z : out.data) z *= a;
  return out;
}

// ---- modulation ------------------------------------------------------------

// tau of time bin m (signed, in units of the tau lattice)
inline double tau_of_bin(const GridSpec& g, int m) { return signed_index(m, g.nt) * g.tau_step(); }

// modulation tau + |xi|^2 of the Fourier bin (time bin m, spatial index s)
inline double modulation_at(const GridSpec& g, const Lattice& lat, int m, std::size_t s) {
  return tau_of_bin(g, m) + lat.xi2[s];
}

// ---- rescaling ---------------------------------------------------------------

// phi_lambda(x) = phi(2x): identical samples on the grid with doubled
// frequency spacing (half the period).
inline SpatialField dyadic_rescale(const SpatialField& f) {
  SpatialField p = to_physical(f);
  p.grid.freq_step *= 2.0;
  return p;
}

}  // namespace smlab
