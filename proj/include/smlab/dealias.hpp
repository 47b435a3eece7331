#pragma once

// 2/3-rule truncation boxes and spectral derivatives on single slices.

#include <algorithm>
#include <cstdlib>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "smlab/field.hpp"

namespace smlab {

inline int dealias_cut(int n) { return n / 3; }

// spatial bins with |n_i| <= floor(N/3) on every axis
inline const std::vector<unsigned char>& dealias_mask(const GridSpec& g) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, double>, std::vector<unsigned char>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(g.dim, g.n, g.freq_step);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const auto lat = lattice_of(g);
  const int cut = dealias_cut(g.n);
  std::vector<unsigned char> m(lat->size(), 1);
  for (std::size_t s = 0; s < lat->size(); ++s)
    for (int a = 0; a < g.dim; ++a)
      if (std::abs(lat->index_at(s)[a]) > cut) m[s] = 0;
  return cache.emplace(key, std::move(m)).first->second;
}

inline bool time_bin_inside(const GridSpec& g, int m) { return std::abs(signed_index(m, g.nt)) <= dealias_cut(g.nt); }

inline void truncate_slice(cplx* slice, const GridSpec& g) {
  const auto& mask = dealias_mask(g);
  for (std::size_t s = 0; s < mask.size(); ++s)
    if (!mask[s]) slice[s] = {};
}

// zero every mode outside the spatial 2/3 box (and the temporal one for fourier data)
inline SpaceTimeField two_thirds_project(SpaceTimeField u) {
  require(u.domain != Domain::physical, ErrorCode::domain_mismatch, "two_thirds_project: spatial Fourier data needed");
  const std::size_t S = u.grid.spatial_size();
  for (int m = 0; m < u.grid.nt; ++m) {
    if (u.domain == Domain::fourier && !time_bin_inside(u.grid, m))
      std::fill(u.slice(m), u.slice(m) + S, cplx{});
    else
      truncate_slice(u.slice(m), u.grid);
  }
  return u;
}

inline SpatialField two_thirds_project(SpatialField f) {
  f = to_fourier(f);
  truncate_slice(f.data.data(), f.grid);
  return f;
}

// relative L^2 mass outside the 2/3 box
inline double mass_outside_box(const SpaceTimeField& u) {
  const SpaceTimeField f = to_fourier(u);
  const auto& mask = dealias_mask(f.grid);
  const std::size_t S = f.grid.spatial_size();
  double in = 0.0, out = 0.0;
  for (int m = 0; m < f.grid.nt; ++m) {
    const bool tin = time_bin_inside(f.grid, m);
    for (std::size_t s = 0; s < S; ++s) (tin && mask[s] ? in : out) += std::norm(f.data[m * S + s]);
  }
  return in + out == 0.0 ? 0.0 : std::sqrt(out / (in + out));
}

namespace detail {

inline void slice_to_physical(std::vector<cplx>& v, const GridSpec& g) {
  fft::transform(v.data(), spatial_dims(g), fft::Sign::backward);
  scale(v, space_backward_scale(g));
}

inline void slice_to_fourier(std::vector<cplx>& v, const GridSpec& g) {
  fft::transform(v.data(), spatial_dims(g), fft::Sign::forward);
  scale(v, space_forward_scale(g));
}

// physical-space partial derivative along axis a of a Fourier slice
inline std::vector<cplx> slice_derivative(const cplx* fourier, const GridSpec& g, const Lattice& lat, int a) {
  std::vector<cplx> v(g.spatial_size());
  for (std::size_t s = 0; s < v.size(); ++s) v[s] = cplx(0.0, lat.xi_at(s)[a]) * fourier[s];
  slice_to_physical(v, g);
  return v;
}

}  // namespace detail

}  // namespace smlab
