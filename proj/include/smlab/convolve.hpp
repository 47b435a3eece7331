#pragma once

// Continuum-normalized space-time convolution of Fourier-domain fields:
// (f * g)(zeta) = int f(eta) g(zeta - eta) d eta, computed as a pointwise
// product in physical space on a grid padded so that no alias folds back.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "smlab/field.hpp"

namespace smlab {

// largest |signed index| of a nonzero coefficient, per spatial axis (max over
// axes) and in time
struct SupportExtent {
  int space = 0;
  int time = 0;
  bool empty = true;
};

inline SupportExtent support_extent(const SpaceTimeField& f) {
  require_domain(f.domain, Domain::fourier, "support_extent");
  const auto lat = lattice_of(f.grid);
  const std::size_t S = f.grid.spatial_size();
  SupportExtent e;
  std::vector<int> sx(S, 0);
  for (std::size_t s = 0; s < S; ++s)
    for (int a = 0; a < f.grid.dim; ++a) sx[s] = std::max(sx[s], std::abs(lat->index_at(s)[a]));
  for (int m = 0; m < f.grid.nt; ++m) {
    const int tm = std::abs(signed_index(m, f.grid.nt));
    for (std::size_t s = 0; s < S; ++s) {
      if (f.data[m * S + s] == cplx{}) continue;
      e.empty = false;
      e.space = std::max(e.space, sx[s]);
      e.time = std::max(e.time, tm);
    }
  }
  return e;
}

// Copies coefficients onto a grid with the same steps and more (or fewer)
// samples; modes that do not fit must be zero.
inline SpaceTimeField regrid(const SpaceTimeField& f, const GridSpec& target) {
  require_domain(f.domain, Domain::fourier, "regrid");
  require(target.dim == f.grid.dim && target.freq_step == f.grid.freq_step && target.t_window == f.grid.t_window,
          ErrorCode::grid_mismatch, "regrid: steps differ");
  if (target == f.grid) return f;
  const auto src = lattice_of(f.grid);
  const std::size_t S = f.grid.spatial_size();
  const std::size_t St = target.spatial_size();
  SpaceTimeField out = SpaceTimeField::zeros(target, Domain::fourier);
  std::vector<long> map(S, -1);
  for (std::size_t s = 0; s < S; ++s) {
    const int* idx = src->index_at(s);
    long flat = 0;
    bool fits = true;
    for (int a = 0; a < f.grid.dim; ++a) {
      if (idx[a] < -target.n / 2 || idx[a] >= target.n / 2) fits = false;
      flat = flat * target.n + bin_of(idx[a], target.n);
    }
    if (fits) map[s] = flat;
  }
  for (int m = 0; m < f.grid.nt; ++m) {
    const int ms = signed_index(m, f.grid.nt);
    const bool tfits = ms >= -target.nt / 2 && ms < target.nt / 2;
    const std::size_t mt = bin_of(ms, target.nt);
    for (std::size_t s = 0; s < S; ++s) {
      const cplx v = f.data[m * S + s];
      if (v == cplx{}) continue;
      require(tfits && map[s] >= 0, ErrorCode::aliasing, "regrid: coefficient outside the target grid");
      out.data[mt * St + map[s]] = v;
    }
  }
  return out;
}

inline int padded_size(int current, int extent, int cap) {
  int n = current;
  while (extent > n / 2 - 1) n *= 2;
  require(n <= cap, ErrorCode::aliasing,
          "convolution needs " + std::to_string(n) + " samples per axis (cap " + std::to_string(cap) + ")");
  return n;
}

struct ConvolveLimits {
  int max_n = 64;
  int max_nt = 512;
};

// Output grid that holds every product frequency of the given fields.
inline GridSpec product_grid(const std::vector<const SpaceTimeField*>& fs, const ConvolveLimits& lim = {}) {
  GridSpec g = fs.front()->grid;
  int sx = 0, st = 0;
  for (auto* f : fs) {
    require_same_grid(f->grid, g, "convolve");
    const auto e = support_extent(*f);
    sx += e.space;
    st += e.time;
  }
  g.n = padded_size(g.n, sx, lim.max_n);
  g.nt = padded_size(g.nt, st, lim.max_nt);
  return g;
}

// f_1 * f_2 * ... * f_m, returned on the padded product grid.
inline SpaceTimeField convolve_all(const std::vector<const SpaceTimeField*>& fs, const ConvolveLimits& lim = {}) {
  require(!fs.empty(), ErrorCode::invalid_argument, "convolve: no inputs");
  for (auto* f : fs) require_domain(f->domain, Domain::fourier, "convolve");
  const GridSpec g = product_grid(fs, lim);
  SpaceTimeField acc = to_physical(regrid(*fs.front(), g));
  const double c = std::pow(2.0 * std::numbers::pi, 0.5 * (g.dim + 1));
  for (std::size_t i = 1; i < fs.size(); ++i) {
    const SpaceTimeField p = to_physical(regrid(*fs[i], g));
    for (std::size_t k = 0; k < acc.data.size(); ++k) acc.data[k] *= c * p.data[k];
  }
  return to_fourier(acc);
}

inline SpaceTimeField convolve(const SpaceTimeField& f, const SpaceTimeField& g, const ConvolveLimits& lim = {}) {
  return convolve_all({&f, &g}, lim);
}

// f~(xi, tau) = conj f(-xi, -tau), the transform of the conjugate function
inline SpaceTimeField conj_reflect(const SpaceTimeField& f) {
  require_domain(f.domain, Domain::fourier, "conj_reflect");
  const auto lat = lattice_of(f.grid);
  const std::size_t S = f.grid.spatial_size();
  std::vector<std::size_t> neg(S);
  for (std::size_t s = 0; s < S; ++s) {
    const int* idx = lat->index_at(s);
    std::size_t flat = 0;
    for (int a = 0; a < f.grid.dim; ++a) flat = flat * f.grid.n + bin_of(-idx[a], f.grid.n);
    neg[s] = flat;
  }
  SpaceTimeField out = SpaceTimeField::zeros(f.grid, Domain::fourier);
  for (int m = 0; m < f.grid.nt; ++m) {
    const std::size_t mn = bin_of(-signed_index(m, f.grid.nt), f.grid.nt);
    for (std::size_t s = 0; s < S; ++s) out.data[mn * S + neg[s]] = std::conj(f.data[m * S + s]);
  }
  return out;
}

}  // namespace smlab
