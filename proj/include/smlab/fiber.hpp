#pragma once

// Exact partition of the spatial lattice into fibers along a rational
// direction e = v/|v|: the point with grid index i lies on fiber (i.v) mod N.
// Each fiber is one wrapped family of hyperplanes {x.e = r} on the torus;
// consecutive fibers are dr = dx/|v| apart.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "smlab/directions.hpp"
#include "smlab/field.hpp"

namespace smlab {

inline std::vector<int> fiber_index(const GridSpec& g, const Direction& e) {
  require(e.dim() == g.dim, ErrorCode::off_lattice, "fiber: direction dimension differs from grid");
  int gcd_all = 0;
  for (int c : e.lattice) gcd_all = std::gcd(gcd_all, std::abs(c));
  require(gcd_all == 1, ErrorCode::off_lattice, "fiber: direction is not a primitive lattice vector");
  bool odd = false;
  for (int c : e.lattice) odd = odd || (c % 2 != 0);
  require(odd, ErrorCode::off_lattice, "fiber: direction does not generate Z_N");
  const std::size_t S = g.spatial_size();
  std::vector<int> idx(S);
  for (std::size_t s = 0; s < S; ++s) {
    std::size_t rem = s;
    long long acc = 0;
    for (int a = g.dim - 1; a >= 0; --a) {
      acc += static_cast<long long>(rem % g.n) * e.lattice[a];
      rem /= g.n;
    }
    idx[s] = static_cast<int>(((acc % g.n) + g.n) % g.n);
  }
  return idx;
}

inline double fiber_spacing(const GridSpec& g, const Direction& e) { return g.dx() / e.lattice_norm(); }

struct FiberFamily {
  Direction direction;
  double spacing = 0.0;       // dr
  double inner_weight = 0.0;  // measure of one sample on P_e x R
  std::vector<std::vector<cplx>> fibers;  // fiber r: samples ordered by (x, t)
};

inline FiberFamily fiber_slice(const SpaceTimeField& u, const Direction& e) {
  require_domain(u.domain, Domain::physical, "fiber_slice");
  const auto idx = fiber_index(u.grid, e);
  FiberFamily fam;
  fam.direction = e;
  fam.spacing = fiber_spacing(u.grid, e);
  fam.inner_weight = u.grid.cell_volume_x() * u.grid.dt() / fam.spacing;
  fam.fibers.resize(u.grid.n);
  const std::size_t S = u.grid.spatial_size();
  for (std::size_t s = 0; s < S; ++s)
    for (int t = 0; t < u.grid.nt; ++t) fam.fibers[idx[s]].push_back(u.data[t * S + s]);
  return fam;
}

enum class Exponent { one, two, inf };

inline Exponent exponent_from_string(const std::string& s) {
  if (s == "1") return Exponent::one;
  if (s == "2") return Exponent::two;
  if (s == "inf" || s == "infinity") return Exponent::inf;
  throw Error(ErrorCode::invalid_argument, "exponent must be 1, 2 or inf");
}

namespace detail {

// outer l^p over fibers of per-fiber inner values (already l^q, not powered)
inline double outer_norm(const std::vector<double>& inner, double dr, Exponent p) {
  double acc = 0.0;
  switch (p) {
    case Exponent::one:
      for (double v : inner) acc += v;
      return acc * dr;
    case Exponent::two:
      for (double v : inner) acc += v * v;
      return std::sqrt(acc * dr);
    case Exponent::inf:
      for (double v : inner) acc = std::max(acc, v);
      return acc;
  }
  return 0.0;
}

}  // namespace detail

// Per-fiber inner L^2 over (P_e x time), computed from spatial-Fourier /
// temporal-Fourier data by Parseval in time. Accepts fourier or physical.
inline std::vector<double> fiber_l2(const SpaceTimeField& u, const Direction& e) {
  const auto idx = fiber_index(u.grid, e);
  const double dr = fiber_spacing(u.grid, e);
  const std::size_t S = u.grid.spatial_size();
  std::vector<double> acc(u.grid.n, 0.0);
  double w = 0.0;
  if (u.domain == Domain::physical) {
    for (int t = 0; t < u.grid.nt; ++t)
      for (std::size_t s = 0; s < S; ++s) acc[idx[s]] += std::norm(u.data[t * S + s]);
    w = u.grid.cell_volume_x() * u.grid.dt() / dr;
  } else {
    // physical in space, Fourier in time: only nonzero tau slices are transformed
    const SpaceTimeField f = convert(u, Domain::fourier);
    std::vector<cplx> slice(S);
    const auto dims = detail::spatial_dims(u.grid);
    const double c = detail::space_backward_scale(u.grid);
    for (int m = 0; m < u.grid.nt; ++m) {
      const cplx* row = f.data.data() + m * S;
      bool any = false;
      for (std::size_t s = 0; s < S && !any; ++s) any = row[s] != cplx{};
      if (!any) continue;
      std::copy(row, row + S, slice.begin());
      fft::transform(slice.data(), dims, fft::Sign::backward);
      for (std::size_t s = 0; s < S; ++s) acc[idx[s]] += std::norm(slice[s]) * c * c;
    }
    w = u.grid.cell_volume_x() * u.grid.tau_step() / dr;
  }
  for (auto& v : acc) v = std::sqrt(v * w);
  return acc;
}

inline std::vector<double> fiber_sup(const SpaceTimeField& u, const Direction& e) {
  const SpaceTimeField p = convert(u, Domain::physical);
  const auto idx = fiber_index(u.grid, e);
  const std::size_t S = u.grid.spatial_size();
  std::vector<double> acc(u.grid.n, 0.0);
  for (int t = 0; t < u.grid.nt; ++t)
    for (std::size_t s = 0; s < S; ++s) acc[idx[s]] = std::max(acc[idx[s]], std::abs(p.data[t * S + s]));
  return acc;
}

// L^{p,q}_e: outer L^p in r = x.e, inner L^q over P_e x R.
inline double mixed_norm(const SpaceTimeField& u, const Direction& e, Exponent p, Exponent q) {
  require(q != Exponent::one, ErrorCode::invalid_argument, "mixed_norm: inner exponent must be 2 or inf");
  const double dr = fiber_spacing(u.grid, e);
  const auto inner = q == Exponent::two ? fiber_l2(u, e) : fiber_sup(u, e);
  return detail::outer_norm(inner, dr, p);
}

}  // namespace smlab
