#pragma once

// Stereographic gauge between S^2-valued maps near Q = (0,0,1) and small
// complex fields, the derivative NLS nonlinearity, the Schroedinger map
// residual and the null-form identity.

#include <array>
#include <cmath>
#include <vector>

#include "smlab/dealias.hpp"
#include "smlab/field.hpp"

namespace smlab {

inline constexpr double default_pole_margin = 0.5;

inline SpatialField stereo_project(const SphereField& f, double margin = default_pole_margin) {
  SpatialField g = SpatialField::zeros(f.grid);
  for (std::size_t s = 0; s < f.data.size(); ++s) {
    const auto& p = f.data[s];
    if (!(p[2] > -1.0 + margin))
      throw Error(ErrorCode::pole_margin, "stereo_project: f_3 = " + std::to_string(p[2]) + " within the pole margin");
    g.data[s] = cplx(p[0], p[1]) / (1.0 + p[2]);
  }
  return g;
}

inline std::array<double, 3> stereo_lift_point(cplx g) {
  const double r2 = std::norm(g);
  const double den = 1.0 + r2;
  return {2.0 * g.real() / den, 2.0 * g.imag() / den, (1.0 - r2) / den};
}

inline SphereField stereo_lift(const SpatialField& g) {
  const SpatialField p = to_physical(g);
  SphereField f{p.grid, std::vector<std::array<double, 3>>(p.data.size())};
  for (std::size_t s = 0; s < p.data.size(); ++s) f.data[s] = stereo_lift_point(p.data[s]);
  return f;
}

struct GaugePair {
  SphereField s;
  SpatialField u;
  double consistency = 0.0;  // sup |lift(u) - s|
};

inline double sphere_sup_diff(const SphereField& a, const SphereField& b) {
  require(a.grid.same_space(b.grid), ErrorCode::grid_mismatch, "sphere_sup_diff: grids differ");
  double m = 0.0;
  for (std::size_t s = 0; s < a.data.size(); ++s)
    for (int l = 0; l < 3; ++l) m = std::max(m, std::abs(a.data[s][l] - b.data[s][l]));
  return m;
}

inline GaugePair make_gauge_pair(const SphereField& s, double margin = default_pole_margin) {
  GaugePair p{s, stereo_project(s, margin), 0.0};
  p.consistency = sphere_sup_diff(stereo_lift(p.u), s);
  return p;
}

inline double max_unit_defect(const SphereField& f) {
  double m = 0.0;
  for (const auto& p : f.data) m = std::max(m, std::abs(std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) - 1.0));
  return m;
}

// ---- nonlinearity -------------------------------------------------------------

// N(u) = 2 conj(u) (1 + |u|^2)^{-1} sum_j (d_j u)^2 on one spatial-Fourier slice.
// Input and output are spatial Fourier coefficients; both are 2/3-truncated.
inline void nonlinearity_slice(const cplx* in, const GridSpec& g, cplx* out) {
  const auto lat = lattice_of(g);
  const std::size_t S = g.spatial_size();
  std::vector<cplx> uhat(in, in + S);
  truncate_slice(uhat.data(), g);
  std::vector<cplx> u = uhat;
  detail::slice_to_physical(u, g);
  std::vector<cplx> grad2(S, cplx{});
  for (int a = 0; a < g.dim; ++a) {
    const auto d = detail::slice_derivative(uhat.data(), g, *lat, a);
    for (std::size_t s = 0; s < S; ++s) grad2[s] += d[s] * d[s];
  }
  for (std::size_t s = 0; s < S; ++s) {
    const double a = std::abs(u[s]);
    if (!(a < 1.0)) throw Error(ErrorCode::range_violation, "nonlinearity: |u| reached " + std::to_string(a));
    grad2[s] *= 2.0 * std::conj(u[s]) / (1.0 + a * a);
  }
  detail::slice_to_fourier(grad2, g);
  truncate_slice(grad2.data(), g);
  std::copy(grad2.begin(), grad2.end(), out);
}

inline SpatialField nonlinearity(const SpatialField& u) {
  SpatialField f = to_fourier(u);
  SpatialField out = SpatialField::zeros(f.grid, Domain::fourier);
  nonlinearity_slice(f.data.data(), f.grid, out.data.data());
  return u.domain == Domain::physical ? to_physical(out) : out;
}

inline SpaceTimeField nonlinearity(const SpaceTimeField& u) {
  const SpaceTimeField m = convert(u, Domain::mixed);
  SpaceTimeField out = SpaceTimeField::zeros(m.grid, Domain::mixed);
  for (int t = 0; t < m.grid.nt; ++t) nonlinearity_slice(m.slice(t), m.grid, out.slice(t));
  return convert(std::move(out), u.domain);
}

// ---- Schroedinger map residual --------------------------------------------------

struct MapResidual {
  double l2 = 0.0;         // grid L^2 of d_t s - s x Lap s over interior times
  double reference = 0.0;  // grid L^2 of d_t s over the same times
  int interior = 0;
};

// 4th-order central differences in time, spectral Laplacian in space.
inline MapResidual schrodinger_map_residual(const std::vector<SphereField>& seq, double dt) {
  require(seq.size() >= 5, ErrorCode::invalid_argument, "schrodinger_map_residual: need at least 5 samples");
  require(dt > 0.0, ErrorCode::invalid_argument, "schrodinger_map_residual: dt must be positive");
  const GridSpec& g = seq.front().grid;
  for (const auto& f : seq) {
    require(f.grid.same_space(g), ErrorCode::grid_mismatch, "schrodinger_map_residual: grids differ");
    require(max_unit_defect(f) <= 1e-6, ErrorCode::non_unit, "schrodinger_map_residual: sample off the sphere");
  }
  const auto lat = lattice_of(g);
  const std::size_t S = g.spatial_size();
  MapResidual r;
  double acc = 0.0, ref = 0.0;
  std::vector<cplx> comp(S);
  std::array<std::vector<double>, 3> lap;
  for (std::size_t n = 2; n + 2 < seq.size(); ++n) {
    const auto& s = seq[n].data;
    for (int l = 0; l < 3; ++l) {
      for (std::size_t i = 0; i < S; ++i) comp[i] = s[i][l];
      detail::slice_to_fourier(comp, g);
      for (std::size_t i = 0; i < S; ++i) comp[i] *= -lat->xi2[i];
      detail::slice_to_physical(comp, g);
      lap[l].resize(S);
      for (std::size_t i = 0; i < S; ++i) lap[l][i] = comp[i].real();
    }
    for (std::size_t i = 0; i < S; ++i) {
      std::array<double, 3> dts;
      for (int l = 0; l < 3; ++l)
        dts[l] = (-seq[n + 2].data[i][l] + 8.0 * seq[n + 1].data[i][l] - 8.0 * seq[n - 1].data[i][l] +
                  seq[n - 2].data[i][l]) /
                 (12.0 * dt);
      const auto& p = s[i];
      const std::array<double, 3> cross{p[1] * lap[2][i] - p[2] * lap[1][i], p[2] * lap[0][i] - p[0] * lap[2][i],
                                        p[0] * lap[1][i] - p[1] * lap[0][i]};
      for (int l = 0; l < 3; ++l) {
        acc += (dts[l] - cross[l]) * (dts[l] - cross[l]);
        ref += dts[l] * dts[l];
      }
    }
    ++r.interior;
  }
  const double w = g.cell_volume_x() * dt;
  r.l2 = std::sqrt(acc * w);
  r.reference = std::sqrt(ref * w);
  return r;
}

// ---- null form ---------------------------------------------------------------------

// Relative L^2 residual of 2 grad v . grad w = H(vw) - w Hv - v Hw,
// H = i d_t + Lap, evaluated spectrally and compared inside the 2/3 box.
inline double null_form_residual(const SpaceTimeField& v, const SpaceTimeField& w) {
  require_same_grid(v.grid, w.grid, "null_form_residual");
  const GridSpec& g = v.grid;
  const SpaceTimeField V = to_fourier(v);
  const SpaceTimeField W = to_fourier(w);
  require(mass_outside_box(V) <= 1e-12 && mass_outside_box(W) <= 1e-12, ErrorCode::aliasing,
          "null_form_residual: inputs exceed the 2/3 band");
  const auto lat = lattice_of(g);
  const std::size_t S = g.spatial_size();

  auto physical_of = [&](const SpaceTimeField& F, auto&& symbol) {
    SpaceTimeField x = F;
    for (int m = 0; m < g.nt; ++m) {
      const double tau = tau_of_bin(g, m);
      for (std::size_t s = 0; s < S; ++s) x.data[m * S + s] *= symbol(tau, s);
    }
    return to_physical(x);
  };
  auto H = [&](double tau, std::size_t s) { return cplx(-(tau + lat->xi2[s]), 0.0); };

  const SpaceTimeField vp = to_physical(V);
  const SpaceTimeField wp = to_physical(W);
  const SpaceTimeField Hv = physical_of(V, H);
  const SpaceTimeField Hw = physical_of(W, H);

  SpaceTimeField lhs = SpaceTimeField::zeros(g);
  for (int a = 0; a < g.dim; ++a) {
    auto D = [&](double, std::size_t s) { return cplx(0.0, lat->xi_at(s)[a]); };
    const SpaceTimeField dv = physical_of(V, D);
    const SpaceTimeField dw = physical_of(W, D);
    for (std::size_t i = 0; i < lhs.data.size(); ++i) lhs.data[i] += 2.0 * dv.data[i] * dw.data[i];
  }
  SpaceTimeField prod = SpaceTimeField::zeros(g);
  SpaceTimeField cross = SpaceTimeField::zeros(g);
  for (std::size_t i = 0; i < prod.data.size(); ++i) {
    prod.data[i] = vp.data[i] * wp.data[i];
    cross.data[i] = wp.data[i] * Hv.data[i] + vp.data[i] * Hw.data[i];
  }
  const SpaceTimeField L = two_thirds_project(to_fourier(lhs));
  SpaceTimeField R = two_thirds_project(to_fourier(prod));
  const SpaceTimeField C = two_thirds_project(to_fourier(cross));
  for (int m = 0; m < g.nt; ++m) {
    const double tau = tau_of_bin(g, m);
    for (std::size_t s = 0; s < S; ++s) {
      const std::size_t i = m * S + s;
      R.data[i] = H(tau, s) * R.data[i] - C.data[i];
    }
  }
  const double den = std::sqrt(sum_sq(L.data));
  if (den == 0.0) return std::sqrt(sum_sq(R.data));
  return relative_l2_diff(R.data, L.data);
}

}  // namespace smlab
