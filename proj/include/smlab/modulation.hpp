#pragma once

// Fourier multipliers in the modulation variable mu = tau + |xi|^2.

#include <cmath>
#include <string>
#include <utility>

#include "smlab/dyadic.hpp"
#include "smlab/field.hpp"

namespace smlab {

enum class ModVariant { exact, le, ge, plus, minus };

inline ModVariant mod_variant_from_string(const std::string& s) {
  if (s == "exact") return ModVariant::exact;
  if (s == "le") return ModVariant::le;
  if (s == "ge") return ModVariant::ge;
  if (s == "plus") return ModVariant::plus;
  if (s == "minus") return ModVariant::minus;
  throw Error(ErrorCode::invalid_argument, "unknown modulation variant '" + s + "'");
}

// eta_j with the top bin j_max standing for eta_{>= j_max}
inline double clamped_eta(int j, int j_max, double mu) {
  return j == j_max ? eta_ge(j_max, mu) : eta_j(j, mu);
}

// Calls emit(j, weight) for every j in [0, j_max] with clamped_eta(j) != 0.
template <class Emit>
void modulation_partition(double mu, int j_max, Emit&& emit) {
  const double a = std::abs(mu);
  if (a <= bump_plateau) {
    emit(0, 1.0);
    return;
  }
  const int jc = a < 1.0 ? 0 : static_cast<int>(std::floor(std::log2(a)));
  const int lo = std::max(0, jc - 1);
  if (lo >= j_max) {
    const double w = eta_ge(j_max, mu);
    if (w > 0.0) emit(j_max, w);
    if (w < 1.0 && j_max > 0) emit(j_max - 1, 1.0 - w);
    return;
  }
  const int hi = std::min(j_max, jc + 2);
  for (int j = lo; j <= hi; ++j) {
    const double w = clamped_eta(j, j_max, mu);
    if (w > 0.0) emit(j, w);
  }
}

inline double variant_symbol(ModVariant v, int j, int j_max, double mu) {
  switch (v) {
    case ModVariant::exact: return clamped_eta(j, j_max, mu);
    case ModVariant::le: return eta_le(j, mu);
    case ModVariant::ge: return eta_ge(j, mu);
    case ModVariant::plus: return mu >= 0.0 ? clamped_eta(j, j_max, mu) : 0.0;
    case ModVariant::minus: return mu < 0.0 ? clamped_eta(j, j_max, mu) : 0.0;
  }
  return 0.0;
}

template <class Symbol>
SpaceTimeField apply_modulation_symbol(const SpaceTimeField& u, Symbol&& symbol) {
  require_domain(u.domain, Domain::fourier, "modulation multiplier");
  SpaceTimeField out = u;
  const auto lat = lattice_of(u.grid);
  const std::size_t S = u.grid.spatial_size();
  for (int m = 0; m < u.grid.nt; ++m) {
    const double tau = tau_of_bin(u.grid, m);
    cplx* row = out.data.data() + m * S;
    for (std::size_t s = 0; s < S; ++s) {
      if (row[s] == cplx{}) continue;
      row[s] *= symbol(tau + lat->xi2[s], s);
    }
  }
  return out;
}

inline SpaceTimeField modulation_multiplier(const SpaceTimeField& u, int j, ModVariant v) {
  const int j_max = u.grid.shells().j_max;
  require(j >= 0, ErrorCode::invalid_argument, "modulation_multiplier: negative j");
  require(j <= j_max, ErrorCode::invalid_argument,
          "modulation_multiplier: j = " + std::to_string(j) + " exceeds j_max = " + std::to_string(j_max));
  return apply_modulation_symbol(u, [&](double mu, std::size_t) { return variant_symbol(v, j, j_max, mu); });
}

enum class ResolventMode { multiply, divide };

// multiplication or division by (tau + |xi|^2 + i)
inline SpaceTimeField resolvent_multiplier(const SpaceTimeField& f, ResolventMode mode) {
  require_domain(f.domain, Domain::fourier, "resolvent_multiplier");
  SpaceTimeField out = f;
  const auto lat = lattice_of(f.grid);
  const std::size_t S = f.grid.spatial_size();
  for (int m = 0; m < f.grid.nt; ++m) {
    const double tau = tau_of_bin(f.grid, m);
    cplx* row = out.data.data() + m * S;
    for (std::size_t s = 0; s < S; ++s) {
      const cplx r{tau + lat->xi2[s], 1.0};
      row[s] = mode == ResolventMode::multiply ? row[s] * r : row[s] / r;
    }
  }
  return out;
}

// multiplication by a function of xi only
template <class Symbol>
SpaceTimeField apply_frequency_symbol(const SpaceTimeField& u, Symbol&& symbol) {
  require(u.domain != Domain::physical, ErrorCode::domain_mismatch, "frequency symbol needs spatial Fourier data");
  SpaceTimeField out = u;
  const auto lat = lattice_of(u.grid);
  const std::size_t S = u.grid.spatial_size();
  std::vector<double> w(S);
  for (std::size_t s = 0; s < S; ++s) w[s] = symbol(lat->xi_at(s), lat->absxi[s]);
  for (int m = 0; m < u.grid.nt; ++m) {
    cplx* row = out.data.data() + m * S;
    for (std::size_t s = 0; s < S; ++s) row[s] *= w[s];
  }
  return out;
}

inline SpaceTimeField shell_restrict(const SpaceTimeField& u, int k) {
  return apply_frequency_symbol(u, [k](const double*, double a) { return shell_symbol_abs(k, a); });
}

}  // namespace smlab
