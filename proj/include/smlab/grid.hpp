#pragma once

// Periodic space-time grids and their frequency lattices.
//
// Space: [0, L)^d with L = 2*pi/h, N points per axis, frequency spacing h.
// Time: [-T/2, T/2) with N_t samples, frequency spacing 2*pi/T.
// Sample arrays are laid out time-major: index = t * N^d + s, with the
// spatial index s row-major over (x_0, ..., x_{d-1}).

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "smlab/dyadic.hpp"
#include "smlab/error.hpp"

namespace smlab {

inline bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

// signed frequency index of FFT bin i on an axis of length n
inline int signed_index(int i, int n) { return i < n / 2 ? i : i - n; }
inline int bin_of(int m, int n) { return ((m % n) + n) % n; }

// largest integer k with 2^k <= x (x > 0)
inline int floor_log2(double x) {
  int k = static_cast<int>(std::floor(std::log2(x)));
  while (std::ldexp(1.0, k + 1) <= x) ++k;
  while (std::ldexp(1.0, k) > x) --k;
  return k;
}

struct GridSpec {
  int dim = 3;
  int n = 16;
  double freq_step = 1.0;
  int nt = 64;
  double t_window = 8.0;

  double period() const { return 2.0 * std::numbers::pi / freq_step; }
  double dx() const { return period() / n; }
  double dt() const { return t_window / nt; }
  double tau_step() const { return 2.0 * std::numbers::pi / t_window; }
  double t0() const { return -0.5 * t_window; }
  double time_at(int p) const { return t0() + p * dt(); }

  std::size_t spatial_size() const {
    std::size_t s = 1;
    for (int i = 0; i < dim; ++i) s *= static_cast<std::size_t>(n);
    return s;
  }
  std::size_t size() const { return spatial_size() * static_cast<std::size_t>(nt); }

  double spatial_nyquist() const { return 0.5 * freq_step * n; }
  double tau_nyquist() const { return 0.5 * tau_step() * nt; }
  // largest |tau + |xi|^2| reached along the axes of the lattice
  double modulation_nyquist() const { return tau_nyquist() + spatial_nyquist() * spatial_nyquist(); }

  double cell_volume_x() const { return std::pow(dx(), dim); }
  double cell_volume_xi() const { return std::pow(freq_step, dim); }

  ShellIndexSet shells() const {
    ShellIndexSet s;
    // smallest k whose shell support (|xi| < 1.6 * 2^k) reaches |xi| = h
    s.k_min = floor_log2(freq_step / bump_support) + 1;
    s.k_max = floor_log2(spatial_nyquist()) - 1;
    s.j_max = std::max(0, floor_log2(modulation_nyquist()) - 1);
    return s;
  }

  void validate() const {
    require(dim >= 1, ErrorCode::config, "grid: dim must be positive");
    require(is_power_of_two(n), ErrorCode::config, "grid: n must be a power of two");
    require(is_power_of_two(nt), ErrorCode::config, "grid: nt must be a power of two");
    require(n >= 2 && nt >= 2, ErrorCode::config, "grid: need at least two points per axis");
    require(freq_step > 0.0 && t_window > 0.0, ErrorCode::config, "grid: steps must be positive");
  }

  GridSpec with_nt(int new_nt) const {
    GridSpec g = *this;
    g.nt = new_nt;
    return g;
  }
  GridSpec with_n(int new_n) const {
    GridSpec g = *this;
    g.n = new_n;
    return g;
  }

  bool operator==(const GridSpec& o) const {
    return dim == o.dim && n == o.n && nt == o.nt && freq_step == o.freq_step && t_window == o.t_window;
  }
  bool same_space(const GridSpec& o) const { return dim == o.dim && n == o.n && freq_step == o.freq_step; }
};

inline void to_json(nlohmann::json& j, const GridSpec& g) {
  j = nlohmann::json{{"dim", g.dim}, {"n", g.n}, {"freq_step", g.freq_step}, {"nt", g.nt}, {"t_window", g.t_window}};
}
inline void from_json(const nlohmann::json& j, GridSpec& g) {
  g.dim = j.at("dim").get<int>();
  g.n = j.at("n").get<int>();
  g.freq_step = j.at("freq_step").get<double>();
  g.nt = j.value("nt", 1);
  g.t_window = j.value("t_window", 8.0);
}

inline void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  require(a == b, ErrorCode::grid_mismatch, std::string(what) + ": grids differ");
}

// Frequency coordinates of the spatial lattice, cached per (dim, n, h).
struct Lattice {
  int dim = 0;
  int n = 0;
  double h = 0.0;
  std::vector<int> index;    // signed index, size * dim
  std::vector<double> xi;    // frequency, size * dim
  std::vector<double> xi2;   // |xi|^2
  std::vector<double> absxi; // |xi|
  std::size_t size() const { return xi2.size(); }
  const double* xi_at(std::size_t s) const { return xi.data() + s * dim; }
  const int* index_at(std::size_t s) const { return index.data() + s * dim; }
};

inline std::shared_ptr<const Lattice> lattice_of(const GridSpec& g) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, double>, std::shared_ptr<const Lattice>> cache;
  const auto key = std::make_tuple(g.dim, g.n, g.freq_step);
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  auto lat = std::make_shared<Lattice>();
  lat->dim = g.dim;
  lat->n = g.n;
  lat->h = g.freq_step;
  const std::size_t S = g.spatial_size();
  lat->index.resize(S * g.dim);
  lat->xi.resize(S * g.dim);
  lat->xi2.resize(S);
  lat->absxi.resize(S);
  for (std::size_t s = 0; s < S; ++s) {
    std::size_t rem = s;
    double r2 = 0.0;
    for (int a = g.dim - 1; a >= 0; --a) {
      const int i = static_cast<int>(rem % g.n);
      rem /= g.n;
      const int m = signed_index(i, g.n);
      lat->index[s * g.dim + a] = m;
      lat->xi[s * g.dim + a] = m * g.freq_step;
      r2 += double(m) * m;
    }
    lat->xi2[s] = r2 * g.freq_step * g.freq_step;
    lat->absxi[s] = std::sqrt(lat->xi2[s]);
  }
  cache.emplace(key, lat);
  return lat;
}

// flat spatial index from signed per-axis indices
inline std::size_t spatial_offset(const int* m, int dim, int n) {
  std::size_t s = 0;
  for (int a = 0; a < dim; ++a) s = s * n + static_cast<std::size_t>(bin_of(m[a], n));
  return s;
}

}  // namespace smlab
