#pragma once

// Finite symmetric direction sets built from normalized primitive integer
// vectors, and the transverse-direction selection.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "smlab/error.hpp"
#include "smlab/random.hpp"

namespace smlab {

struct Direction {
  std::vector<int> lattice;  // primitive integer vector
  std::vector<double> unit;  // lattice / |lattice|

  int dim() const { return static_cast<int>(lattice.size()); }
  double lattice_norm() const {
    double s = 0.0;
    for (int c : lattice) s += double(c) * c;
    return std::sqrt(s);
  }
  double dot(const std::vector<double>& w) const {
    double s = 0.0;
    for (std::size_t i = 0; i < unit.size(); ++i) s += unit[i] * w[i];
    return s;
  }
  bool operator==(const Direction& o) const { return lattice == o.lattice; }
};

inline Direction make_direction(std::vector<int> v) {
  require(!v.empty(), ErrorCode::invalid_argument, "make_direction: empty vector");
  int g = 0;
  for (int c : v) g = std::gcd(g, std::abs(c));
  require(g > 0, ErrorCode::invalid_argument, "make_direction: zero vector");
  for (int& c : v) c /= g;
  Direction e;
  e.lattice = std::move(v);
  const double n = e.lattice_norm();
  for (int c : e.lattice) e.unit.push_back(c / n);
  return e;
}

inline Direction axis_direction(int dim, int axis) {
  std::vector<int> v(dim, 0);
  v[axis] = 1;
  return make_direction(v);
}

struct DirectionSet {
  std::vector<Direction> directions;
  double delta = 0.0;            // requested covering radius
  double achieved_radius = 0.0;  // measured on the sphere sample
  int height = 0;                // max |component| of the integer vectors
  bool symmetric = true;
  int dim() const { return directions.empty() ? 0 : directions.front().dim(); }
  std::size_t size() const { return directions.size(); }
};

inline constexpr int sphere_sample_count = 10000;

// Fibonacci lattice on S^2; for other dimensions normalized Gaussians from a
// fixed seed.
inline std::vector<std::vector<double>> sphere_sample(int dim, int count = sphere_sample_count) {
  std::vector<std::vector<double>> pts;
  pts.reserve(count);
  if (dim == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * i;
      pts.push_back({r * std::cos(phi), r * std::sin(phi), z});
    }
    return pts;
  }
  Rng rng(0x5eed5eedULL + dim);
  for (int i = 0; i < count; ++i) {
    std::vector<double> w(dim);
    double s = 0.0;
    for (auto& c : w) {
      c = rng.normal();
      s += c * c;
    }
    s = std::sqrt(s);
    for (auto& c : w) c /= s;
    pts.push_back(std::move(w));
  }
  return pts;
}

inline double covering_radius(const std::vector<Direction>& dirs,
                              const std::vector<std::vector<double>>& sample) {
  double worst = 0.0;
  for (const auto& w : sample) {
    double best = -2.0;
    for (const auto& e : dirs) best = std::max(best, e.dot(w));
    worst = std::max(worst, std::sqrt(std::max(0.0, 2.0 - 2.0 * best)));
  }
  return worst;
}

namespace detail {
inline void primitive_vectors(int dim, int height, std::vector<Direction>& out) {
  std::vector<int> v(dim, -height);
  while (true) {
    int g = 0, mx = 0;
    for (int c : v) {
      g = std::gcd(g, std::abs(c));
      mx = std::max(mx, std::abs(c));
    }
    if (g == 1 && mx == height) out.push_back(make_direction(v));
    int i = 0;
    while (i < dim && v[i] == height) v[i++] = -height;
    if (i == dim) break;
    ++v[i];
  }
}
}  // namespace detail

inline constexpr int default_max_height = 4;

inline DirectionSet build_direction_set(int dim, double delta, int max_height = default_max_height) {
  require(dim >= 3, ErrorCode::invalid_argument, "build_direction_set: d must be at least 3");
  require(delta > 0.0 && delta < 1.0, ErrorCode::invalid_argument, "build_direction_set: delta must lie in (0,1)");
  const auto sample = sphere_sample(dim);
  DirectionSet set;
  set.delta = delta;
  double radius = 2.0;
  for (int h = 1; h <= max_height; ++h) {
    detail::primitive_vectors(dim, h, set.directions);
    radius = covering_radius(set.directions, sample);
    set.height = h;
    if (radius <= delta) {
      set.achieved_radius = radius;
      return set;
    }
  }
  throw Error(ErrorCode::covering_not_achieved,
              "requested radius " + std::to_string(delta) + ", achieved " + std::to_string(radius) +
                  " at height " + std::to_string(max_height));
}

inline double transversality_constant(const DirectionSet& dirs) {
  return std::numbers::sqrt2 / 2.0 - dirs.achieved_radius;
}

struct TransversePick {
  Direction direction;
  int index = -1;
  double dot1 = 0.0;  // e . w1
  double dot2 = 0.0;  // |e . w2|
  double threshold = 0.0;
};

inline TransversePick pick_transverse_direction(const std::vector<double>& w1, const std::vector<double>& w2,
                                                const DirectionSet& dirs) {
  auto unit_check = [](const std::vector<double>& w) {
    double s = 0.0;
    for (double c : w) s += c * c;
    require(std::abs(std::sqrt(s) - 1.0) < 1e-9, ErrorCode::invalid_argument,
            "pick_transverse_direction: inputs must be unit vectors");
  };
  unit_check(w1);
  unit_check(w2);
  TransversePick best;
  best.threshold = transversality_constant(dirs);
  double best_score = -1.0;
  for (std::size_t i = 0; i < dirs.directions.size(); ++i) {
    const auto& e = dirs.directions[i];
    const double a = e.dot(w1);
    const double b = std::abs(e.dot(w2));
    const double score = std::min(a, b);
    if (score > best_score + 1e-15) {
      best_score = score;
      best.direction = e;
      best.index = static_cast<int>(i);
      best.dot1 = a;
      best.dot2 = b;
    }
  }
  if (best.index < 0 || best_score < best.threshold) {
    throw Error(ErrorCode::no_transverse_direction,
                "best achievable dot products (" + std::to_string(best.dot1) + ", " + std::to_string(best.dot2) +
                    ") below " + std::to_string(best.threshold));
  }
  return best;
}

inline void to_json(nlohmann::json& j, const DirectionSet& s) {
  nlohmann::json dirs = nlohmann::json::array();
  for (const auto& e : s.directions) dirs.push_back(e.lattice);
  j = nlohmann::json{{"delta", s.delta},   {"achieved_radius", s.achieved_radius},
                     {"height", s.height}, {"symmetric", s.symmetric},
                     {"directions", dirs}};
}

inline void from_json(const nlohmann::json& j, DirectionSet& s) {
  s.delta = j.at("delta").get<double>();
  s.achieved_radius = j.value("achieved_radius", 0.0);
  s.height = j.value("height", 0);
  s.symmetric = j.value("symmetric", true);
  s.directions.clear();
  for (const auto& v : j.at("directions")) s.directions.push_back(make_direction(v.get<std::vector<int>>()));
}

}  // namespace smlab
