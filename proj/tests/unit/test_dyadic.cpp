#include <array>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "smlab/directions.hpp"
#include "smlab/dyadic.hpp"
#include "smlab/random.hpp"

using namespace smlab;

namespace {

// independent evaluation of the bump from its defining formula
double oracle_step(double x) {
  auto g = [](double y) { return y > 0.0 ? std::exp(-1.0 / y) : 0.0; };
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return g(x) / (g(x) + g(1.0 - x));
}
double oracle_eta0(double mu) { return oracle_step((1.6 - std::abs(mu)) / 0.35); }

}  // namespace

TEST(Bump, PlateauAndSupport) {
  EXPECT_EQ(eta0(0.0), 1.0);
  EXPECT_EQ(eta0(1.25), 1.0);
  EXPECT_EQ(eta0(2.0), 0.0);
  EXPECT_EQ(eta0(1.6), 0.0);
}

TEST(Bump, TransitionMatchesOracle) {
  // frozen from the formula evaluated in double precision
  EXPECT_NEAR(eta0(1.45), 0.3581659549112698, 1e-15);
  EXPECT_NEAR(eta0(1.3), 0.9970802502076078, 1e-15);
  EXPECT_NEAR(eta0(1.5), 0.10909682119561329, 1e-15);
  for (double mu = -2.0; mu <= 2.0; mu += 0.01) EXPECT_NEAR(eta0(mu), oracle_eta0(mu), 1e-15);
}

TEST(Bump, EvenBoundedMonotone) {
  double prev = 1.0;
  for (double mu = 1.25; mu <= 1.6; mu += 1e-3) {
    const double v = eta0(mu);
    EXPECT_EQ(v, eta0(-mu));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_LE(v, prev + 1e-15);
    prev = v;
  }
}

TEST(EtaJ, Examples) {
  EXPECT_EQ(eta_j(1, 0.0), 0.0);
  EXPECT_EQ(eta_j(3, 8.0), 1.0);
  EXPECT_NEAR(eta_j(2, 3.0), 0.8909031788043867, 1e-15);
  EXPECT_THROW(eta_j(-1, 0.0), Error);
}

TEST(EtaJ, SupportInterval) {
  for (int j = 1; j <= 6; ++j)
    for (double mu = 0.0; mu < 300.0; mu += 0.37) {
      const double v = eta_j(j, mu);
      if (mu < std::ldexp(1.25, j - 1) || mu > std::ldexp(1.6, j)) {
        EXPECT_EQ(v, 0.0) << j << " " << mu;
      }
    }
}

TEST(EtaJ, TelescopingProperty) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const double mu = rng.uniform(-80.0, 80.0);
    for (int J = 0; J <= 6; ++J) {
      double s = 0.0;
      for (int j = 0; j <= J; ++j) s += eta_j(j, mu);
      EXPECT_NEAR(s, eta0(std::ldexp(mu, -J)), 1e-12);
    }
  }
}

TEST(EtaJ, SignedAndRangeCombinators) {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const double mu = rng.uniform(-100.0, 100.0);
    for (int j = 0; j <= 6; ++j) EXPECT_DOUBLE_EQ(eta_plus(j, mu) + eta_minus(j, mu), eta_j(j, mu));
    for (int j1 = -2; j1 <= 3; ++j1)
      for (int j2 = j1; j2 <= 6; ++j2) {
        double s = 0.0;
        for (int j = std::max(j1, 0); j <= j2; ++j) s += eta_j(j, mu);
        EXPECT_NEAR(eta_range(j1, j2, mu), s, 1e-12);
        EXPECT_NEAR(eta_range_plus(j1, j2, mu) + eta_range_minus(j1, j2, mu), eta_range(j1, j2, mu), 1e-15);
      }
    EXPECT_EQ(eta_le(-1, mu), 0.0);
  }
}

TEST(Shell, Examples) {
  const std::array<double, 3> e1{1.0, 0.0, 0.0};
  EXPECT_EQ(shell_symbol(0, e1), 1.0);
  EXPECT_EQ(shell_symbol(5, e1), 0.0);
}

TEST(Shell, PartitionOfUnityProperty) {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    std::array<double, 3> xi{rng.normal(), rng.normal(), rng.normal()};
    const double r = std::exp2(rng.uniform(-3.0, 5.0));
    const double n = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
    for (auto& c : xi) c *= r / n;
    double s = 0.0;
    for (int k = -8; k <= 10; ++k) s += shell_symbol(k, xi);
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(LatticeCutoff, PartitionAtEveryScale) {
  Rng rng(14);
  for (int k = 0; k <= 3; ++k) {
    const double step = std::ldexp(1.0, k);
    for (int trial = 0; trial < 100; ++trial) {
      const std::array<double, 3> xi{rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-20, 20)};
      double s = 0.0;
      std::array<double, 3> base;
      for (int a = 0; a < 3; ++a) base[a] = std::round(xi[a] / step) * step;
      for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dz = -1; dz <= 1; ++dz) {
            const std::array<double, 3> n{base[0] + dx * step, base[1] + dy * step, base[2] + dz * step};
            const double c = lattice_cutoff(k, n, xi);
            EXPECT_NEAR(c * lattice_cutoff_wide(k, n, xi), c, 1e-15);
            s += c;
          }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(LatticeCutoff, ExamplesAndErrors) {
  const std::array<double, 3> z{0.0, 0.0, 0.0};
  EXPECT_GT(lattice_cutoff(0, z, z), 0.0);
  const std::array<double, 3> n{4.0, 0.0, 0.0};
  EXPECT_EQ(lattice_cutoff(2, n, n), lattice_cutoff(2, z, z));
  EXPECT_EQ(chi1(0.5), 0.5);
  EXPECT_EQ(chi1_wide(3.0), 1.0);
  EXPECT_EQ(chi1_wide(4.0), 0.0);
  const std::array<double, 3> off{3.0, 0.0, 0.0};
  EXPECT_THROW(lattice_cutoff(1, off, z), Error);
}

TEST(Directions, CoveringAndSymmetry) {
  for (double delta : {0.5, 0.3, 0.2}) {
    const DirectionSet set = build_direction_set(3, delta);
    EXPECT_LE(set.achieved_radius, delta);
    // independent covering check on a fresh random sample
    Rng rng(15);
    for (int trial = 0; trial < 2000; ++trial) {
      std::vector<double> w{rng.normal(), rng.normal(), rng.normal()};
      const double n = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
      for (auto& c : w) c /= n;
      double best = 2.0;
      for (const auto& e : set.directions) {
        double d2 = 0.0;
        for (int a = 0; a < 3; ++a) d2 += (w[a] - e.unit[a]) * (w[a] - e.unit[a]);
        best = std::min(best, std::sqrt(d2));
      }
      EXPECT_LE(best, delta + 0.02);
    }
    for (const auto& e : set.directions) {
      std::vector<int> neg = e.lattice;
      for (int& c : neg) c = -c;
      bool found = false;
      for (const auto& f : set.directions) found = found || f.lattice == neg;
      EXPECT_TRUE(found);
    }
  }
}

TEST(Directions, DefaultSetContainsAxesAndDiagonals) {
  const DirectionSet set = build_direction_set(3, 0.5);
  auto has = [&](std::vector<int> v) {
    for (const auto& e : set.directions)
      if (e.lattice == v) return true;
    return false;
  };
  EXPECT_TRUE(has({1, 0, 0}) && has({-1, 0, 0}) && has({0, 0, 1}));
  EXPECT_TRUE(has({1, 1, 1}) && has({-1, -1, -1}));
}

TEST(Directions, InfeasibleRadiusThrows) { EXPECT_THROW(build_direction_set(3, 1e-31), Error); }

TEST(Directions, TransversePick) {
  const DirectionSet set = build_direction_set(3, 0.2);
  const std::vector<double> e1{1.0, 0.0, 0.0}, m1{-1.0, 0.0, 0.0};
  const auto p = pick_transverse_direction(e1, e1, set);
  EXPECT_EQ(p.direction.lattice, (std::vector<int>{1, 0, 0}));
  EXPECT_DOUBLE_EQ(p.dot1, 1.0);
  EXPECT_DOUBLE_EQ(p.dot2, 1.0);
  const auto q = pick_transverse_direction(e1, m1, set);
  EXPECT_GE(q.dot2, q.threshold);

  Rng rng(16);
  double min_seen = 1.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> w1{rng.normal(), rng.normal(), rng.normal()}, w2{rng.normal(), rng.normal(), rng.normal()};
    for (auto* w : {&w1, &w2}) {
      const double n = std::sqrt((*w)[0] * (*w)[0] + (*w)[1] * (*w)[1] + (*w)[2] * (*w)[2]);
      for (auto& c : *w) c /= n;
    }
    const auto r = pick_transverse_direction(w1, w2, set);
    min_seen = std::min({min_seen, r.dot1, r.dot2});
  }
  EXPECT_GE(min_seen, transversality_constant(set));
}
