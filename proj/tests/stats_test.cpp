#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bdar/stats.hpp"
#include "test_support.hpp"

using namespace bdar;
using bdar::testing::add_direct;
using bdar::testing::random_state;

namespace {

// Walks every endpoint pair with a full direct link and every ordered list
// of d intermediates, picks the candidate minimising the larger leg load
// (first on ties), and credits both legs at their current load.
std::vector<std::vector<double>> brute_force_g(const NetworkState& s, int d) {
  const int n = s.n();
  const int C = s.capacity();
  std::vector<std::vector<double>> g(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(C), 0.0));
  const double lists = std::pow(n - 2, d);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (s.load(a, b) < C) continue;
      std::vector<int> others;
      for (int w = 0; w < n; ++w) {
        if (w != a && w != b) others.push_back(w);
      }
      std::vector<int> digits(static_cast<std::size_t>(d), 0);
      while (true) {
        int best = -1;
        int best_load = C;
        for (int r = 0; r < d; ++r) {
          const int w = others[static_cast<std::size_t>(digits[static_cast<std::size_t>(r)])];
          const int m = std::max(s.load(a, w), s.load(w, b));
          if (m < best_load) {
            best_load = m;
            best = w;
          }
        }
        if (best >= 0) {
          g[static_cast<std::size_t>(a)][static_cast<std::size_t>(s.load(a, best))] += 1.0 / lists;
          g[static_cast<std::size_t>(best)][static_cast<std::size_t>(s.load(a, best))] += 1.0 / lists;
          g[static_cast<std::size_t>(best)][static_cast<std::size_t>(s.load(best, b))] += 1.0 / lists;
          g[static_cast<std::size_t>(b)][static_cast<std::size_t>(s.load(best, b))] += 1.0 / lists;
        }
        int r = 0;
        while (r < d && ++digits[static_cast<std::size_t>(r)] == n - 2) digits[static_cast<std::size_t>(r++)] = 0;
        if (r == d) break;
      }
    }
  }
  return g;
}

}  // namespace

TEST(FCounts, Examples) {
  const NetworkState empty(5, 2);
  EXPECT_EQ(f_counts(empty, 3), std::vector<int>({4, 0, 0}));
  EXPECT_EQ(f_counts(full_state(5, 2), 0), std::vector<int>({0, 0, 4}));
  NetworkState s(3, 2);
  add_direct(s, 0, 1);
  EXPECT_EQ(f_counts(s, 0), std::vector<int>({1, 1, 0}));
  EXPECT_EQ(f_counts(s, 2), std::vector<int>({2, 0, 0}));
  EXPECT_THROW(f_counts(s, 3), std::invalid_argument);
}

TEST(Phi, EmptyAndFull) {
  for (const auto& s : {NetworkState(6, 2), full_state(6, 2)}) {
    const Phi p = phi_functionals(s);
    EXPECT_EQ(p.phi1, 0.0);
    EXPECT_EQ(p.phi2, 0.0);
  }
}

TEST(Phi, SingleDirectCall) {
  NetworkState s(4, 1);
  add_direct(s, 0, 1);
  const Phi p = phi_functionals(s);
  EXPECT_DOUBLE_EQ(p.phi2, 0.5);
  EXPECT_DOUBLE_EQ(p.phi_tilde, std::max(p.phi1, p.phi2));
}

TEST(Phi, NeedsFourNodes) { EXPECT_THROW(phi_functionals(NetworkState(3, 1)), std::invalid_argument); }

TEST(EmpiricalG, EmptyAndFullAreZero) {
  for (const auto& s : {NetworkState(6, 2), full_state(6, 2)}) {
    for (int v = 0; v < 6; ++v) {
      for (double x : empirical_g(s, v, 2)) EXPECT_EQ(x, 0.0);
    }
  }
}

TEST(EmpiricalG, HandBuiltSingleFullLink) {
  // n=4, C=1, d=1, only link {1,2} full: each of the two alternatives routes
  // through a free pair of legs, so over the 2 candidate lists each of nodes
  // 3 and 4 is chosen once and receives two load-0 legs.
  NetworkState s(4, 1);
  add_direct(s, 0, 1);
  const auto ref = brute_force_g(s, 1);
  EXPECT_DOUBLE_EQ(ref[0][0], 1.0);
  EXPECT_DOUBLE_EQ(ref[2][0], 1.0);
  for (int v = 0; v < 4; ++v) {
    const auto lit = empirical_g_literal(s, v, 1);
    EXPECT_DOUBLE_EQ(lit[0], ref[static_cast<std::size_t>(v)][0]);
  }
}

TEST(EmpiricalG, ImplementationsAgreeWithBruteForce) {
  Rng rng(10);
  for (int n = 3; n <= 7; ++n) {
    for (int C = 1; C <= 2; ++C) {
      for (int d = 1; d <= 3; ++d) {
        for (int rep = 0; rep < 6; ++rep) {
          const NetworkState s = random_state(n, C, rng, 3 * n * C);
          const auto ref = brute_force_g(s, d);
          const auto prof = empirical_g_profile(s, d);
          for (int v = 0; v < n; ++v) {
            const auto lit = empirical_g_literal(s, v, d);
            for (int j = 0; j < C; ++j) {
              const double want = ref[static_cast<std::size_t>(v)][static_cast<std::size_t>(j)];
              ASSERT_NEAR(lit[static_cast<std::size_t>(j)], want, 1e-12) << n << ' ' << C << ' ' << d;
              ASSERT_NEAR(prof[static_cast<std::size_t>(v)][static_cast<std::size_t>(j)], want, 1e-12)
                  << n << ' ' << C << ' ' << d;
            }
          }
        }
      }
    }
  }
}

TEST(Snapshot, RowsSumToDegree) {
  Rng rng(4);
  const auto p = ModelParams::make(7, 2, 1, 0.5);
  const NetworkState s = random_state(7, 2, rng, 40);
  const StatSnapshot snap = take_snapshot(s, p, 12, 3, true);
  for (const auto& row : snap.f) EXPECT_EQ(std::accumulate(row.begin(), row.end(), 0), 6);
  EXPECT_EQ(snap.calls, s.total_calls());
  EXPECT_DOUBLE_EQ(snap.phi.phi_tilde, std::max(snap.phi.phi1, snap.phi.phi2));
}

TEST(Equilibrium, NearlyEmptyAtTinyLambda) {
  const auto p = ModelParams::make(10, 1, 1, 1e-6);
  const auto est = equilibrium_average(p, 200000, 1000, 10, Rng(1));
  EXPECT_GE(est.zeta[0], 0.999);
  EXPECT_NEAR(est.zeta[0] + est.zeta[1], 1.0, 1e-12);
  const auto rate = blocking_rate(est.arrivals, est.blocked);
  if (rate) EXPECT_EQ(*rate, 0.0);
}

TEST(Equilibrium, CoordinatesSumToOne) {
  const auto p = ModelParams::make(12, 3, 2, 1.0);
  const auto est = equilibrium_average(p, 300000, 50000, 66, Rng(2));
  EXPECT_NEAR(std::accumulate(est.zeta.begin(), est.zeta.end(), 0.0), 1.0, 1e-12);
  EXPECT_EQ(est.standard_error.size(), 4u);
  EXPECT_GT(est.samples, 0);
}

TEST(Equilibrium, ObserverSeesRetainedSnapshots) {
  const auto p = ModelParams::make(6, 1, 1, 0.3);
  std::int64_t seen = 0;
  const auto est = equilibrium_average(p, 10000, 1000, 100, Rng(3), RoutingVariant::Bdar,
                                       [&](std::int64_t, const NetworkState&) { ++seen; });
  EXPECT_EQ(seen, est.samples);
}

TEST(Equilibrium, RejectsBurnInPastEnd) {
  const auto p = ModelParams::make(6, 1, 1, 0.3);
  EXPECT_THROW(equilibrium_average(p, 100, 100, 1, Rng(3)), std::invalid_argument);
}

TEST(BlockingRate, UndefinedWithoutArrivals) {
  EXPECT_FALSE(blocking_rate(0, 0).has_value());
  EXPECT_DOUBLE_EQ(*blocking_rate(4, 1), 0.25);
}

TEST(BlockingRate, HighLambdaBlocksAlmostEverything) {
  const auto p = ModelParams::make(20, 1, 1, 43846.0);
  const std::int64_t burn = default_burn_in(p);
  const auto est = equilibrium_average(p, burn + 400000, burn, 190, Rng(4));
  EXPECT_GE(*blocking_rate(est.arrivals, est.blocked), 0.99);
}

TEST(BlockingRate, IncreasesWithLambda) {
  double last = -1.0;
  for (double lambda : {0.05, 0.5, 5.0}) {
    const auto p = ModelParams::make(20, 1, 1, lambda);
    const auto est = equilibrium_average(p, 3000000, 500000, 190, Rng(5));
    const double rate = *blocking_rate(est.arrivals, est.blocked);
    EXPECT_GT(rate, last) << lambda;
    last = rate;
  }
}

TEST(Concentration, TinyLambdaIsDegenerate) {
  const auto p = ModelParams::make(16, 1, 1, 1e-6);
  const auto r = concentration_experiment(p, 100, 20000, 0, 0, 8);
  EXPECT_GE(r.mean, 14.9);
  ASSERT_EQ(r.tails.size(), 3u);
  for (const auto& t : r.tails) EXPECT_LE(t.probability, 0.02);
  EXPECT_THROW(concentration_experiment(p, 99, 10, 0, 0, 8), std::invalid_argument);
}
