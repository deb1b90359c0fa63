#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bdar/meanfield.hpp"

using namespace bdar;

namespace {

// Scalar reduction for C = d = 1: lambda x + 2 lambda (1 - x) x^2 = 1 - x,
// solved by bisection.
double scalar_oracle(double lambda) {
  const auto f = [lambda](double x) { return lambda * x + 2 * lambda * (1 - x) * x * x - (1 - x); };
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double linf(const Simplex& a, const Simplex& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(H, Values) {
  EXPECT_DOUBLE_EQ(H(0.7, 0.7, 3), 0.0);
  EXPECT_DOUBLE_EQ(H(0.8, 0.3, 1), 0.5);
  EXPECT_DOUBLE_EQ(H(1.0, 0.0, 2), 1.0);
  EXPECT_THROW(H(0.2, 0.5, 1), std::invalid_argument);
  EXPECT_THROW(H(1.2, 0.5, 1), std::invalid_argument);
}

TEST(H, BoundedByDTimesGap) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    double a = rng.uniform01();
    double b = rng.uniform01();
    if (b > a) std::swap(a, b);
    for (int d = 1; d <= 4; ++d) {
      const double h = H(a, b, d);
      EXPECT_GE(h, 0.0);
      EXPECT_LE(h, d * (a - b) + 1e-15);
    }
  }
}

TEST(G, HandValues) {
  const auto p1 = MeanFieldParams::make(1, 1, 0.1);
  const auto p2 = MeanFieldParams::make(1, 2, 0.1);
  EXPECT_NEAR(g_literal({0.5, 0.5}, p1)[0], 0.25, 1e-15);
  EXPECT_NEAR(g_hform({0.5, 0.5}, p1)[0], 0.25, 1e-15);
  EXPECT_NEAR(g_literal({0.5, 0.5}, p2)[0], 0.4375, 1e-15);
  EXPECT_NEAR(g_hform({0.5, 0.5}, p2)[0], 0.4375, 1e-15);
}

TEST(G, RationalReferenceValues) {
  // exact rational evaluations: C=2, d=2 at (1/5, 3/10, 1/2) and C=3, d=3 at (1,2,3,4)/10
  const auto a = g_literal({0.2, 0.3, 0.5}, MeanFieldParams::make(2, 2, 0.1));
  EXPECT_NEAR(a[0], 181.0 / 1000.0, 1e-14);
  EXPECT_NEAR(a[1], 513.0 / 2000.0, 1e-14);
  const auto b = g_hform({0.1, 0.2, 0.3, 0.4}, MeanFieldParams::make(3, 3, 0.1));
  EXPECT_NEAR(b[0], 69243.0 / 625000.0, 1e-14);
  EXPECT_NEAR(b[1], 33969.0 / 156250.0, 1e-14);
  EXPECT_NEAR(b[2], 163809.0 / 625000.0, 1e-14);
}

TEST(G, VanishesWithoutFullLinks) {
  const auto p = MeanFieldParams::make(3, 2, 0.1);
  for (double x : g({0.4, 0.4, 0.2, 0.0}, p)) EXPECT_EQ(x, 0.0);
}

TEST(G, FormsAgreeAndRespectBound) {
  Rng rng(2);
  for (int C = 1; C <= 4; ++C) {
    for (int d = 1; d <= 3; ++d) {
      const auto p = MeanFieldParams::make(C, d, 0.1);
      for (int i = 0; i < 500; ++i) {
        const Simplex xi = random_simplex(C, rng);
        const auto lit = g_literal(xi, p);
        const auto hf = g_hform(xi, p);
        for (int j = 0; j < C; ++j) {
          EXPECT_NEAR(lit[j], hf[j], 1e-12);
          EXPECT_GE(hf[j], -1e-15);
          EXPECT_LE(hf[j], 2 * d * xi[j] * xi[C] + 1e-14);
        }
      }
    }
  }
}

TEST(F, HandValues) {
  const auto p = MeanFieldParams::make(1, 1, 1.0 / 12.0);
  const auto f = F({0.5, 0.5}, p);
  EXPECT_NEAR(f[0], 0.4375, 1e-15);
  EXPECT_NEAR(f[1], -0.4375, 1e-15);
  const auto q = MeanFieldParams::make(3, 2, 0.3);
  const auto e = F({1, 0, 0, 0}, q);
  EXPECT_DOUBLE_EQ(e[0], -0.3);
  EXPECT_DOUBLE_EQ(e[1], 0.3);
  EXPECT_DOUBLE_EQ(e[2], 0.0);
  EXPECT_DOUBLE_EQ(e[3], 0.0);
}

TEST(F, Conserves) {
  Rng rng(3);
  const auto p = MeanFieldParams::make(4, 2, 0.7);
  for (int i = 0; i < 1000; ++i) {
    const auto f = F(random_simplex(4, rng), p);
    EXPECT_NEAR(std::accumulate(f.begin(), f.end(), 0.0), 0.0, 1e-12);
  }
}

TEST(F, RejectsPointsOffTheSimplex) {
  const auto p = MeanFieldParams::make(1, 1, 0.1);
  EXPECT_THROW(F({0.5, 0.6}, p), std::invalid_argument);
  EXPECT_THROW(F({0.5, 0.5, 0.0}, p), std::invalid_argument);
  EXPECT_THROW(F({1.2, -0.2}, p), std::invalid_argument);
}

TEST(Residual, HandValues) {
  const auto p = MeanFieldParams::make(1, 1, 1.0 / 12.0);
  EXPECT_NEAR(fixed_point_residual({1, 0}, p), 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(fixed_point_residual({0.5, 0.5}, p), 0.4375, 1e-15);
}

TEST(FixedPoint, MatchesScalarOracle) {
  const double lambda = 1.0 / 12.0;
  const double x = scalar_oracle(lambda);
  EXPECT_NEAR(x, 0.911795257036132489, 1e-15);
  const auto r = fixed_point(MeanFieldParams::make(1, 1, lambda));
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.eta[0], x, 1e-8);
  EXPECT_LE(r.residual, 1e-10);
  EXPECT_LE(r.diameter, 1e-9);
}

TEST(FixedPoint, LowRegimeSweep) {
  for (double lambda = 0.01; lambda < 0.0801; lambda += 0.01) {
    const auto r = fixed_point(MeanFieldParams::make(1, 1, lambda));
    EXPECT_TRUE(r.converged) << lambda;
    EXPECT_LE(r.diameter, 1e-9) << lambda;
    EXPECT_NEAR(r.eta[0], scalar_oracle(lambda), 1e-8) << lambda;
  }
}

TEST(FixedPoint, HighRegimeAlmostFull) {
  const double l1 = lambda1_for(2, 1);
  const auto r = fixed_point(MeanFieldParams::make(2, 1, l1));
  ASSERT_TRUE(r.converged);
  EXPECT_EQ(r.map, "backward");
  EXPECT_GE(r.eta[2], 1.0 - 2.0 / l1);
  EXPECT_LE(r.residual, 1e-10);
}

TEST(FixedPoint, MiddleRegimeRunsWithoutAsserting) {
  const auto r = fixed_point(MeanFieldParams::make(20, 1, 5.0));
  EXPECT_EQ(r.runs.size(), 22u);
  for (const auto& run : r.runs) EXPECT_NO_THROW(check_simplex(run.eta, 20, 1e-9));
}

TEST(FixedPoint, ResidualAtSolutionIsTiny) {
  const auto p = MeanFieldParams::make(3, 2, 0.02);
  const auto r = fixed_point(p);
  EXPECT_LE(fixed_point_residual(r.eta, p), 1e-12);
}

TEST(Ode, ConvergesToFixedPoint) {
  const auto p = MeanFieldParams::make(1, 1, 1.0 / 12.0);
  const auto ode = ode_integrate({0, 1}, p, 200.0, 1e-3, 1000);
  const auto fp = fixed_point(p);
  EXPECT_LE(linf(ode.points.back(), fp.eta), 1e-8);
  EXPECT_DOUBLE_EQ(ode.times.back(), 200.0);
}

TEST(Ode, FixedPointIsStationary) {
  const auto p = MeanFieldParams::make(2, 2, 0.05);
  const auto fp = fixed_point(p);
  const auto ode = ode_integrate(fp.eta, p, 20.0, 1e-2, 100);
  for (const auto& pt : ode.points) EXPECT_LE(linf(pt, fp.eta), 1e-10);
}

TEST(Ode, StepHalvingChangesEndpointLittle) {
  const auto p = MeanFieldParams::make(2, 1, 0.05);
  const auto a = ode_integrate({0, 0, 1}, p, 10.0, 1e-2, 1000000);
  const auto b = ode_integrate({0, 0, 1}, p, 10.0, 5e-3, 1000000);
  EXPECT_LE(linf(a.points.back(), b.points.back()), 1e-10);
}

TEST(Ode, StaysOnSimplex) {
  Rng rng(5);
  const auto p = MeanFieldParams::make(3, 2, 0.04);
  const auto r = ode_integrate(random_simplex(3, rng), p, 50.0, 1e-2, 100);
  EXPECT_LE(r.max_projection, 1e-9);
  for (const auto& pt : r.points) EXPECT_NO_THROW(check_simplex(pt, 3, 1e-12));
}

TEST(Ode, RejectsBadStep) {
  const auto p = MeanFieldParams::make(1, 1, 0.1);
  EXPECT_THROW(ode_integrate({1, 0}, p, 1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(ode_integrate({1, 0}, p, 1.0, -1e-3), std::invalid_argument);
}

TEST(Lipschitz, BoundAtBarycenterPair) {
  const auto p = MeanFieldParams::make(1, 1, 0.1);
  EXPECT_NEAR(g_lipschitz_bound({0.5, 0.5}, {0.5, 0.5}, p), 4.25, 1e-15);
}

TEST(Lipschitz, NoViolations) {
  Rng rng(6);
  for (int C = 1; C <= 3; ++C) {
    for (int d = 1; d <= 2; ++d) {
      const auto probe = g_lipschitz_probe(MeanFieldParams::make(C, d, 0.1), 2000, rng);
      EXPECT_EQ(probe.violations, 0) << C << ' ' << d;
      EXPECT_GT(probe.samples, 1900);
    }
  }
}

TEST(Simplex, Helpers) {
  EXPECT_EQ(barycenter(3), Simplex(4, 0.25));
  EXPECT_EQ(vertex(2, 1), Simplex({0, 1, 0}));
  EXPECT_DOUBLE_EQ(cumulative({0.2, 0.3, 0.5}, -1), 0.0);
  EXPECT_DOUBLE_EQ(cumulative({0.2, 0.3, 0.5}, 1), 0.5);
  EXPECT_THROW(check_simplex({0.5, 0.6}, 1), std::invalid_argument);
}
