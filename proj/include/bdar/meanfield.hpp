#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bdar/params.hpp"
#include "bdar/rng.hpp"

namespace bdar {

struct MeanFieldParams {
  int C = 1;
  int d = 1;
  double lambda = 0.0;

  static MeanFieldParams make(int C, int d, double lambda);
  static MeanFieldParams from(const ModelParams& p) { return make(p.C, p.d, p.lambda); }
  Regime regime() const;
};

/// A point of the probability simplex over loads 0..C.
using Simplex = std::vector<double>;

/// Throws std::invalid_argument unless xi has C+1 nonnegative coordinates
/// summing to 1 within tol.
void check_simplex(const Simplex& xi, int C, double tol = 1e-10);
/// xi(<= j), with xi(<= -1) = 0.
double cumulative(const Simplex& xi, int j);
Simplex barycenter(int C);
Simplex vertex(int C, int j);
/// Uniform (flat Dirichlet) sample.
Simplex random_simplex(int C, Rng& rng);

/// (a - b) * sum_{r=1}^d (1 - a^2)^{r-1} (1 - b^2)^{d-r}, for 0 <= b <= a <= 1.
double H(double a, double b, int d);

/// g_0..g_{C-1}, written as the double sum over positions r and other-leg
/// loads i.
std::vector<double> g_literal(const Simplex& xi, const MeanFieldParams& p);
/// The same functions written through H.
std::vector<double> g_hform(const Simplex& xi, const MeanFieldParams& p);
inline std::vector<double> g(const Simplex& xi, const MeanFieldParams& p) { return g_hform(xi, p); }

/// Drift F_0..F_C.
std::vector<double> F(const Simplex& xi, const MeanFieldParams& p);

struct OdeResult {
  std::vector<double> times;
  std::vector<Simplex> points;
  /// Largest l1 distance between a raw RK4 update and its projection back
  /// onto the simplex.
  double max_projection = 0.0;
  std::int64_t steps = 0;
};

/// Fixed-step RK4 for d xi/dt = F(xi), renormalised onto the simplex after
/// every step. Records every `record_every`-th point plus the endpoint.
/// Throws std::invalid_argument for step <= 0 and std::runtime_error if a
/// raw update leaves the simplex by more than 1e-6.
OdeResult ode_integrate(const Simplex& xi0, const MeanFieldParams& p, double t_end, double step,
                        std::int64_t record_every = 1);

/// max_j |-lambda eta(j) - lambda g_j(eta) + (j+1) eta(j+1)| over j < C.
double fixed_point_residual(const Simplex& eta, const MeanFieldParams& p);

enum class FixedPointMap { Auto, Forward, Backward };

struct FixedPointOptions {
  double tolerance = 1e-13;
  std::int64_t max_iters = 200000;
  double theta = 0.5;
  int max_restarts = 8;
  std::vector<Simplex> starts;  // empty: every vertex plus the barycenter
  FixedPointMap map = FixedPointMap::Auto;
};

struct FixedPointRun {
  Simplex start;
  Simplex eta;
  double residual = 0.0;
  std::int64_t iterations = 0;
  int restarts = 0;
  bool converged = false;
};

struct FixedPointResult {
  Simplex eta;  // from the barycenter start when present, else the first start
  double residual = 0.0;  // worst residual over all starts
  std::int64_t iterations = 0;  // most iterations used by any start
  bool converged = false;  // every start converged
  double diameter = 0.0;  // largest max-norm distance between any two answers
  std::string map;  // "forward" or "backward"
  std::vector<FixedPointRun> runs;
};

/// Damped normalised iteration for F(eta) = 0 from several starts.
///
/// The forward map u(j+1) = lambda (eta(j) + g_j(eta)) / (j+1) is used
/// unless lambda is in the high regime, where its Jacobian has norm of order
/// lambda; there the backward map v(j) = (j+1) eta(j+1) / lambda - g_j(eta),
/// v(C) = 1 - sum_{j<C} v(j), whose fixed points are the same, is used.
FixedPointResult fixed_point(const MeanFieldParams& p, const FixedPointOptions& options = {});

struct LipschitzProbe {
  std::int64_t samples = 0;
  std::int64_t violations = 0;
  double max_ratio = 0.0;  // max ||g(xi) - g(eta)||_1 / ||xi - eta||_1
  double max_ratio_to_bound = 0.0;  // max of that ratio divided by the bound
};

/// (1 + eta(C)(12C + 3)) d max(xi(<= C-1), eta(<= C-1)).
double g_lipschitz_bound(const Simplex& xi, const Simplex& eta, const MeanFieldParams& p);

/// Random pairs; a violation is a ratio above the bound by more than 1e-9.
LipschitzProbe g_lipschitz_probe(const MeanFieldParams& p, std::int64_t samples, Rng& rng);

}  // namespace bdar
