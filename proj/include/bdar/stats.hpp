#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "bdar/jump_chain.hpp"
#include "bdar/meanfield.hpp"
#include "bdar/params.hpp"
#include "bdar/rng.hpp"
#include "bdar/state.hpp"

namespace bdar {

/// f_{v,0..C}: links at v by load.
std::vector<int> f_counts(const NetworkState& state, int v);

struct Phi {
  double phi1 = 0.0;
  double phi2 = 0.0;
  double phi_tilde = 0.0;
};

/// Uniformity functionals. phi1 compares the joint load profile of (uw, vw)
/// over intermediates w with the product of its marginals; phi2 compares
/// load histograms between nodes. Both maximise over distinct u, v. Needs n >= 4.
Phi phi_functionals(const NetworkState& state);

/// Expected number of v-incident links at load j that receive an
/// alternatively routed call, summed over all endpoint pairs and averaged
/// over candidate lists (so the per-step rate is lambda / ((lambda+C) L)
/// times this value). Index j = 0..C-1.
///
/// empirical_g_literal sums the four indicator expressions over explicit
/// candidate tuples; empirical_g_profile groups candidates by their larger
/// leg load, which makes the cost independent of d. empirical_g picks the
/// literal sum for d = 1 and the profile form otherwise.
std::vector<double> empirical_g_literal(const NetworkState& state, int v, int d);
std::vector<std::vector<double>> empirical_g_profile(const NetworkState& state, int d);
std::vector<double> empirical_g(const NetworkState& state, int v, int d);

struct StatSnapshot {
  std::int64_t step = 0;
  std::vector<std::vector<int>> f;  // [v][j]
  Phi phi;
  bool in_R = false;
  std::int64_t calls = 0;
  std::int64_t blocked_so_far = 0;
};

/// phi is only filled when with_phi is set (it costs O(n^3)).
StatSnapshot take_snapshot(const NetworkState& state, const ModelParams& params, std::int64_t step,
                           std::int64_t blocked_so_far, bool with_phi);

/// max(s, steps_for_time(20)).
std::int64_t default_burn_in(const ModelParams& params);

struct EquilibriumEstimate {
  Simplex zeta;
  std::vector<double> standard_error;  // batch-means standard error per coordinate
  std::int64_t samples = 0;
  std::int64_t burn_in = 0;
  std::int64_t thinning = 0;
  int batches = 0;
  std::int64_t arrivals = 0;  // after burn-in
  std::int64_t blocked = 0;   // after burn-in
};

using SnapshotObserver = std::function<void(std::int64_t step, const NetworkState& state)>;

/// Runs one chain from the empty state for total_steps, discards the first
/// burn_in steps and averages the node-averaged load proportions over every
/// thinning-th step after that. The observer, if set, sees each retained
/// snapshot.
EquilibriumEstimate equilibrium_average(const ModelParams& params, std::int64_t total_steps, std::int64_t burn_in,
                                        std::int64_t thinning, Rng rng,
                                        RoutingVariant variant = RoutingVariant::Bdar,
                                        const SnapshotObserver& observer = {});

/// Blocked / arrivals, or nullopt when there were no arrivals.
std::optional<double> blocking_rate(std::int64_t arrivals, std::int64_t blocked);

struct TailRow {
  double a = 0.0;
  double probability = 0.0;
};

struct ConcentrationResult {
  int n = 0;
  int node = 0;
  int load = 0;
  std::int64_t steps = 0;
  std::vector<int> values;  // f_{node,load} at the end of each replica
  double mean = 0.0;
  double variance = 0.0;
  std::vector<TailRow> tails;  // a = sqrt(n), 2 sqrt(n), 4 sqrt(n)
};

/// Independent chains from the empty state, each run for `steps` steps.
/// Needs at least 100 replicas.
ConcentrationResult concentration_experiment(const ModelParams& params, int replicas, std::int64_t steps, int node,
                                             int load, std::uint64_t seed, int threads = 1);

}  // namespace bdar
