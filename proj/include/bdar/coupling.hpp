#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bdar/fenwick.hpp"
#include "bdar/jump_chain.hpp"
#include "bdar/params.hpp"
#include "bdar/rng.hpp"
#include "bdar/state.hpp"

namespace bdar {

/// Two chains driven by shared randomness. Arrivals share endpoints and
/// candidate intermediates; a departure draws one slot against a pairing
/// that depends only on (x, y):
///
///   slots 1..M            matched pairs (same route in both), canonical order
///   next min(EX, EY)      arbitrary pairs: k-th excess call of x with k-th of y
///   next |EX - EY|        unpaired excess calls of the larger state
///   remaining slots       no-op in both
///
/// where M = sum_r min(x_r, y_r) and EX, EY are the excess call counts.
class CoupledPair {
 public:
  CoupledPair(NetworkState x, NetworkState y);

  const NetworkState& x() const { return x_; }
  const NetworkState& y() const { return y_; }

  std::int64_t matched_calls() const { return matched_total_; }
  std::int64_t excess_x() const { return excess_x_total_; }
  std::int64_t excess_y() const { return excess_y_total_; }
  std::int64_t l1() const { return excess_x_total_ + excess_y_total_; }
  bool coalesced() const { return l1() == 0; }

  void step(const ModelParams& params, Rng& rng, RoutingVariant variant = RoutingVariant::Bdar);
  /// Applies one pre-sampled event; exposed so tests can drive specific slots.
  void apply(const Event& event, RoutingVariant variant = RoutingVariant::Bdar);

 private:
  void add_x(std::size_t route_id, int delta);
  void add_y(std::size_t route_id, int delta);
  void refresh(std::size_t route_id);

  NetworkState x_;
  NetworkState y_;
  std::vector<int> matched_;
  std::vector<int> ex_;
  std::vector<int> ey_;
  FenwickTree matched_index_;
  FenwickTree ex_index_;
  FenwickTree ey_index_;
  std::int64_t matched_total_ = 0;
  std::int64_t excess_x_total_ = 0;
  std::int64_t excess_y_total_ = 0;
  Event event_;
};

/// sum over routes of |x_r - y_r|.
std::int64_t l1_distance(const NetworkState& x, const NetworkState& y);
/// The same sum restricted to routes with v as an endpoint or intermediate.
std::int64_t node_distance(const NetworkState& x, const NetworkState& y, int v);

struct WeightedDistance {
  std::int64_t value = 0;
  std::vector<int> unbalanced;  // pair indices with x(uv) != y(uv)
};

/// (4C+1) * sum |x(uwv) - y(uwv)| + sum over unbalanced uv of (C - min(x(uv), y(uv))).
WeightedDistance weighted_distance(const NetworkState& x, const NetworkState& y);
std::int64_t weighted_node_distance(const NetworkState& x, const NetworkState& y, int v);

struct CallAccounting {
  std::int64_t a = 0;  // unbalanced links
  std::int64_t b = 0;  // unmatched indirect calls
  std::int64_t c = 0;  // covered unmatched direct calls
};

/// An unmatched direct call of x on uv is covered when x(uv) <= y(uv), and
/// symmetrically for y.
CallAccounting call_accounting(const NetworkState& x, const NetworkState& y);

struct DistanceReport {
  std::int64_t l1 = 0;
  std::vector<std::int64_t> per_node;
  std::int64_t weighted = 0;
  std::vector<std::int64_t> weighted_per_node;
  CallAccounting accounting;
};

DistanceReport distance_report(const NetworkState& x, const NetworkState& y);

/// Every node has f_{v,C} >= (n-1)(1 - 1/(60 C d)).
bool in_R(const NetworkState& state, const ModelParams& params);

/// Steps of the coupled chain until the two states agree, or nullopt if they
/// still differ after max_steps (a censored observation).
std::optional<std::int64_t> coalescence_experiment(const ModelParams& params, const NetworkState& x0,
                                                   const NetworkState& y0, std::int64_t max_steps, Rng rng,
                                                   RoutingVariant variant = RoutingVariant::Bdar);

struct CoalescenceSummary {
  std::vector<std::optional<std::int64_t>> times;  // by replica index
  std::int64_t coalesced = 0;
  double coalesced_fraction = 0.0;
  /// Median over all replicas (censored ones count as +infinity); set only
  /// when at least 90% coalesced.
  std::optional<double> median;
};

CoalescenceSummary coalescence_replicas(const ModelParams& params, const NetworkState& x0,
                                        const NetworkState& y0, std::int64_t max_steps, int replicas,
                                        std::uint64_t seed, int threads = 1);

/// 1 - (1 - (8d+4) lambda) / ((lambda + C) binom(n,2)).
double theoretical_contraction_factor(const ModelParams& params);

/// Source of state pairs at l1 distance exactly 1: a warmed-up solo chain
/// supplies x, and y is x plus one uniformly chosen feasible call.
class DistanceOnePairs {
 public:
  DistanceOnePairs(const ModelParams& params, Rng rng, std::int64_t warmup_steps, std::int64_t spacing_steps);
  /// Returns (x, y); throws std::logic_error if the pair is not at distance 1.
  std::pair<NetworkState, NetworkState> next();

 private:
  ModelParams params_;
  JumpChain chain_;
  Rng pick_;
  std::int64_t spacing_;
};

struct ContractionTrial {
  std::int64_t pre = 0;
  std::int64_t post = 0;
};

struct ContractionEstimate {
  double mean_ratio = 0.0;
  double standard_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double theoretical_factor = 0.0;
  std::int64_t trials = 0;
  std::vector<ContractionTrial> records;
};

/// Mean of l1(after one coupled step) / l1(before) over `trials` distance-1
/// pairs; ci is mean +- 1.96 standard errors.
ContractionEstimate contraction_estimate(const ModelParams& params, std::int64_t trials, std::uint64_t seed,
                                         bool keep_records = false);

}  // namespace bdar
