#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bdar/fenwick.hpp"

namespace bdar {

// Node labels in the C++ API are 0-based; JSON/CSV/CLI use 1-based labels.

/// Precomputed pair tables for the complete graph on n nodes. Pairs are
/// numbered lexicographically: (0,1), (0,2), ..., (0,n-1), (1,2), ...
struct Topology {
  int n = 0;
  int pair_count = 0;
  std::vector<int> pair_u;
  std::vector<int> pair_v;
  std::vector<int> link_index;  // n * n, -1 on the diagonal

  int link(int u, int v) const { return link_index[static_cast<std::size_t>(u) * n + v]; }

  static std::shared_ptr<const Topology> get(int n);
};

/// Unordered pair of distinct nodes, stored with u < v.
struct Link {
  int u = 0;
  int v = 0;

  static Link of(int a, int b);
  bool operator==(const Link&) const = default;
};

/// A route: the direct link between two endpoints (via < 0), or the two-link
/// path endpoints.u - via - endpoints.v. The path u-w-v and v-w-u are the
/// same route.
struct Route {
  Link endpoints;
  int via = -1;

  static Route direct(int a, int b) { return Route{Link::of(a, b), -1}; }
  static Route indirect(int a, int b, int w) { return Route{Link::of(a, b), w}; }

  bool is_direct() const { return via < 0; }
  bool operator==(const Route&) const = default;
  std::string describe() const;  // 1-based, e.g. "direct(1,2)" or "indirect({1,3},2)"
};

struct Violation {
  std::string kind;  // "capacity", "negative", "cache", "total", "diagonal"
  std::string detail;
};

/// Per-route call counts of the load vector, with cached link loads, per-node
/// load histograms f_{v,j} and a Fenwick index over the canonical call order.
///
/// Route ids give the canonical order: direct routes are ids [0, L) by pair,
/// indirect routes are L + pair * n + via. Ids whose via is an endpoint are
/// never occupied.
class NetworkState {
 public:
  NetworkState(int n, int C);

  /// Builds a state from raw counts without checking feasibility, so that
  /// validate() can be exercised on broken states. `direct` has one entry per
  /// pair; `indirect` has pair_count * n entries indexed pair * n + via.
  static NetworkState from_counts(int n, int C, std::vector<int> direct, std::vector<int> indirect);

  int n() const { return topo_->n; }
  int capacity() const { return capacity_; }
  int pair_count() const { return topo_->pair_count; }
  const Topology& topology() const { return *topo_; }
  std::size_t route_id_count() const { return counts_.size(); }

  int direct(int pair) const { return counts_[static_cast<std::size_t>(pair)]; }
  int indirect(int pair, int via) const { return counts_[indirect_route_id(pair, via)]; }
  int load(int pair) const { return load_[static_cast<std::size_t>(pair)]; }
  int load(int u, int v) const { return load_[static_cast<std::size_t>(topo_->link(u, v))]; }

  /// Load of a link; throws std::invalid_argument on a bad node index.
  int link_load(Link link) const;
  int direct_count(Link link) const;
  int indirect_count(Route path) const;

  std::int64_t total_calls() const { return total_; }
  /// f_{v,j}: links at v carrying exactly j calls.
  int node_load_count(int v, int j) const {
    return node_hist_[static_cast<std::size_t>(v) * (capacity_ + 1) + j];
  }
  /// Number of links (over the whole graph) carrying exactly j calls.
  std::int64_t links_with_load(int j) const { return link_hist_[static_cast<std::size_t>(j)]; }

  std::size_t direct_route_id(int pair) const { return static_cast<std::size_t>(pair); }
  std::size_t indirect_route_id(int pair, int via) const {
    return static_cast<std::size_t>(topo_->pair_count) +
           static_cast<std::size_t>(pair) * topo_->n + via;
  }
  int route_calls(std::size_t route_id) const { return counts_[route_id]; }
  Route route(std::size_t route_id) const;
  /// Route id of the k-th call (1-based) in canonical order; 1 <= k <= total.
  std::size_t route_of_call(std::int64_t k) const { return index_.find_kth(k); }

  /// Adds delta calls to a route, keeping every cache in sync. No capacity
  /// check; the jump chain only calls this with feasible changes.
  void add_calls(std::size_t route_id, int delta);

  /// Recomputes loads, histograms, totals and the call index from counts.
  void recompute_caches();

  /// Loads recomputed from the raw counts, for cross-checking the cache.
  std::vector<int> recomputed_loads() const;

  bool operator==(const NetworkState& other) const {
    return capacity_ == other.capacity_ && n() == other.n() && counts_ == other.counts_;
  }

 private:
  void shift_load(int pair, int delta);

  std::shared_ptr<const Topology> topo_;
  int capacity_ = 0;
  std::vector<int> counts_;
  std::vector<int> load_;
  std::vector<int> node_hist_;
  std::vector<std::int64_t> link_hist_;
  std::int64_t total_ = 0;
  FenwickTree index_;
};

/// Empty list iff every NetworkState invariant holds.
std::vector<Violation> validate(const NetworkState& state);

/// Calls in canonical order (direct by link, then indirect by (endpoints,
/// via)); a route carrying k calls appears k times.
std::vector<Route> canonical_call_list(const NetworkState& state);

/// Every link loaded to capacity with direct calls.
NetworkState full_state(int n, int C);

}  // namespace bdar
