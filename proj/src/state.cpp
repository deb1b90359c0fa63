#include "bdar/state.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

namespace bdar {

std::shared_ptr<const Topology> Topology::get(int n) {
  static std::mutex mutex;
  static std::map<int, std::weak_ptr<const Topology>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  if (auto cached = cache[n].lock()) return cached;

  auto topo = std::make_shared<Topology>();
  topo->n = n;
  topo->pair_count = n * (n - 1) / 2;
  topo->link_index.assign(static_cast<std::size_t>(n) * n, -1);
  int p = 0;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v, ++p) {
      topo->pair_u.push_back(u);
      topo->pair_v.push_back(v);
      topo->link_index[static_cast<std::size_t>(u) * n + v] = p;
      topo->link_index[static_cast<std::size_t>(v) * n + u] = p;
    }
  }
  cache[n] = topo;
  return topo;
}

Link Link::of(int a, int b) {
  if (a == b) throw std::invalid_argument("a link needs two distinct endpoints");
  return a < b ? Link{a, b} : Link{b, a};
}

std::string Route::describe() const {
  const std::string ends = std::to_string(endpoints.u + 1) + "," + std::to_string(endpoints.v + 1);
  if (is_direct()) return "direct(" + ends + ")";
  return "indirect({" + ends + "}," + std::to_string(via + 1) + ")";
}

NetworkState::NetworkState(int n, int C) : topo_(Topology::get(n)), capacity_(C) {
  if (n < 3) throw std::invalid_argument("network needs at least 3 nodes");
  if (C < 1) throw std::invalid_argument("capacity must be at least 1");
  const auto pairs = static_cast<std::size_t>(topo_->pair_count);
  counts_.assign(pairs + pairs * static_cast<std::size_t>(n), 0);
  recompute_caches();
}

NetworkState NetworkState::from_counts(int n, int C, std::vector<int> direct,
                                       std::vector<int> indirect) {
  NetworkState state(n, C);
  const auto pairs = static_cast<std::size_t>(state.pair_count());
  if (direct.size() != pairs || indirect.size() != pairs * static_cast<std::size_t>(n)) {
    throw std::invalid_argument("count vectors do not match the network size");
  }
  std::copy(direct.begin(), direct.end(), state.counts_.begin());
  std::copy(indirect.begin(), indirect.end(), state.counts_.begin() + static_cast<std::ptrdiff_t>(pairs));
  state.recompute_caches();
  return state;
}

int NetworkState::link_load(Link link) const {
  if (link.u < 0 || link.v >= n() || link.u == link.v) {
    throw std::invalid_argument("invalid link endpoints");
  }
  return load(link.u, link.v);
}

int NetworkState::direct_count(Link link) const {
  if (link.u < 0 || link.v >= n() || link.u == link.v) {
    throw std::invalid_argument("invalid link endpoints");
  }
  return direct(topo_->link(link.u, link.v));
}

int NetworkState::indirect_count(Route path) const {
  const Link e = path.endpoints;
  if (e.u < 0 || e.v >= n() || e.u == e.v || path.via < 0 || path.via >= n() ||
      path.via == e.u || path.via == e.v) {
    throw std::invalid_argument("invalid indirect path");
  }
  return indirect(topo_->link(e.u, e.v), path.via);
}

Route NetworkState::route(std::size_t route_id) const {
  const auto pairs = static_cast<std::size_t>(topo_->pair_count);
  if (route_id < pairs) {
    return Route{Link{topo_->pair_u[route_id], topo_->pair_v[route_id]}, -1};
  }
  const std::size_t rest = route_id - pairs;
  const std::size_t pair = rest / static_cast<std::size_t>(n());
  const int via = static_cast<int>(rest % static_cast<std::size_t>(n()));
  return Route{Link{topo_->pair_u[pair], topo_->pair_v[pair]}, via};
}

void NetworkState::shift_load(int pair, int delta) {
  const int before = load_[static_cast<std::size_t>(pair)];
  const int after = before + delta;
  load_[static_cast<std::size_t>(pair)] = after;
  const int width = capacity_ + 1;
  const int ends[2] = {topo_->pair_u[static_cast<std::size_t>(pair)],
                       topo_->pair_v[static_cast<std::size_t>(pair)]};
  for (int v : ends) {
    const std::size_t base = static_cast<std::size_t>(v) * width;
    if (before >= 0 && before <= capacity_) --node_hist_[base + before];
    if (after >= 0 && after <= capacity_) ++node_hist_[base + after];
  }
  if (before >= 0 && before <= capacity_) --link_hist_[static_cast<std::size_t>(before)];
  if (after >= 0 && after <= capacity_) ++link_hist_[static_cast<std::size_t>(after)];
}

void NetworkState::add_calls(std::size_t route_id, int delta) {
  counts_[route_id] += delta;
  total_ += delta;
  index_.add(route_id, delta);
  const auto pairs = static_cast<std::size_t>(topo_->pair_count);
  if (route_id < pairs) {
    shift_load(static_cast<int>(route_id), delta);
    return;
  }
  const std::size_t rest = route_id - pairs;
  const std::size_t pair = rest / static_cast<std::size_t>(n());
  const int via = static_cast<int>(rest % static_cast<std::size_t>(n()));
  shift_load(topo_->link(topo_->pair_u[pair], via), delta);
  shift_load(topo_->link(via, topo_->pair_v[pair]), delta);
}

std::vector<int> NetworkState::recomputed_loads() const {
  const int nn = n();
  const auto pairs = static_cast<std::size_t>(topo_->pair_count);
  std::vector<int> loads(counts_.begin(), counts_.begin() + static_cast<std::ptrdiff_t>(pairs));
  for (std::size_t p = 0; p < pairs; ++p) {
    const int u = topo_->pair_u[p];
    const int v = topo_->pair_v[p];
    for (int w = 0; w < nn; ++w) {
      if (w == u || w == v) continue;
      const int c = counts_[pairs + p * static_cast<std::size_t>(nn) + static_cast<std::size_t>(w)];
      if (c == 0) continue;
      loads[static_cast<std::size_t>(topo_->link(u, w))] += c;
      loads[static_cast<std::size_t>(topo_->link(w, v))] += c;
    }
  }
  return loads;
}

void NetworkState::recompute_caches() {
  load_ = recomputed_loads();
  const int width = capacity_ + 1;
  node_hist_.assign(static_cast<std::size_t>(n()) * width, 0);
  link_hist_.assign(static_cast<std::size_t>(width), 0);
  for (std::size_t p = 0; p < load_.size(); ++p) {
    const int l = load_[p];
    if (l < 0 || l > capacity_) continue;
    ++node_hist_[static_cast<std::size_t>(topo_->pair_u[p]) * width + l];
    ++node_hist_[static_cast<std::size_t>(topo_->pair_v[p]) * width + l];
    ++link_hist_[static_cast<std::size_t>(l)];
  }
  total_ = 0;
  index_ = FenwickTree(counts_.size());
  for (std::size_t r = 0; r < counts_.size(); ++r) {
    if (counts_[r] != 0) {
      index_.add(r, counts_[r]);
      total_ += counts_[r];
    }
  }
}

std::vector<Violation> validate(const NetworkState& state) {
  std::vector<Violation> out;
  const Topology& topo = state.topology();
  const int n = state.n();
  const int C = state.capacity();
  const auto pairs = static_cast<std::size_t>(topo.pair_count);

  for (std::size_t r = 0; r < state.route_id_count(); ++r) {
    const int c = state.route_calls(r);
    if (r >= pairs) {
      const Route route = state.route(r);
      if (route.via == route.endpoints.u || route.via == route.endpoints.v) {
        if (c != 0) {
          out.push_back({"diagonal", "path with intermediate equal to an endpoint carries calls"});
        }
        continue;
      }
    }
    if (c < 0) out.push_back({"negative", state.route(r).describe() + " has count " + std::to_string(c)});
  }

  const std::vector<int> loads = state.recomputed_loads();
  std::int64_t total = 0;
  for (std::size_t r = 0; r < state.route_id_count(); ++r) total += state.route_calls(r);
  for (std::size_t p = 0; p < pairs; ++p) {
    const std::string where = "link {" + std::to_string(topo.pair_u[p] + 1) + "," +
                              std::to_string(topo.pair_v[p] + 1) + "}";
    if (loads[p] > C) {
      out.push_back({"capacity", where + " load " + std::to_string(loads[p]) + " exceeds " + std::to_string(C)});
    }
    if (loads[p] != state.load(static_cast<int>(p))) {
      out.push_back({"cache", where + " cached load differs from recomputed load"});
    }
  }
  if (total != state.total_calls()) out.push_back({"total", "cached call total differs from the sum of counts"});
  if (total > state.capacity() * static_cast<std::int64_t>(pairs)) {
    out.push_back({"total", "more calls than C * binom(n,2)"});
  }
  for (int v = 0; v < n; ++v) {
    std::int64_t row = 0;
    for (int j = 0; j <= C; ++j) row += state.node_load_count(v, j);
    if (row != n - 1 && out.empty()) {
      out.push_back({"cache", "node " + std::to_string(v + 1) + " load histogram does not sum to n-1"});
    }
  }
  return out;
}

std::vector<Route> canonical_call_list(const NetworkState& state) {
  std::vector<Route> calls;
  calls.reserve(static_cast<std::size_t>(state.total_calls()));
  for (std::size_t r = 0; r < state.route_id_count(); ++r) {
    const int c = state.route_calls(r);
    if (c <= 0) continue;
    const Route route = state.route(r);
    calls.insert(calls.end(), static_cast<std::size_t>(c), route);
  }
  return calls;
}

NetworkState full_state(int n, int C) {
  NetworkState state(n, C);
  for (int p = 0; p < state.pair_count(); ++p) state.add_calls(state.direct_route_id(p), C);
  return state;
}

}  // namespace bdar
