#include "bdar/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "bdar/replicas.hpp"

namespace bdar {

namespace {

void require_compatible(const NetworkState& x, const NetworkState& y) {
  if (x.n() != y.n() || x.capacity() != y.capacity()) {
    throw std::invalid_argument("states have different (n, C)");
  }
}

void require_node(const NetworkState& s, int v) {
  if (v < 0 || v >= s.n()) throw std::invalid_argument("node index out of range");
}

bool route_touches(const Route& r, int v) { return r.endpoints.u == v || r.endpoints.v == v || r.via == v; }

}  // namespace

CoupledPair::CoupledPair(NetworkState x, NetworkState y) : x_(std::move(x)), y_(std::move(y)) {
  require_compatible(x_, y_);
  const std::size_t routes = x_.route_id_count();
  matched_.assign(routes, 0);
  ex_.assign(routes, 0);
  ey_.assign(routes, 0);
  matched_index_ = FenwickTree(routes);
  ex_index_ = FenwickTree(routes);
  ey_index_ = FenwickTree(routes);
  for (std::size_t r = 0; r < routes; ++r) refresh(r);
}

void CoupledPair::refresh(std::size_t r) {
  const int xr = x_.route_calls(r);
  const int yr = y_.route_calls(r);
  const int m = std::min(xr, yr);
  const int a = xr - m;
  const int b = yr - m;
  if (m != matched_[r]) {
    matched_index_.add(r, m - matched_[r]);
    matched_total_ += m - matched_[r];
    matched_[r] = m;
  }
  if (a != ex_[r]) {
    ex_index_.add(r, a - ex_[r]);
    excess_x_total_ += a - ex_[r];
    ex_[r] = a;
  }
  if (b != ey_[r]) {
    ey_index_.add(r, b - ey_[r]);
    excess_y_total_ += b - ey_[r];
    ey_[r] = b;
  }
}

void CoupledPair::add_x(std::size_t route_id, int delta) {
  x_.add_calls(route_id, delta);
  refresh(route_id);
}

void CoupledPair::add_y(std::size_t route_id, int delta) {
  y_.add_calls(route_id, delta);
  refresh(route_id);
}

void CoupledPair::apply(const Event& event, RoutingVariant variant) {
  if (event.type == EventType::Arrival) {
    const ArrivalEvent& a = event.arrival;
    auto route_id = [&](const NetworkState& s, const RouteDecision& d) -> std::int64_t {
      switch (d.kind) {
        case RouteDecision::Kind::Direct:
          return static_cast<std::int64_t>(s.direct_route_id(a.pair));
        case RouteDecision::Kind::Indirect:
          return static_cast<std::int64_t>(s.indirect_route_id(a.pair, d.via));
        case RouteDecision::Kind::Blocked:
          break;
      }
      return -1;
    };
    const std::int64_t rx = route_id(x_, route(variant, x_, a));
    const std::int64_t ry = route_id(y_, route(variant, y_, a));
    if (rx >= 0) add_x(static_cast<std::size_t>(rx), +1);
    if (ry >= 0) add_y(static_cast<std::size_t>(ry), +1);
    return;
  }

  std::int64_t k = event.slot;
  if (k < 1) return;
  if (k <= matched_total_) {
    const std::size_t r = matched_index_.find_kth(k);
    add_x(r, -1);
    add_y(r, -1);
    return;
  }
  k -= matched_total_;
  const std::int64_t paired = std::min(excess_x_total_, excess_y_total_);
  if (k <= paired) {
    const std::size_t rx = ex_index_.find_kth(k);
    const std::size_t ry = ey_index_.find_kth(k);
    add_x(rx, -1);
    add_y(ry, -1);
    return;
  }
  k -= paired;
  if (k <= std::abs(excess_x_total_ - excess_y_total_)) {
    if (excess_x_total_ > excess_y_total_) {
      add_x(ex_index_.find_kth(paired + k), -1);
    } else {
      add_y(ey_index_.find_kth(paired + k), -1);
    }
  }
}

void CoupledPair::step(const ModelParams& params, Rng& rng, RoutingVariant variant) {
  sample_event(params, rng, event_);
  apply(event_, variant);
}

std::int64_t l1_distance(const NetworkState& x, const NetworkState& y) {
  require_compatible(x, y);
  std::int64_t total = 0;
  for (std::size_t r = 0; r < x.route_id_count(); ++r) total += std::abs(x.route_calls(r) - y.route_calls(r));
  return total;
}

std::int64_t node_distance(const NetworkState& x, const NetworkState& y, int v) {
  require_compatible(x, y);
  require_node(x, v);
  std::int64_t total = 0;
  for (std::size_t r = 0; r < x.route_id_count(); ++r) {
    const int diff = std::abs(x.route_calls(r) - y.route_calls(r));
    if (diff != 0 && route_touches(x.route(r), v)) total += diff;
  }
  return total;
}

WeightedDistance weighted_distance(const NetworkState& x, const NetworkState& y) {
  require_compatible(x, y);
  const int C = x.capacity();
  const auto pairs = static_cast<std::size_t>(x.pair_count());
  WeightedDistance out;
  std::int64_t indirect = 0;
  for (std::size_t r = pairs; r < x.route_id_count(); ++r) indirect += std::abs(x.route_calls(r) - y.route_calls(r));
  out.value = (4 * C + 1) * indirect;
  for (int p = 0; p < x.pair_count(); ++p) {
    if (x.load(p) != y.load(p)) {
      out.unbalanced.push_back(p);
      out.value += C - std::min(x.load(p), y.load(p));
    }
  }
  return out;
}

std::int64_t weighted_node_distance(const NetworkState& x, const NetworkState& y, int v) {
  require_compatible(x, y);
  require_node(x, v);
  const int C = x.capacity();
  const auto pairs = static_cast<std::size_t>(x.pair_count());
  std::int64_t indirect = 0;
  for (std::size_t r = pairs; r < x.route_id_count(); ++r) {
    const int diff = std::abs(x.route_calls(r) - y.route_calls(r));
    if (diff != 0 && route_touches(x.route(r), v)) indirect += diff;
  }
  std::int64_t value = (4 * C + 1) * indirect;
  for (int u = 0; u < x.n(); ++u) {
    if (u == v) continue;
    const int lx = x.load(u, v);
    const int ly = y.load(u, v);
    if (lx != ly) value += C - std::min(lx, ly);
  }
  return value;
}

CallAccounting call_accounting(const NetworkState& x, const NetworkState& y) {
  require_compatible(x, y);
  CallAccounting acc;
  const auto pairs = static_cast<std::size_t>(x.pair_count());
  for (int p = 0; p < x.pair_count(); ++p) {
    const int lx = x.load(p);
    const int ly = y.load(p);
    if (lx != ly) ++acc.a;
    const int dx = x.direct(p) - y.direct(p);
    if (dx > 0 && lx <= ly) acc.c += dx;
    if (dx < 0 && ly <= lx) acc.c += -dx;
  }
  for (std::size_t r = pairs; r < x.route_id_count(); ++r) acc.b += std::abs(x.route_calls(r) - y.route_calls(r));
  return acc;
}

DistanceReport distance_report(const NetworkState& x, const NetworkState& y) {
  DistanceReport rep;
  rep.l1 = l1_distance(x, y);
  rep.weighted = weighted_distance(x, y).value;
  rep.accounting = call_accounting(x, y);
  for (int v = 0; v < x.n(); ++v) {
    rep.per_node.push_back(node_distance(x, y, v));
    rep.weighted_per_node.push_back(weighted_node_distance(x, y, v));
  }
  return rep;
}

bool in_R(const NetworkState& state, const ModelParams& params) {
  const std::int64_t k = 60LL * params.C * params.d;
  const std::int64_t need = static_cast<std::int64_t>(state.n() - 1) * (k - 1);
  for (int v = 0; v < state.n(); ++v) {
    if (k * state.node_load_count(v, state.capacity()) < need) return false;
  }
  return true;
}

std::optional<std::int64_t> coalescence_experiment(const ModelParams& params, const NetworkState& x0,
                                                   const NetworkState& y0, std::int64_t max_steps, Rng rng,
                                                   RoutingVariant variant) {
  CoupledPair pair(x0, y0);
  if (pair.coalesced()) return 0;
  for (std::int64_t t = 1; t <= max_steps; ++t) {
    pair.step(params, rng, variant);
    if (pair.coalesced()) return t;
  }
  return std::nullopt;
}

CoalescenceSummary coalescence_replicas(const ModelParams& params, const NetworkState& x0,
                                        const NetworkState& y0, std::int64_t max_steps, int replicas,
                                        std::uint64_t seed, int threads) {
  if (replicas < 1) throw std::invalid_argument("replicas must be positive");
  CoalescenceSummary out;
  out.times.resize(static_cast<std::size_t>(replicas));
  const Rng root(seed);
  for_each_replica(replicas, threads, [&](std::int64_t i) {
    out.times[static_cast<std::size_t>(i)] =
        coalescence_experiment(params, x0, y0, max_steps, root.split(static_cast<std::uint64_t>(i)));
  });
  std::vector<double> sorted;
  for (const auto& t : out.times) {
    if (t) ++out.coalesced;
    sorted.push_back(t ? static_cast<double>(*t) : INFINITY);
  }
  out.coalesced_fraction = static_cast<double>(out.coalesced) / replicas;
  if (out.coalesced_fraction >= 0.9) {
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size() / 2;
    out.median = sorted.size() % 2 ? sorted[m] : 0.5 * (sorted[m - 1] + sorted[m]);
  }
  return out;
}

double theoretical_contraction_factor(const ModelParams& params) {
  return 1.0 - (1.0 - (8.0 * params.d + 4.0) * params.lambda) /
                   ((params.lambda + params.C) * static_cast<double>(params.pair_count()));
}

DistanceOnePairs::DistanceOnePairs(const ModelParams& params, Rng rng, std::int64_t warmup_steps,
                                   std::int64_t spacing_steps)
    : params_(params),
      chain_(params, NetworkState(params.n, params.C), rng.split(0)),
      pick_(rng.split(1)),
      spacing_(std::max<std::int64_t>(1, spacing_steps)) {
  chain_.run(warmup_steps);
}

std::pair<NetworkState, NetworkState> DistanceOnePairs::next() {
  chain_.run(spacing_);
  const NetworkState& x = chain_.state();
  const int C = x.capacity();
  const Topology& topo = x.topology();
  std::vector<std::size_t> feasible;
  for (int p = 0; p < x.pair_count(); ++p) {
    if (x.load(p) < C) feasible.push_back(x.direct_route_id(p));
    const int u = topo.pair_u[static_cast<std::size_t>(p)];
    const int v = topo.pair_v[static_cast<std::size_t>(p)];
    for (int w = 0; w < x.n(); ++w) {
      if (w == u || w == v) continue;
      if (x.load(u, w) < C && x.load(w, v) < C) feasible.push_back(x.indirect_route_id(p, w));
    }
  }
  if (feasible.empty()) throw std::logic_error("no feasible call can be added to the sampled state");
  NetworkState y = x;
  y.add_calls(feasible[pick_.uniform_index(feasible.size())], +1);
  if (l1_distance(x, y) != 1) throw std::logic_error("pair generator produced a pair not at distance 1");
  return {x, std::move(y)};
}

ContractionEstimate contraction_estimate(const ModelParams& params, std::int64_t trials, std::uint64_t seed,
                                         bool keep_records) {
  if (trials < 2) throw std::invalid_argument("contraction estimate needs at least two trials");
  const Rng root(seed);
  DistanceOnePairs pairs(params, root.split(0), steps_for_time(params, 20.0), params.pair_count());
  Rng step_rng = root.split(1);
  ContractionEstimate est;
  est.theoretical_factor = theoretical_contraction_factor(params);
  est.trials = trials;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::int64_t t = 0; t < trials; ++t) {
    auto [x, y] = pairs.next();
    CoupledPair pair(std::move(x), std::move(y));
    const std::int64_t pre = pair.l1();
    pair.step(params, step_rng);
    const double ratio = static_cast<double>(pair.l1()) / static_cast<double>(pre);
    sum += ratio;
    sum_sq += ratio * ratio;
    if (keep_records) est.records.push_back({pre, pair.l1()});
  }
  const double n = static_cast<double>(trials);
  est.mean_ratio = sum / n;
  const double var = std::max(0.0, (sum_sq - n * est.mean_ratio * est.mean_ratio) / (n - 1.0));
  est.standard_error = std::sqrt(var / n);
  est.ci_low = est.mean_ratio - 1.96 * est.standard_error;
  est.ci_high = est.mean_ratio + 1.96 * est.standard_error;
  return est;
}

}  // namespace bdar
