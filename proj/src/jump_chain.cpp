#include "bdar/jump_chain.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace bdar {

std::string to_string(RoutingVariant variant) {
  return variant == RoutingVariant::Bdar ? "bdar" : "fdar";
}

RoutingVariant parse_variant(const std::string& name) {
  if (name == "bdar") return RoutingVariant::Bdar;
  if (name == "fdar") return RoutingVariant::Fdar;
  throw std::invalid_argument("unknown routing variant '" + name + "' (expected bdar or fdar)");
}

std::string RouteDecision::describe() const {
  switch (kind) {
    case Kind::Direct:
      return "direct";
    case Kind::Indirect:
      return "indirect:" + std::to_string(via + 1) + ":" + std::to_string(position);
    case Kind::Blocked:
      return "blocked";
  }
  return "?";
}

namespace {

const Topology& topology_for(int n) {
  thread_local std::shared_ptr<const Topology> cached;
  if (!cached || cached->n != n) cached = Topology::get(n);
  return *cached;
}

}  // namespace

void sample_event(const ModelParams& params, Rng& rng, Event& event) {
  if (rng.bernoulli(params.arrival_probability())) {
    const Topology& topo = topology_for(params.n);
    event.type = EventType::Arrival;
    ArrivalEvent& a = event.arrival;
    a.pair = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(topo.pair_count)));
    a.u = topo.pair_u[static_cast<std::size_t>(a.pair)];
    a.v = topo.pair_v[static_cast<std::size_t>(a.pair)];
    a.via.resize(static_cast<std::size_t>(params.d));
    for (int& w : a.via) {
      w = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(params.n - 2)));
      if (w >= a.u) ++w;
      if (w >= a.v) ++w;
    }
    event.slot = 0;
  } else {
    event.type = EventType::Departure;
    event.slot = 1 + static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(params.slot_count())));
  }
}

Event sample_event(const ModelParams& params, Rng& rng) {
  Event event;
  sample_event(params, rng, event);
  return event;
}

RouteDecision route_bdar(const NetworkState& state, const ArrivalEvent& arrival) {
  const int C = state.capacity();
  if (state.load(arrival.pair) < C) return RouteDecision::direct();
  int best_load = C;
  int best = -1;
  for (std::size_t r = 0; r < arrival.via.size(); ++r) {
    const int w = arrival.via[r];
    const int a = state.load(arrival.u, w);
    const int b = state.load(w, arrival.v);
    if (a >= C || b >= C) continue;
    const int m = std::max(a, b);
    if (m < best_load) {
      best_load = m;
      best = static_cast<int>(r);
    }
  }
  if (best < 0) return RouteDecision::blocked();
  return RouteDecision::indirect(arrival.via[static_cast<std::size_t>(best)], best + 1);
}

RouteDecision route_fdar(const NetworkState& state, const ArrivalEvent& arrival) {
  const int C = state.capacity();
  if (state.load(arrival.pair) < C) return RouteDecision::direct();
  for (std::size_t r = 0; r < arrival.via.size(); ++r) {
    const int w = arrival.via[r];
    if (state.load(arrival.u, w) < C && state.load(w, arrival.v) < C) {
      return RouteDecision::indirect(w, static_cast<int>(r) + 1);
    }
  }
  return RouteDecision::blocked();
}

RouteDecision route(RoutingVariant variant, const NetworkState& state, const ArrivalEvent& arrival) {
  return variant == RoutingVariant::Bdar ? route_bdar(state, arrival) : route_fdar(state, arrival);
}

namespace {

void verify_decision(const NetworkState& state, const ArrivalEvent& arrival, const RouteDecision& decision) {
  const int C = state.capacity();
  const bool direct_free = state.load(arrival.pair) < C;
  auto leg_free = [&](int w) { return state.load(arrival.u, w) < C && state.load(w, arrival.v) < C; };
  switch (decision.kind) {
    case RouteDecision::Kind::Direct:
      if (!direct_free) throw std::logic_error("direct routing onto a fully loaded link");
      return;
    case RouteDecision::Kind::Indirect: {
      if (direct_free) throw std::logic_error("indirect routing while the direct link has spare capacity");
      if (decision.position < 1 || decision.position > static_cast<int>(arrival.via.size()) ||
          arrival.via[static_cast<std::size_t>(decision.position - 1)] != decision.via) {
        throw std::logic_error("indirect decision does not match the candidate list");
      }
      if (!leg_free(decision.via)) throw std::logic_error("indirect routing over a fully loaded leg");
      return;
    }
    case RouteDecision::Kind::Blocked:
      if (direct_free) throw std::logic_error("call blocked although the direct link is free");
      for (int w : arrival.via) {
        if (leg_free(w)) throw std::logic_error("call blocked although an alternative route is free");
      }
      return;
  }
}

}  // namespace

void apply_arrival(NetworkState& state, const ArrivalEvent& arrival, const RouteDecision& decision, bool verify) {
  if (verify) verify_decision(state, arrival, decision);
  switch (decision.kind) {
    case RouteDecision::Kind::Direct:
      state.add_calls(state.direct_route_id(arrival.pair), +1);
      break;
    case RouteDecision::Kind::Indirect:
      state.add_calls(state.indirect_route_id(arrival.pair, decision.via), +1);
      break;
    case RouteDecision::Kind::Blocked:
      break;
  }
}

std::int64_t apply_departure(NetworkState& state, std::int64_t slot) {
  if (slot < 1 || slot > state.total_calls()) return -1;
  const std::size_t route_id = state.route_of_call(slot);
  state.add_calls(route_id, -1);
  return static_cast<std::int64_t>(route_id);
}

TransitionRecord step(NetworkState& state, const ModelParams& params, Rng& rng, RoutingVariant variant,
                      Event& scratch, bool verify) {
  TransitionRecord record;
  record.calls_before = state.total_calls();
  sample_event(params, rng, scratch);
  record.type = scratch.type;
  if (scratch.type == EventType::Arrival) {
    record.decision = route(variant, state, scratch.arrival);
    apply_arrival(state, scratch.arrival, record.decision, verify);
    record.noop = record.decision.kind == RouteDecision::Kind::Blocked;
  } else {
    record.departed_route = apply_departure(state, scratch.slot);
    record.noop = record.departed_route < 0;
  }
  record.calls_after = state.total_calls();
  return record;
}

std::int64_t steps_for_time(const ModelParams& params, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("time must be nonnegative");
  return std::llround(t * (params.lambda + params.C) * static_cast<double>(params.pair_count()));
}

JumpChain::JumpChain(const ModelParams& params, NetworkState initial, Rng rng, RoutingVariant variant)
    : params_(params), state_(std::move(initial)), rng_(rng), variant_(variant) {
  if (state_.n() != params.n || state_.capacity() != params.C) {
    throw std::invalid_argument("initial state does not match the model parameters");
  }
}

const TransitionRecord& JumpChain::step() {
  last_ = bdar::step(state_, params_, rng_, variant_, event_, verify_);
  ++steps_;
  if (last_.type == EventType::Arrival) {
    ++arrivals_;
    if (last_.decision.kind == RouteDecision::Kind::Blocked) ++blocked_;
  }
  return last_;
}

void JumpChain::run(std::int64_t steps) {
  for (std::int64_t i = 0; i < steps; ++i) step();
}

TrajectoryLog::TrajectoryLog(std::ostream& out) : out_(out) { out_ << "step,event_type,decision,N\n"; }

void TrajectoryLog::record(std::int64_t step, const TransitionRecord& record) {
  out_ << step << ',';
  if (record.type == EventType::Arrival) {
    out_ << "arrival," << record.decision.describe();
  } else {
    out_ << "departure," << (record.noop ? "noop" : "depart");
  }
  out_ << ',' << record.calls_after << '\n';
}

}  // namespace bdar
