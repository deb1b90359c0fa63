#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bdar/params.hpp"
#include "bdar/rng.hpp"
#include "bdar/state.hpp"

namespace bdar {

enum class RoutingVariant { Bdar, Fdar };

std::string to_string(RoutingVariant variant);
RoutingVariant parse_variant(const std::string& name);

/// Endpoints of an arriving call plus its ordered list of d candidate
/// intermediates, drawn with replacement from the other n-2 nodes.
struct ArrivalEvent {
  int pair = 0;
  int u = 0;
  int v = 0;
  std::vector<int> via;
};

enum class EventType { Arrival, Departure };

struct Event {
  EventType type = EventType::Arrival;
  ArrivalEvent arrival;
  std::int64_t slot = 0;  // 1-based, meaningful for departures
};

struct RouteDecision {
  enum class Kind { Direct, Indirect, Blocked };
  Kind kind = Kind::Blocked;
  int via = -1;
  int position = 0;  // 1-based index into the candidate list

  static RouteDecision direct() { return {Kind::Direct, -1, 0}; }
  static RouteDecision indirect(int via, int position) { return {Kind::Indirect, via, position}; }
  static RouteDecision blocked() { return {Kind::Blocked, -1, 0}; }

  bool operator==(const RouteDecision&) const = default;
  std::string describe() const;
};

struct TransitionRecord {
  EventType type = EventType::Arrival;
  RouteDecision decision;
  std::int64_t departed_route = -1;  // route id, or -1 for a lazy step
  bool noop = false;
  std::int64_t calls_before = 0;
  std::int64_t calls_after = 0;
};

/// Fills `event` in place. Randomness is consumed in a fixed order: event
/// type, then endpoints and intermediates (arrival) or the slot (departure).
void sample_event(const ModelParams& params, Rng& rng, Event& event);
Event sample_event(const ModelParams& params, Rng& rng);

/// Direct if the link has spare capacity; otherwise the feasible candidate
/// minimising the larger leg load, earliest position on ties.
RouteDecision route_bdar(const NetworkState& state, const ArrivalEvent& arrival);
/// Direct if possible; otherwise the first candidate with both legs free.
RouteDecision route_fdar(const NetworkState& state, const ArrivalEvent& arrival);
RouteDecision route(RoutingVariant variant, const NetworkState& state, const ArrivalEvent& arrival);

/// With verify set, throws std::logic_error when the decision is infeasible
/// or contradicts the state (direct taken over a full link, blocked with a
/// free alternative, ...).
void apply_arrival(NetworkState& state, const ArrivalEvent& arrival, const RouteDecision& decision,
                   bool verify = false);

/// Removes the slot-th canonical call if slot <= total calls; otherwise a
/// no-op. Returns the departed route id or -1.
std::int64_t apply_departure(NetworkState& state, std::int64_t slot);

TransitionRecord step(NetworkState& state, const ModelParams& params, Rng& rng,
                      RoutingVariant variant, Event& scratch, bool verify = false);

/// round(t (lambda + C) binom(n,2)); throws std::invalid_argument for t < 0.
std::int64_t steps_for_time(const ModelParams& params, double t);

/// Single jump chain with arrival/blocking counters.
class JumpChain {
 public:
  JumpChain(const ModelParams& params, NetworkState initial, Rng rng,
            RoutingVariant variant = RoutingVariant::Bdar);

  const TransitionRecord& step();
  void run(std::int64_t steps);

  const NetworkState& state() const { return state_; }
  const ModelParams& params() const { return params_; }
  std::int64_t steps_taken() const { return steps_; }
  std::int64_t arrivals() const { return arrivals_; }
  std::int64_t blocked() const { return blocked_; }
  void reset_counters() { arrivals_ = 0; blocked_ = 0; }
  void set_verify(bool verify) { verify_ = verify; }

 private:
  ModelParams params_;
  NetworkState state_;
  Rng rng_;
  RoutingVariant variant_;
  Event event_;
  TransitionRecord last_;
  std::int64_t steps_ = 0;
  std::int64_t arrivals_ = 0;
  std::int64_t blocked_ = 0;
  bool verify_ = false;
};

/// CSV trajectory log: step,event_type,decision,N.
class TrajectoryLog {
 public:
  explicit TrajectoryLog(std::ostream& out);
  void record(std::int64_t step, const TransitionRecord& record);

 private:
  std::ostream& out_;
};

}  // namespace bdar
