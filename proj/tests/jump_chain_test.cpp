#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bdar/jump_chain.hpp"
#include "test_support.hpp"

using namespace bdar;
using bdar::testing::add_direct;
using bdar::testing::add_indirect;

namespace {

ArrivalEvent arrival(int u, int v, std::vector<int> via) {
  ArrivalEvent a;
  a.u = std::min(u, v);
  a.v = std::max(u, v);
  a.pair = Topology::get(4)->link(a.u, a.v);
  a.via = std::move(via);
  return a;
}

}  // namespace

TEST(SampleEvent, ArrivalFrequencyMatchesProbability) {
  const auto p = ModelParams::make(6, 1, 2, 0.5);
  Rng rng(3);
  const int draws = 1000000;
  int arrivals = 0;
  Event e;
  for (int i = 0; i < draws; ++i) {
    sample_event(p, rng, e);
    if (e.type == EventType::Arrival) {
      ++arrivals;
      ASSERT_EQ(e.arrival.via.size(), 2u);
      for (int w : e.arrival.via) {
        ASSERT_NE(w, e.arrival.u);
        ASSERT_NE(w, e.arrival.v);
      }
    } else {
      ASSERT_GE(e.slot, 1);
      ASSERT_LE(e.slot, p.slot_count());
    }
  }
  const double q = p.arrival_probability();
  const double se = std::sqrt(q * (1 - q) / draws);
  EXPECT_NEAR(static_cast<double>(arrivals) / draws, q, 3 * se);
}

TEST(RouteBdar, EmptyStateGoesDirect) {
  NetworkState s(4, 1);
  EXPECT_EQ(route_bdar(s, arrival(0, 1, {2})), RouteDecision::direct());
  EXPECT_EQ(route_fdar(s, arrival(0, 1, {2})), RouteDecision::direct());
}

TEST(RouteBdar, SkipsInfeasibleCandidate) {
  // C=1: uv full, candidate 1 has legs (1,0), candidate 2 has legs (0,0)
  NetworkState s(4, 1);
  add_direct(s, 0, 1);
  add_direct(s, 0, 2);
  const auto a = arrival(0, 1, {2, 3});
  EXPECT_EQ(route_bdar(s, a), RouteDecision::indirect(3, 2));
  EXPECT_EQ(route_fdar(s, a), RouteDecision::indirect(3, 2));
}

TEST(RouteBdar, TiesGoToEarliestPosition) {
  // C=2: uv full, both candidates have larger leg load 1
  NetworkState s(4, 2);
  add_direct(s, 0, 1, 2);
  add_direct(s, 0, 2);
  add_direct(s, 1, 3);
  EXPECT_EQ(route_bdar(s, arrival(0, 1, {2, 3})), RouteDecision::indirect(2, 1));
}

TEST(RouteFdar, IgnoresBalance) {
  // candidate 1 larger leg load 1, candidate 2 larger leg load 0
  NetworkState s(4, 2);
  add_direct(s, 0, 1, 2);
  add_direct(s, 0, 2);
  const auto a = arrival(0, 1, {2, 3});
  EXPECT_EQ(route_fdar(s, a), RouteDecision::indirect(2, 1));
  EXPECT_EQ(route_bdar(s, a), RouteDecision::indirect(3, 2));
}

TEST(RouteBdar, BlockedWhenNothingFits) {
  NetworkState s = full_state(4, 1);
  EXPECT_EQ(route_bdar(s, arrival(0, 1, {2, 3})), RouteDecision::blocked());
  EXPECT_EQ(RouteDecision::blocked().describe(), "blocked");
  EXPECT_EQ(RouteDecision::indirect(2, 1).describe(), "indirect:3:1");
}

TEST(ApplyArrival, UpdatesLoads) {
  NetworkState s(4, 1);
  apply_arrival(s, arrival(0, 1, {2}), RouteDecision::direct(), true);
  EXPECT_EQ(s.direct_count(Link::of(0, 1)), 1);
  apply_arrival(s, arrival(0, 1, {2}), RouteDecision::blocked(), false);
  EXPECT_EQ(s.total_calls(), 1);
  apply_arrival(s, arrival(0, 2, {1}), RouteDecision::indirect(1, 1), false);
  EXPECT_EQ(s.link_load(Link::of(0, 1)), 2);
  EXPECT_EQ(s.link_load(Link::of(1, 2)), 1);
}

TEST(ApplyArrival, VerifyRejectsWrongDecisions) {
  NetworkState s(4, 1);
  add_direct(s, 0, 1);
  EXPECT_THROW(apply_arrival(s, arrival(0, 1, {2}), RouteDecision::direct(), true), std::logic_error);
  EXPECT_THROW(apply_arrival(s, arrival(0, 1, {2}), RouteDecision::blocked(), true), std::logic_error);
}

TEST(ApplyDeparture, LazySlotsAndRemoval) {
  NetworkState s(4, 1);
  EXPECT_EQ(apply_departure(s, 1), -1);
  add_direct(s, 2, 3);
  EXPECT_EQ(apply_departure(s, 2), -1);
  EXPECT_EQ(s.total_calls(), 1);
  EXPECT_GE(apply_departure(s, 1), 0);
  EXPECT_EQ(s.total_calls(), 0);
}

TEST(ApplyDeparture, RemovesTheCanonicalCall) {
  NetworkState s(4, 1);
  add_indirect(s, 0, 2, 1);
  add_direct(s, 2, 3);
  const std::size_t id = s.route_of_call(2);
  EXPECT_EQ(apply_departure(s, 2), static_cast<std::int64_t>(id));
  EXPECT_EQ(s.indirect_count(Route::indirect(0, 2, 1)), 0);
}

TEST(ApplyDeparture, NoOpFrequencyMatchesOccupancy) {
  const auto p = ModelParams::make(5, 2, 1, 1.0);
  NetworkState s(5, 2);
  add_direct(s, 0, 1, 2);
  add_direct(s, 2, 3);
  Rng rng(5);
  const int draws = 200000;
  int noops = 0;
  for (int i = 0; i < draws; ++i) {
    NetworkState t = s;
    if (apply_departure(t, 1 + static_cast<std::int64_t>(rng.uniform_index(p.slot_count()))) < 0) ++noops;
  }
  const double q = 1.0 - 3.0 / 20.0;
  EXPECT_NEAR(static_cast<double>(noops) / draws, q, 4 * std::sqrt(q * (1 - q) / draws));
}

TEST(JumpChain, InvariantsHoldAlongTrajectory) {
  const auto p = ModelParams::make(10, 1, 1, 0.05);
  JumpChain chain(p, NetworkState(10, 1), Rng(17));
  chain.set_verify(true);
  for (int i = 0; i < 1000000; ++i) {
    chain.step();
    ASSERT_LE(chain.state().total_calls(), p.slot_count());
    if (i % 1000 == 0) ASSERT_TRUE(validate(chain.state()).empty()) << "step " << i;
  }
  EXPECT_TRUE(validate(chain.state()).empty());
  EXPECT_GT(chain.arrivals(), 0);
}

TEST(JumpChain, InvariantsHoldWithAlternatives) {
  const auto p = ModelParams::make(6, 2, 2, 3.0);
  for (auto variant : {RoutingVariant::Bdar, RoutingVariant::Fdar}) {
    JumpChain chain(p, NetworkState(6, 2), Rng(2), variant);
    chain.set_verify(true);
    for (int i = 0; i < 100000; ++i) {
      chain.step();
      ASSERT_TRUE(validate(chain.state()).empty());
    }
    EXPECT_GT(chain.blocked(), 0);
  }
}

TEST(JumpChain, FirstStepFromEmptyIsDirectArrival) {
  const auto p = ModelParams::make(5, 1, 1, 4.0);
  const int reps = 20000;
  int direct = 0;
  for (int i = 0; i < reps; ++i) {
    JumpChain chain(p, NetworkState(5, 1), Rng(1000 + i));
    const auto& r = chain.step();
    if (r.type == EventType::Arrival && r.decision == RouteDecision::direct()) ++direct;
  }
  const double q = p.arrival_probability();
  EXPECT_NEAR(static_cast<double>(direct) / reps, q, 4 * std::sqrt(q * (1 - q) / reps));
}

TEST(JumpChain, SameSeedSameTrajectory) {
  const auto p = ModelParams::make(8, 2, 2, 0.7);
  JumpChain a(p, NetworkState(8, 2), Rng(99));
  JumpChain b(p, NetworkState(8, 2), Rng(99));
  a.run(50000);
  b.run(50000);
  EXPECT_EQ(a.state(), b.state());
  EXPECT_EQ(a.blocked(), b.blocked());
}

TEST(StepsForTime, Values) {
  EXPECT_EQ(steps_for_time(ModelParams::make(10, 1, 1, 1.0), 0.0), 0);
  EXPECT_EQ(steps_for_time(ModelParams::make(10, 1, 1, 1.0), 1.0), 90);
  EXPECT_EQ(steps_for_time(ModelParams::make(100, 1, 1, 0.05), 2.0), 10395);
  EXPECT_THROW(steps_for_time(ModelParams::make(10, 1, 1, 1.0), -1.0), std::invalid_argument);
}

TEST(TrajectoryLog, WritesHeaderAndRows) {
  std::ostringstream out;
  TrajectoryLog log(out);
  const auto p = ModelParams::make(4, 1, 1, 1.0);
  JumpChain chain(p, NetworkState(4, 1), Rng(1));
  for (int i = 1; i <= 3; ++i) log.record(i, chain.step());
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("step,event_type,decision,N\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

TEST(Variant, Parsing) {
  EXPECT_EQ(parse_variant("bdar"), RoutingVariant::Bdar);
  EXPECT_EQ(parse_variant("fdar"), RoutingVariant::Fdar);
  EXPECT_THROW(parse_variant("xyz"), std::invalid_argument);
}
