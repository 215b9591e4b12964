#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "test_util.hpp"
#include "tofra/allocator.hpp"
#include "tofra/phy.hpp"
#include "tofra/simulator.hpp"
#include "tofra/throughput.hpp"

using namespace tofra;

namespace {

Scenario single_link(double gamma, double eta = 7e-11) {
  Scenario s;
  s.area_w = s.area_h = 500.0;
  s.phy = PhyParams{gamma, eta, 0.1, 3.0, 1.0};
  s.nodes = {Node{0, {0.0, 0.0}, NodeRole::Source, 0.5},
             Node{1, {400.0, 0.0}, NodeRole::Sink, 0.5}};
  s.flows = {Flow{0, 0, 1, {0, 1}}};
  s.validate();
  return s;
}

Scenario chain(double gamma, double relay_q, double hop = 150.0) {
  Scenario s;
  s.area_w = 1000.0;
  s.area_h = 100.0;
  s.phy = PhyParams{gamma, 7e-11, 0.1, 3.0, 1.0};
  s.nodes = {Node{0, {0.0, 0.0}, NodeRole::Source, 0.5},
             Node{1, {hop, 0.0}, NodeRole::Relay, relay_q},
             Node{2, {2.0 * hop, 0.0}, NodeRole::Sink, 0.5}};
  s.flows = {Flow{0, 0, 2, {0, 1, 2}}};
  s.validate();
  return s;
}

SimConfig cfg(std::uint64_t slots, std::uint64_t seed) {
  SimConfig c;
  c.total_slots = slots;
  c.warmup_slots = slots / 10;
  c.seed = seed;
  return c;
}

bool metrics_equal(const SimMetrics& a, const SimMetrics& b) {
  if (a.aat != b.aat || a.flows.size() != b.flows.size()) return false;
  for (std::size_t i = 0; i < a.flows.size(); ++i) {
    const auto& x = a.flows[i];
    const auto& y = b.flows[i];
    if (x.injected != y.injected || x.delivered != y.delivered ||
        x.dropped != y.dropped || x.in_flight_end != y.in_flight_end ||
        x.throughput != y.throughput || x.mean_delay != y.mean_delay ||
        x.p95_delay != y.p95_delay)
      return false;
  }
  if (a.links.size() != b.links.size()) return false;
  for (std::size_t i = 0; i < a.links.size(); ++i)
    if (a.links[i].attempts != b.links[i].attempts ||
        a.links[i].successes != b.links[i].successes)
      return false;
  if (a.relays.size() != b.relays.size()) return false;
  for (std::size_t i = 0; i < a.relays.size(); ++i)
    if (a.relays[i].mean_queue_length != b.relays[i].mean_queue_length ||
        a.relays[i].queue_slope != b.relays[i].queue_slope)
      return false;
  return true;
}

}  // namespace

TEST_CASE("a perfect link at full rate delivers one packet per slot") {
  auto scn = single_link(1.0, /*eta=*/0.0);
  auto c = cfg(5000, 3);
  const auto m = run_simulation(scn, SourcePolicy::from_rates({1.0}), c);
  CHECK(m.flows[0].throughput == doctest::Approx(1.0));
  CHECK(m.aat == doctest::Approx(1.0));
  CHECK(m.flows[0].dropped == 0);
  CHECK(m.flows[0].mean_delay == doctest::Approx(1.0));
  CHECK(m.flows[0].p95_delay == doctest::Approx(1.0));
}

TEST_CASE("single-link throughput concentrates on access times capture") {
  const auto scn = single_link(1.0);
  const auto pos = scn.positions();
  const double p_solo =
      success_probability(0, 1, std::vector<NodeId>{0}, pos, scn.phy);
  const double expect = 0.5 * p_solo;
  const auto m =
      run_simulation(scn, SourcePolicy::from_rates({0.5}), cfg(100000, 11));
  const double se =
      std::sqrt(expect * (1.0 - expect) / static_cast<double>(m.measured_slots));
  CHECK(std::abs(m.flows[0].throughput - expect) <= 3.0 * se);
}

TEST_CASE("packet conservation holds exactly") {
  const auto scn = testutil::illustrative_scenario(1.5);
  for (bool saturated : {false, true}) {
    SimConfig c = cfg(30000, 21);
    c.saturated_relays = saturated;
    c.max_retransmits = 3;
    const auto m =
        run_simulation(scn, SourcePolicy::from_rates({0.8, 0.6}), c);
    for (const FlowStats& fs : m.flows) {
      CAPTURE(saturated);
      CHECK(fs.injected == fs.delivered + fs.dropped + fs.in_flight_end);
    }
  }
}

TEST_CASE("identical seeds give bit-identical metrics") {
  const auto scn = testutil::illustrative_scenario(1.0);
  SimConfig c = cfg(20000, 99);
  c.saturated_relays = true;
  const auto a = run_simulation(scn, SourcePolicy::from_rates({0.9, 0.4}), c);
  const auto b = run_simulation(scn, SourcePolicy::from_rates({0.9, 0.4}), c);
  CHECK(metrics_equal(a, b));

  SimConfig c2 = c;
  c2.seed = 100;
  const auto d = run_simulation(scn, SourcePolicy::from_rates({0.9, 0.4}), c2);
  CHECK_FALSE(metrics_equal(a, d));
}

TEST_CASE("saturated relays with infinite retries reproduce the analytic "
          "per-link throughput") {
  const auto scn = testutil::illustrative_scenario(1.0);
  const RateVector rates = {0.8, 0.7};
  SimConfig c = cfg(200000, 5);
  c.saturated_relays = true;
  c.max_retransmits = std::nullopt;
  const auto m = run_simulation(scn, SourcePolicy::from_rates(rates), c);

  for (const LinkStats& ls : m.links) {
    const double analytic =
        link_throughput(scn, ls.link, rates, interferer_set(scn, ls.link));
    const double measured = static_cast<double>(ls.successes) /
                            static_cast<double>(m.measured_slots);
    const double se = std::sqrt(analytic * (1.0 - analytic) /
                                static_cast<double>(m.measured_slots));
    CAPTURE(ls.link.tx);
    CAPTURE(ls.link.rx);
    CHECK(std::abs(measured - analytic) <= 3.0 * se);
  }

  // aggregate against the bottleneck expression
  const double aat_analytic = aggregate_throughput(scn, rates);
  CHECK(std::abs(m.aat - aat_analytic) / aat_analytic < 0.05);
}

TEST_CASE("dummy packets never appear in flow metrics") {
  // flow 0's source stays silent: its relay never sees a real packet and so
  // never generates dummy traffic either
  const auto scn = testutil::illustrative_scenario(0.5);
  SimConfig c = cfg(20000, 8);
  c.saturated_relays = true;
  const auto m = run_simulation(scn, SourcePolicy::from_rates({0.0, 0.5}), c);
  CHECK(m.flows[0].delivered == 0);
  CHECK(m.flows[0].injected == 1);  // only the initial head-of-line packet
  CHECK(m.links[0].attempts == 0);  // (1,2) never fired
  CHECK(m.links[1].attempts == 0);  // (2,0) has no header to clone
  CHECK(m.flows[1].delivered > 0);

  // idle links are absent from the census rather than reported at ratio 0
  const auto census = link_success_census(m);
  REQUIRE(census.size() == 1);
  CHECK(census[0].link == Link{3, 0});

  // the never-used relay queue reads as flat and stable
  const auto verdicts = queue_stability_report(m);
  REQUIRE(verdicts.size() == 1);
  CHECK(verdicts[0].slope == doctest::Approx(0.0));
  CHECK(verdicts[0].stable);
  CHECK(m.relays[0].mean_queue_length == doctest::Approx(0.0));

  // with real traffic the saturated relay fills idle slots with dummies:
  // attempts track its access probability, not the real arrival rate
  const auto m2 = run_simulation(scn, SourcePolicy::from_rates({0.3, 0.3}), c);
  const double attempt_rate = static_cast<double>(m2.links[1].attempts) /
                              static_cast<double>(m2.measured_slots);
  CHECK(attempt_rate == doctest::Approx(0.5).epsilon(0.05));
  // deliveries stay bounded by the real arrival stream
  CHECK(m2.flows[0].throughput < 0.25);
}

TEST_CASE("census ratios match the marginalized closed form") {
  const auto scn = testutil::illustrative_scenario(1.0);
  const RateVector rates = {0.6, 0.5};
  SimConfig c = cfg(150000, 13);
  c.saturated_relays = true;
  c.max_retransmits = std::nullopt;
  const auto m = run_simulation(scn, SourcePolicy::from_rates(rates), c);
  const auto census = link_success_census(m);
  REQUIRE(census.size() == 3);
  for (const CensusEntry& e : census) {
    // expected ratio: per-slot success probability divided by the
    // transmitter's access probability
    const double t = link_throughput(scn, e.link, rates,
                                     interferer_set(scn, e.link));
    const double q_tx = scn.node_q(e.link.tx, rates);
    const double expect = t / q_tx;
    CAPTURE(e.link.tx);
    CAPTURE(e.link.rx);
    CHECK(e.wilson_low - 0.01 <= expect);
    CHECK(expect <= e.wilson_high + 0.01);
    CHECK(e.ratio >= 0.0);
    CHECK(e.ratio <= 1.0);
  }
}

TEST_CASE("half-duplex: a busy receiver voids every reception") {
  // a saturated relay at probability 1 transmits in every slot once it has
  // seen a packet, so the upstream link can never complete again
  auto scn = chain(1.0, /*relay_q=*/1.0);
  SimConfig c = cfg(20000, 4);
  c.max_retransmits = std::nullopt;
  c.saturated_relays = true;
  const auto m = run_simulation(scn, SourcePolicy::from_rates({1.0}), c);
  CHECK(m.links[0].attempts > 0);
  CHECK(m.links[0].successes == 0);
}

TEST_CASE("queue stability verdicts") {
  SUBCASE("a rate respecting the delay constraint keeps the relay stable") {
    const auto scn = chain(1.0, 0.5);
    // pick the largest source rate whose first-link throughput stays under
    // the second link's
    const AllocationProblem p(scn, std::nullopt);
    const auto res = solve_grid(p, 0.01);
    SimConfig c = cfg(60000, 17);
    c.max_retransmits = std::nullopt;
    const auto m = run_simulation(scn, SourcePolicy::from_rates(res.rates), c);
    const auto verdicts = queue_stability_report(m);
    REQUIRE(verdicts.size() == 1);
    CHECK(verdicts[0].stable);
  }
  SUBCASE("overdriving the first hop grows the relay queue without bound") {
    const auto scn = chain(0.5, /*relay_q=*/0.1);
    SimConfig c = cfg(60000, 18);
    c.max_retransmits = std::nullopt;
    const auto m = run_simulation(scn, SourcePolicy::from_rates({1.0}), c);
    const auto verdicts = queue_stability_report(m);
    REQUIRE(verdicts.size() == 1);
    CHECK_FALSE(verdicts[0].stable);
    CHECK(verdicts[0].slope > 0.1);
    CHECK(m.relays[0].mean_queue_length > 100.0);
  }
}

TEST_CASE("raising the threshold never helps a link (paired seeds)") {
  const auto scn_lo = testutil::illustrative_scenario(0.5);
  const auto scn_hi = testutil::illustrative_scenario(1.5);
  const RateVector rates = {0.8, 0.5};
  const int reps = 20;
  std::vector<int> increased(3, 0);
  for (int r = 0; r < reps; ++r) {
    SimConfig c = cfg(20000, 1000 + static_cast<std::uint64_t>(r));
    c.saturated_relays = true;
    const auto lo = run_simulation(scn_lo, SourcePolicy::from_rates(rates), c);
    const auto hi = run_simulation(scn_hi, SourcePolicy::from_rates(rates), c);
    for (std::size_t l = 0; l < 3; ++l) {
      const auto ratio = [](const LinkStats& s) {
        return s.attempts ? static_cast<double>(s.successes) /
                                static_cast<double>(s.attempts)
                          : 0.0;
      };
      if (ratio(hi.links[l]) > ratio(lo.links[l])) ++increased[l];
    }
  }
  // sign test at the 5% level: 15+ increases out of 20 would reject the
  // "never helps in expectation" hypothesis
  for (std::size_t l = 0; l < 3; ++l) {
    CAPTURE(l);
    CHECK(increased[l] < 15);
  }
}

TEST_CASE("round-robin schedule drives sources in turns") {
  // two perfect single-hop links far apart; exactly one source fires per slot
  Scenario s;
  s.area_w = 10000.0;
  s.area_h = 100.0;
  s.phy = PhyParams{1.0, 0.0, 0.1, 3.0, 1.0};
  s.nodes = {Node{0, {0.0, 0.0}, NodeRole::Source, 0.5},
             Node{1, {100.0, 0.0}, NodeRole::Sink, 0.5},
             Node{2, {9000.0, 0.0}, NodeRole::Source, 0.5},
             Node{3, {9100.0, 0.0}, NodeRole::Sink, 0.5}};
  s.flows = {Flow{0, 0, 1, {0, 1}}, Flow{1, 2, 3, {2, 3}}};
  s.validate();

  SimConfig c = cfg(10000, 2);
  const auto m =
      run_simulation(s, SourcePolicy::round_robin(RoundRobinSchedule{2}), c);
  CHECK(m.flows[0].throughput == doctest::Approx(0.5));
  CHECK(m.flows[1].throughput == doctest::Approx(0.5));
  CHECK(m.aat == doctest::Approx(1.0));
}

TEST_CASE("uniform backoff paces relays at roughly 2/(cw+2)") {
  const auto scn = chain(0.5, 0.5, /*hop=*/100.0);
  SimConfig c = cfg(100000, 23);
  c.saturated_relays = true;
  c.max_retransmits = std::nullopt;
  c.relay_access.kind = RelayAccess::Kind::UniformBackoff;
  c.relay_access.contention_window = 5;
  const auto m = run_simulation(scn, SourcePolicy::from_rates({0.9}), c);
  const double rate = static_cast<double>(m.links[1].attempts) /
                      static_cast<double>(m.measured_slots);
  CHECK(rate == doctest::Approx(2.0 / 7.0).epsilon(0.03));
}

TEST_CASE("invalid configurations are rejected at construction") {
  const auto scn = single_link(1.0);
  SimConfig bad = cfg(1000, 1);
  bad.warmup_slots = 1000;
  CHECK_THROWS_AS(run_simulation(scn, SourcePolicy::from_rates({0.5}), bad),
                  std::invalid_argument);

  SimConfig zero_retx = cfg(1000, 1);
  zero_retx.max_retransmits = 0;
  CHECK_THROWS_AS(
      run_simulation(scn, SourcePolicy::from_rates({0.5}), zero_retx),
      std::invalid_argument);

  CHECK_THROWS_AS(
      run_simulation(scn, SourcePolicy::from_rates({0.5, 0.5}), cfg(1000, 1)),
      std::invalid_argument);
  CHECK_THROWS_AS(
      run_simulation(scn, SourcePolicy::from_rates({1.5}), cfg(1000, 1)),
      std::invalid_argument);
  CHECK_THROWS_AS(run_simulation(scn, SourcePolicy::round_robin({3}), cfg(1000, 1)),
                  std::invalid_argument);
}
