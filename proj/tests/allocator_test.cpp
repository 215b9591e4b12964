#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "test_util.hpp"
#include "tofra/allocator.hpp"
#include "tofra/generator.hpp"
#include "tofra/phy.hpp"

using namespace tofra;

namespace {

Scenario two_single_hop_flows() {
  Scenario s;
  s.area_w = s.area_h = 500.0;
  s.phy = PhyParams{1.0, 7e-11, 0.1, 3.0, 1.0};
  s.nodes = {Node{0, {0.0, 0.0}, NodeRole::Source, 0.5},
             Node{1, {120.0, 0.0}, NodeRole::Sink, 0.5},
             Node{2, {0.0, 300.0}, NodeRole::Source, 0.5},
             Node{3, {120.0, 300.0}, NodeRole::Sink, 0.5}};
  s.flows = {Flow{0, 0, 1, {0, 1}}, Flow{1, 2, 3, {2, 3}}};
  s.validate();
  return s;
}

Scenario two_three_hop_flows() {
  Scenario s;
  s.area_w = 1000.0;
  s.area_h = 500.0;
  s.phy = PhyParams{1.0, 7e-11, 0.1, 3.0, 1.0};
  auto node = [](NodeId id, double x, double y, NodeRole role) {
    return Node{id, {x, y}, role, 0.5};
  };
  s.nodes = {node(0, 0, 0, NodeRole::Source),   node(1, 150, 0, NodeRole::Relay),
             node(2, 300, 0, NodeRole::Relay),  node(3, 450, 0, NodeRole::Sink),
             node(4, 0, 400, NodeRole::Source), node(5, 150, 400, NodeRole::Relay),
             node(6, 300, 400, NodeRole::Relay), node(7, 450, 400, NodeRole::Sink)};
  s.flows = {Flow{0, 0, 3, {0, 1, 2, 3}}, Flow{1, 4, 7, {4, 5, 6, 7}}};
  s.validate();
  return s;
}

SaParams quick_sa(std::uint64_t seed = 1) {
  SaParams sa;
  sa.restarts = 4;
  sa.iters_per_temperature = 120;
  sa.min_temperature = 5e-3;
  sa.seed = seed;
  return sa;
}

}  // namespace

TEST_CASE("problem structure mirrors the two-step formulation") {
  SUBCASE("illustrative topology: two rates plus one auxiliary") {
    const auto scn = testutil::illustrative_scenario(0.5);
    const AllocationProblem p(scn, std::nullopt);
    CHECK(p.num_flows() == 2);
    CHECK(p.num_aux() == 1);                     // only 1 -> 2 -> 0 is multi-hop
    CHECK(p.dimension() == 3);                   // {q1, q3, q1'}
    CHECK(p.num_delay_constraints() == 1);       // T12 <= T20
    CHECK(p.num_link_bound_constraints() == 2);  // q1' <= T12, q1' <= T20
    CHECK(p.aux_index(0) == 0);
    CHECK(p.aux_index(1) == -1);
  }
  SUBCASE("single-hop flows carry no auxiliaries") {
    const AllocationProblem p(two_single_hop_flows(), std::nullopt);
    CHECK(p.num_aux() == 0);
    CHECK(p.dimension() == 2);
    CHECK(p.num_delay_constraints() == 0);
    CHECK(p.num_link_bound_constraints() == 0);
  }
  SUBCASE("every multi-hop flow adds an auxiliary and its delay constraints") {
    const AllocationProblem p(two_three_hop_flows(), std::nullopt);
    CHECK(p.num_aux() == 2);
    CHECK(p.dimension() == 4);
    CHECK(p.num_delay_constraints() == 4);       // (|r|-1) per flow, two 3-hop
    CHECK(p.num_link_bound_constraints() == 6);  // |r| per flow
  }
}

TEST_CASE("point evaluation: objective and worst violation") {
  const auto scn = testutil::illustrative_scenario(0.5);
  const AllocationProblem p(scn, std::nullopt);

  SUBCASE("the all-zeros point is feasible with zero objective") {
    const std::vector<double> zeros(p.dimension(), 0.0);
    const auto [obj, viol] = p.evaluate(zeros);
    CHECK(obj == doctest::Approx(0.0));
    CHECK(viol == doctest::Approx(0.0));
  }

  SUBCASE("an ambitious auxiliary violates its link bounds") {
    const std::vector<double> x = {0.01, 0.0, 1.0};
    const auto [obj, viol] = p.evaluate(x);
    CHECK(viol > 0.5);  // q1' = 1 vastly exceeds the tiny link throughputs
    CHECK(obj == doctest::Approx(1.0));  // objective reads the aux at face value
  }

  SUBCASE("saturated rates with the bottleneck auxiliary") {
    std::vector<double> thr;
    p.link_throughputs({1.0, 1.0}, thr);
    REQUIRE(thr.size() == 3);  // (1,2), (2,0), (3,0)
    const double t12 = thr[0], t20 = thr[1];
    const std::vector<double> x = {1.0, 1.0, std::min(t12, t20)};
    const auto [obj, viol] = p.evaluate(x);
    if (t12 <= t20)
      CHECK(viol <= 1e-12);
    else
      CHECK(viol > 0.0);
    CHECK(obj == doctest::Approx(thr[2] + std::min(t12, t20)));
  }

  SUBCASE("dimension mismatches are rejected") {
    CHECK_THROWS_AS(p.objective(std::vector<double>{0.1, 0.2}),
                    std::invalid_argument);
  }
}

TEST_CASE("the all-zeros point is feasible for every generated problem") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    GenParams gen;
    gen.node_count = 25;
    gen.max_flows = 4;
    gen.phy.gamma = 0.5;
    gen.phy.alpha = 4.0;
    gen.seed = seed;
    const Scenario scn = generate_routed_scenario(gen);
    const AllocationProblem p(scn, 6);
    const std::vector<double> zeros(p.dimension(), 0.0);
    const auto [obj, viol] = p.evaluate(zeros);
    CAPTURE(seed);
    CHECK(obj == doctest::Approx(0.0));
    CHECK(viol == doctest::Approx(0.0));
  }
}

TEST_CASE("grid oracle on the illustrative topology") {
  SUBCASE("full utilization at mild thresholds") {
    const AllocationProblem p(testutil::illustrative_scenario(0.5), std::nullopt);
    const auto res = solve_grid(p, 0.01);
    CHECK(res.feasible);
    CHECK(res.rates[0] == doctest::Approx(1.0));
    CHECK(res.rates[1] == doctest::Approx(1.0));
    CHECK(res.aux.size() == 1);
    CHECK(res.predicted_aat > 0.4);
  }
  SUBCASE("single monotone variable maxes out") {
    Scenario s;
    s.phy = PhyParams{1.0, 7e-11, 0.1, 3.0, 1.0};
    s.nodes = {Node{0, {0.0, 0.0}, NodeRole::Source, 0.5},
               Node{1, {200.0, 0.0}, NodeRole::Sink, 0.5}};
    s.flows = {Flow{0, 0, 1, {0, 1}}};
    const AllocationProblem p(s, std::nullopt);
    const auto res = solve_grid(p, 0.01);
    CHECK(res.rates[0] == doctest::Approx(1.0));
  }
  SUBCASE("too many variables are refused") {
    GenParams gen;
    gen.node_count = 30;
    gen.min_flows = 4;
    gen.max_flows = 4;
    gen.phy.gamma = 0.5;
    gen.seed = 77;
    const Scenario scn = generate_routed_scenario(gen, 4);
    const AllocationProblem p(scn, 4);
    CHECK_THROWS_AS(solve_grid(p, 0.1), std::invalid_argument);
  }
}

TEST_CASE("annealing matches the grid oracle and returns feasible points") {
  for (double gamma : {0.5, 1.5}) {
    const AllocationProblem p(testutil::illustrative_scenario(gamma), std::nullopt);
    const auto sa_res = solve_sa(p, quick_sa());
    const auto grid_res = solve_grid(p, 0.01);
    CAPTURE(gamma);
    CHECK(sa_res.feasible);
    CHECK(sa_res.predicted_aat >= grid_res.predicted_aat - 1e-3);

    // returned points satisfy every constraint of the full problem
    std::vector<double> x = sa_res.rates;
    x.insert(x.end(), sa_res.aux.begin(), sa_res.aux.end());
    CHECK(p.max_violation(x) <= 1e-6);
    std::vector<double> xg = grid_res.rates;
    xg.insert(xg.end(), grid_res.aux.begin(), grid_res.aux.end());
    CHECK(p.max_violation(xg) <= 1e-6);
  }
}

TEST_CASE("annealing keeps grid parity on generated two-flow scenarios") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 20 && checked < 5; ++seed) {
    GenParams gen;
    gen.node_count = 16;
    gen.area_w = gen.area_h = 250.0;
    gen.min_flows = 2;
    gen.max_flows = 2;
    gen.relay_tx_prob = 2.0 / 7.0;
    gen.phy.gamma = 1.0;
    gen.phy.alpha = 4.0;
    gen.seed = seed;
    Scenario scn;
    try {
      scn = generate_routed_scenario(gen, 2);
    } catch (const std::runtime_error&) {
      continue;
    }
    if (scn.flows.size() != 2) continue;
    ++checked;
    const AllocationProblem p(scn, std::nullopt);
    const auto sa_res = solve_sa(p, quick_sa(seed));
    const auto grid_res = solve_grid(p, 0.01);
    CAPTURE(seed);
    CHECK(sa_res.predicted_aat >= grid_res.predicted_aat - 1e-3);
    std::vector<double> x = sa_res.rates;
    x.insert(x.end(), sa_res.aux.begin(), sa_res.aux.end());
    CHECK(p.max_violation(x) <= 1e-6);
  }
  CHECK(checked == 5);
}

TEST_CASE("annealing is deterministic in its seed") {
  const AllocationProblem p(testutil::illustrative_scenario(1.5), std::nullopt);
  const auto a = solve_sa(p, quick_sa(42));
  const auto b = solve_sa(p, quick_sa(42));
  CHECK(a.rates == b.rates);
  CHECK(a.predicted_aat == b.predicted_aat);
  CHECK(a.stats.evaluations == b.stats.evaluations);
  CHECK(a.stats.best_found_at == b.stats.best_found_at);
}

TEST_CASE("penalized acceptance still reports a feasible incumbent") {
  const AllocationProblem p(testutil::illustrative_scenario(1.0), std::nullopt);
  SaParams sa = quick_sa(7);
  sa.penalty_weight = 10.0;
  const auto res = solve_sa(p, sa);
  std::vector<double> x = res.rates;
  x.insert(x.end(), res.aux.begin(), res.aux.end());
  CHECK(p.max_violation(x) <= 1e-6);
  CHECK(res.predicted_aat > 0.0);
}

TEST_CASE("end-to-end success probability") {
  SUBCASE("single noiseless link is perfect") {
    Scenario s;
    s.phy = PhyParams{1.0, 0.0, 0.1, 3.0, 1.0};
    s.nodes = {Node{0, {0.0, 0.0}, NodeRole::Source, 0.5},
               Node{1, {400.0, 0.0}, NodeRole::Sink, 0.5}};
    s.flows = {Flow{0, 0, 1, {0, 1}}};
    CHECK(end_to_end_success_probability(s, s.flows[0]) == doctest::Approx(1.0));
  }
  SUBCASE("two equal links multiply") {
    Scenario s;
    s.phy = PhyParams{1.0, 7e-11, 0.1, 3.0, 1.0};
    s.nodes = {Node{0, {0.0, 0.0}, NodeRole::Source, 0.5},
               Node{1, {400.0, 0.0}, NodeRole::Relay, 0.5},
               Node{2, {800.0, 0.0}, NodeRole::Sink, 0.5}};
    s.flows = {Flow{0, 0, 2, {0, 1, 2}}};
    const auto pos = s.positions();
    const double p_hop =
        success_probability(0, 1, std::vector<NodeId>{0}, pos, s.phy);
    CHECK(end_to_end_success_probability(s, s.flows[0]) ==
          doctest::Approx(p_hop * p_hop).epsilon(1e-12));
  }
  SUBCASE("the relayed path beats the long direct path at every threshold") {
    for (double gamma : {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0}) {
      const auto scn = testutil::illustrative_scenario(gamma);
      CAPTURE(gamma);
      CHECK(end_to_end_success_probability(scn, scn.flows[0]) >
            end_to_end_success_probability(scn, scn.flows[1]));
    }
  }
}

TEST_CASE("best-path baseline optimizes only the strongest path") {
  const auto scn = testutil::illustrative_scenario(1.0);
  const auto res = baseline_best_path(scn, std::nullopt, quick_sa());
  CHECK(res.rates.size() == 2);
  CHECK(res.rates[1] == doctest::Approx(0.0));  // r2 stays silent
  CHECK(res.rates[0] > 0.5);

  // its feasible set is a subset of the full problem's
  const AllocationProblem p(scn, std::nullopt);
  const auto full = solve_sa(p, quick_sa());
  CHECK(res.predicted_aat <= full.predicted_aat + 1e-3);

  SUBCASE("with one flow it degenerates to the full solve") {
    Scenario solo = scn;
    solo.flows = {scn.flows[1]};
    solo.nodes[1].role = NodeRole::Idle;
    solo.nodes[2].role = NodeRole::Idle;
    const auto bp = baseline_best_path(solo, std::nullopt, quick_sa(3));
    const auto sa = solve_sa(AllocationProblem(solo, std::nullopt), quick_sa(3));
    CHECK(bp.rates == sa.rates);
    CHECK(bp.predicted_aat == doctest::Approx(sa.predicted_aat));
  }
}

TEST_CASE("full-multipath and round-robin descriptors") {
  const auto scn = testutil::illustrative_scenario(0.5);
  CHECK(baseline_fmp(scn) == RateVector{1.0, 1.0});

  const auto rr = baseline_rr(scn);
  CHECK(rr.num_flows == 2);
  // each source is active exactly once per rotation
  std::vector<int> turns(2, 0);
  for (std::uint64_t slot = 0; slot < 20; ++slot)
    for (std::size_t k = 0; k < 2; ++k)
      if (rr.active(k, slot)) ++turns[k];
  CHECK(turns[0] == 10);
  CHECK(turns[1] == 10);
  // single-flow round robin degenerates to full multipath
  RoundRobinSchedule one{1};
  for (std::uint64_t slot = 0; slot < 5; ++slot) CHECK(one.active(0, slot));
}
