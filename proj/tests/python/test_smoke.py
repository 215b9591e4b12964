"""Smoke tests for the python bindings: build the bundled two-flow topology,
solve it, simulate it, and round-trip a scenario through JSON."""

import math
import os

import pytest

import tofra


def data_path(name):
    here = os.environ.get("TOFRA_DATA_DIR")
    if here:
        return os.path.join(here, name)
    return os.path.join(os.path.dirname(__file__), "..", "..", "data", name)


@pytest.fixture
def demo():
    scn = tofra.load_scenario(data_path("illustrative_scenario.json"))
    scn.phy.gamma = 1.0
    return scn


def test_scenario_roundtrip(demo):
    text = tofra.scenario_to_json_text(demo)
    back = tofra.scenario_from_json_text(text)
    assert len(back.nodes) == 4
    assert len(back.flows) == 2
    assert tofra.scenario_to_json_text(back) == text


def test_phy_and_throughput(demo):
    p_solo = tofra.success_probability(3, 0, [3], demo)
    assert 0.0 < p_solo < 1.0
    p_jammed = tofra.success_probability(3, 0, [3, 1, 2], demo)
    assert p_jammed < p_solo

    members = tofra.interferer_set(demo, tofra.Link(2, 0)).members
    assert list(members) == [1, 3]

    aat = tofra.aggregate_throughput(demo, [1.0, 1.0])
    assert 0.0 < aat < 2.0


def test_solver_against_grid(demo):
    problem = tofra.build_problem(demo)
    assert problem.dimension == 3  # two rates plus one auxiliary

    grid = tofra.solve_grid(problem, 0.01)
    sa = tofra.SaParams()
    sa.seed = 1
    annealed = tofra.solve_sa(problem, sa)

    assert annealed.feasible
    assert annealed.predicted_aat >= grid.predicted_aat - 1e-3
    assert annealed.rates[0] >= 0.98  # full utilization at this threshold
    assert annealed.rates[1] >= 0.98


def test_simulation_tracks_the_model(demo):
    problem = tofra.build_problem(demo)
    sa = tofra.SaParams()
    sa.seed = 1
    res = tofra.solve_sa(problem, sa)

    cfg = tofra.SimConfig()
    cfg.total_slots = 50000
    cfg.warmup_slots = 5000
    cfg.saturated_relays = True
    cfg.max_retransmits = None
    cfg.seed = 3

    metrics = tofra.run_simulation(demo, tofra.SourcePolicy.from_rates(res.rates), cfg)
    assert math.isclose(metrics.aat, res.predicted_aat, rel_tol=0.05)

    for flow in metrics.flows:
        assert flow.injected == flow.delivered + flow.dropped + flow.in_flight_end

    verdicts = tofra.queue_stability_report(metrics)
    assert len(verdicts) == 1

    census = tofra.link_success_census(metrics)
    assert all(0.0 <= e.ratio <= 1.0 for e in census)


def test_generation_and_baselines():
    gen = tofra.GenParams()
    gen.node_count = 24
    gen.area_w = gen.area_h = 330.0
    gen.min_flows = 2
    gen.max_flows = 4
    gen.phy.alpha = 4.0
    gen.phy.gamma = 0.5
    gen.seed = 7

    scn = tofra.generate_routed_scenario(gen, 2)
    assert len(scn.flows) >= 2

    fmp = tofra.baseline_fmp(scn)
    assert all(q == 1.0 for q in fmp)
    rr = tofra.baseline_rr(scn)
    assert rr.num_flows == len(scn.flows)

    sa = tofra.SaParams()
    sa.restarts = 2
    sa.iters_per_temperature = 40
    sa.min_temperature = 0.01
    bp = tofra.baseline_best_path(scn, None, sa)
    assert sum(1 for q in bp.rates if q > 0.0) <= 1
