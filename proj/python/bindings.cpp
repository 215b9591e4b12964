#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tofra/allocator.hpp"
#include "tofra/experiment.hpp"
#include "tofra/generator.hpp"
#include "tofra/phy.hpp"
#include "tofra/scenario_io.hpp"
#include "tofra/simulator.hpp"
#include "tofra/throughput.hpp"

namespace py = pybind11;
using namespace tofra;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Flow-rate allocation and slot-level simulation for random-access "
            "wireless multihop networks";

  // ---- scenario types ----
  py::class_<Position>(m, "Position")
      .def(py::init<>())
      .def(py::init([](double x, double y) { return Position{x, y}; }),
           py::arg("x"), py::arg("y"))
      .def_readwrite("x", &Position::x)
      .def_readwrite("y", &Position::y);

  py::enum_<NodeRole>(m, "NodeRole")
      .value("SOURCE", NodeRole::Source)
      .value("RELAY", NodeRole::Relay)
      .value("SINK", NodeRole::Sink)
      .value("IDLE", NodeRole::Idle);

  py::class_<PhyParams>(m, "PhyParams")
      .def(py::init<>())
      .def_readwrite("gamma", &PhyParams::gamma)
      .def_readwrite("eta", &PhyParams::eta)
      .def_readwrite("p_tx", &PhyParams::p_tx)
      .def_readwrite("alpha", &PhyParams::alpha)
      .def_readwrite("v", &PhyParams::v)
      .def("validate", &PhyParams::validate);

  py::class_<Node>(m, "Node")
      .def(py::init<>())
      .def_readwrite("id", &Node::id)
      .def_readwrite("pos", &Node::pos)
      .def_readwrite("role", &Node::role)
      .def_readwrite("tx_prob", &Node::tx_prob);

  py::class_<Link>(m, "Link")
      .def(py::init<>())
      .def(py::init([](NodeId tx, NodeId rx) { return Link{tx, rx}; }),
           py::arg("tx"), py::arg("rx"))
      .def_readwrite("tx", &Link::tx)
      .def_readwrite("rx", &Link::rx)
      .def("__repr__", [](const Link& l) {
        return "Link(" + std::to_string(l.tx) + "->" + std::to_string(l.rx) + ")";
      });

  py::class_<Flow>(m, "Flow")
      .def(py::init<>())
      .def_readwrite("id", &Flow::id)
      .def_readwrite("source", &Flow::source)
      .def_readwrite("destination", &Flow::destination)
      .def_readwrite("path", &Flow::path)
      .def("links", &Flow::links)
      .def("multi_hop", &Flow::multi_hop);

  py::class_<RoundRobinSchedule>(m, "RoundRobinSchedule")
      .def(py::init<>())
      .def_readwrite("num_flows", &RoundRobinSchedule::num_flows)
      .def("active", &RoundRobinSchedule::active, py::arg("flow"),
           py::arg("slot"));

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("area_w", &Scenario::area_w)
      .def_readwrite("area_h", &Scenario::area_h)
      .def_readwrite("phy", &Scenario::phy)
      .def_readwrite("nodes", &Scenario::nodes)
      .def_readwrite("flows", &Scenario::flows)
      .def("validate", &Scenario::validate)
      .def("node_q", &Scenario::node_q)
      .def("path_links", &Scenario::path_links);

  // ---- phy ----
  m.def("received_power_factor", &received_power_factor, py::arg("tx"),
        py::arg("rx"), py::arg("phy"));
  m.def(
      "success_probability",
      [](NodeId tx, NodeId rx, const std::vector<NodeId>& active,
         const Scenario& scn) {
        const auto pos = scn.positions();
        return success_probability(tx, rx, active, pos, scn.phy);
      },
      py::arg("tx"), py::arg("rx"), py::arg("active"), py::arg("scenario"));
  m.def(
      "instantaneous_sinr",
      [](NodeId tx, NodeId rx, const std::vector<NodeId>& active,
         const std::vector<double>& fades, const Scenario& scn) {
        const auto pos = scn.positions();
        return instantaneous_sinr(tx, rx, active, fades, pos, scn.phy);
      },
      py::arg("tx"), py::arg("rx"), py::arg("active"), py::arg("fades"),
      py::arg("scenario"));

  // ---- throughput model ----
  py::class_<InterfererSet>(m, "InterfererSet")
      .def_readonly("link", &InterfererSet::link)
      .def_readonly("members", &InterfererSet::members)
      .def("__len__", &InterfererSet::size);

  m.def("interferer_set", &interferer_set, py::arg("scenario"), py::arg("link"));
  m.def("dominant_interferers", &dominant_interferers, py::arg("scenario"),
        py::arg("link"), py::arg("k"));
  m.def("effective_tx_factor", &effective_tx_factor, py::arg("scenario"),
        py::arg("link"), py::arg("rates"));
  m.def("link_throughput", &link_throughput, py::arg("scenario"),
        py::arg("link"), py::arg("rates"), py::arg("interferers"));
  m.def("path_throughput", &path_throughput, py::arg("scenario"),
        py::arg("flow"), py::arg("rates"),
        py::arg("k_dominant") = std::nullopt);
  m.def("aggregate_throughput", &aggregate_throughput, py::arg("scenario"),
        py::arg("rates"), py::arg("k_dominant") = std::nullopt);

  // ---- allocator ----
  py::class_<SaParams>(m, "SaParams")
      .def(py::init<>())
      .def_readwrite("initial_temperature", &SaParams::initial_temperature)
      .def_readwrite("cooling", &SaParams::cooling)
      .def_readwrite("iters_per_temperature", &SaParams::iters_per_temperature)
      .def_readwrite("min_temperature", &SaParams::min_temperature)
      .def_readwrite("step_sigma", &SaParams::step_sigma)
      .def_readwrite("restarts", &SaParams::restarts)
      .def_readwrite("tolerance", &SaParams::tolerance)
      .def_readwrite("penalty_weight", &SaParams::penalty_weight)
      .def_readwrite("seed", &SaParams::seed);

  py::class_<SolverStats>(m, "SolverStats")
      .def_readonly("evaluations", &SolverStats::evaluations)
      .def_readonly("restarts", &SolverStats::restarts)
      .def_readonly("best_found_at", &SolverStats::best_found_at)
      .def_readonly("wall_seconds", &SolverStats::wall_seconds);

  py::class_<AllocationResult>(m, "AllocationResult")
      .def_readonly("rates", &AllocationResult::rates)
      .def_readonly("aux", &AllocationResult::aux)
      .def_readonly("predicted_aat", &AllocationResult::predicted_aat)
      .def_readonly("feasible", &AllocationResult::feasible)
      .def_readonly("stats", &AllocationResult::stats);

  py::class_<AllocationProblem>(m, "AllocationProblem")
      .def(py::init<const Scenario&, std::optional<int>>(), py::arg("scenario"),
           py::arg("k_dominant") = std::nullopt)
      .def_property_readonly("num_flows", &AllocationProblem::num_flows)
      .def_property_readonly("num_aux", &AllocationProblem::num_aux)
      .def_property_readonly("dimension", &AllocationProblem::dimension)
      .def("objective",
           [](const AllocationProblem& p, const std::vector<double>& x) {
             return p.objective(x);
           })
      .def("max_violation",
           [](const AllocationProblem& p, const std::vector<double>& x) {
             return p.max_violation(x);
           })
      .def("evaluate",
           [](const AllocationProblem& p, const std::vector<double>& x) {
             return p.evaluate(x);
           });

  m.def("build_problem", &build_problem, py::arg("scenario"),
        py::arg("k_dominant") = std::nullopt);
  m.def(
      "solve_sa",
      [](const AllocationProblem& p, const SaParams& sa) {
        return solve_sa(p, sa);
      },
      py::arg("problem"), py::arg("sa") = SaParams{});
  m.def("solve_grid", &solve_grid, py::arg("problem"), py::arg("resolution"),
        py::arg("tolerance") = 1e-6);
  m.def("end_to_end_success_probability", &end_to_end_success_probability,
        py::arg("scenario"), py::arg("flow"));
  m.def("baseline_best_path", &baseline_best_path, py::arg("scenario"),
        py::arg("k_dominant") = std::nullopt, py::arg("sa") = SaParams{});
  m.def("baseline_fmp", &baseline_fmp, py::arg("scenario"));
  m.def("baseline_rr", &baseline_rr, py::arg("scenario"));

  // ---- simulator ----
  py::enum_<RelayAccess::Kind>(m, "RelayAccessKind")
      .value("BERNOULLI", RelayAccess::Kind::Bernoulli)
      .value("UNIFORM_BACKOFF", RelayAccess::Kind::UniformBackoff);

  py::class_<RelayAccess>(m, "RelayAccess")
      .def(py::init<>())
      .def_readwrite("kind", &RelayAccess::kind)
      .def_readwrite("contention_window", &RelayAccess::contention_window);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("total_slots", &SimConfig::total_slots)
      .def_readwrite("warmup_slots", &SimConfig::warmup_slots)
      .def_readwrite("max_retransmits", &SimConfig::max_retransmits)
      .def_readwrite("saturated_relays", &SimConfig::saturated_relays)
      .def_readwrite("relay_access", &SimConfig::relay_access)
      .def_readwrite("seed", &SimConfig::seed);

  py::class_<SourcePolicy>(m, "SourcePolicy")
      .def_static("from_rates", &SourcePolicy::from_rates, py::arg("rates"))
      .def_static("round_robin", &SourcePolicy::round_robin,
                  py::arg("schedule"));

  py::class_<FlowStats>(m, "FlowStats")
      .def_readonly("injected", &FlowStats::injected)
      .def_readonly("delivered", &FlowStats::delivered)
      .def_readonly("dropped", &FlowStats::dropped)
      .def_readonly("in_flight_end", &FlowStats::in_flight_end)
      .def_readonly("delivered_measured", &FlowStats::delivered_measured)
      .def_readonly("throughput", &FlowStats::throughput)
      .def_readonly("mean_delay", &FlowStats::mean_delay)
      .def_readonly("p95_delay", &FlowStats::p95_delay);

  py::class_<LinkStats>(m, "LinkStats")
      .def_readonly("link", &LinkStats::link)
      .def_readonly("attempts", &LinkStats::attempts)
      .def_readonly("successes", &LinkStats::successes);

  py::class_<RelayStats>(m, "RelayStats")
      .def_readonly("relay", &RelayStats::relay)
      .def_readonly("mean_queue_length", &RelayStats::mean_queue_length)
      .def_readonly("queue_slope", &RelayStats::queue_slope)
      .def_readonly("peak_queue", &RelayStats::peak_queue);

  py::class_<SimMetrics>(m, "SimMetrics")
      .def_readonly("total_slots", &SimMetrics::total_slots)
      .def_readonly("measured_slots", &SimMetrics::measured_slots)
      .def_readonly("flows", &SimMetrics::flows)
      .def_readonly("aat", &SimMetrics::aat)
      .def_readonly("links", &SimMetrics::links)
      .def_readonly("relays", &SimMetrics::relays);

  py::class_<CensusEntry>(m, "CensusEntry")
      .def_readonly("link", &CensusEntry::link)
      .def_readonly("attempts", &CensusEntry::attempts)
      .def_readonly("successes", &CensusEntry::successes)
      .def_readonly("ratio", &CensusEntry::ratio)
      .def_readonly("wilson_low", &CensusEntry::wilson_low)
      .def_readonly("wilson_high", &CensusEntry::wilson_high);

  py::class_<StabilityVerdict>(m, "StabilityVerdict")
      .def_readonly("relay", &StabilityVerdict::relay)
      .def_readonly("slope", &StabilityVerdict::slope)
      .def_readonly("stable", &StabilityVerdict::stable);

  m.def("run_simulation", &run_simulation, py::arg("scenario"),
        py::arg("policy"), py::arg("config"));
  m.def("link_success_census", &link_success_census, py::arg("metrics"));
  m.def("queue_stability_report", &queue_stability_report, py::arg("metrics"));

  // ---- generation & I/O ----
  py::class_<GenParams>(m, "GenParams")
      .def(py::init<>())
      .def_readwrite("node_count", &GenParams::node_count)
      .def_readwrite("area_w", &GenParams::area_w)
      .def_readwrite("area_h", &GenParams::area_h)
      .def_readwrite("min_flows", &GenParams::min_flows)
      .def_readwrite("max_flows", &GenParams::max_flows)
      .def_readwrite("p_min", &GenParams::p_min)
      .def_readwrite("relay_tx_prob", &GenParams::relay_tx_prob)
      .def_readwrite("phy", &GenParams::phy)
      .def_readwrite("seed", &GenParams::seed)
      .def_readwrite("max_retries", &GenParams::max_retries);

  py::enum_<PathCost>(m, "PathCost")
      .value("NEG_LOG_SUCCESS", PathCost::NegLogSuccess)
      .value("HOP_COUNT", PathCost::HopCount);

  py::class_<PathSelection>(m, "PathSelection")
      .def_readonly("scenario", &PathSelection::scenario)
      .def_readonly("dropped_flows", &PathSelection::dropped_flows);

  m.def("generate_scenario", &generate_scenario, py::arg("gen"));
  m.def("select_disjoint_paths", &select_disjoint_paths, py::arg("scenario"),
        py::arg("p_min"), py::arg("cost") = PathCost::NegLogSuccess);
  m.def("generate_routed_scenario", &generate_routed_scenario, py::arg("gen"),
        py::arg("min_routed_flows") = 1);
  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("save_scenario", &save_scenario, py::arg("scenario"), py::arg("path"));
  m.def("scenario_from_json_text", &scenario_from_json_text, py::arg("text"),
        py::arg("origin") = "<string>");
  m.def("scenario_to_json_text", &scenario_to_json_text, py::arg("scenario"));

  // ---- experiment ----
  m.def("load_experiment_config", &load_experiment_config, py::arg("path"));
  m.def("experiment_config_from_json_text", &experiment_config_from_json_text,
        py::arg("text"), py::arg("origin") = "<string>");
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_readwrite("master_seed", &ExperimentConfig::master_seed)
      .def_readwrite("replications", &ExperimentConfig::replications)
      .def_readwrite("workers", &ExperimentConfig::workers);
  py::class_<ExperimentReport>(m, "ExperimentReport")
      .def_readonly("warnings", &ExperimentReport::warnings)
      .def_readonly("scenarios", &ExperimentReport::scenarios);
  m.def("run_experiment", &run_experiment, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("report_to_csv", &report_to_csv, py::arg("report"));
  m.def("write_report_csv", &write_report_csv, py::arg("report"),
        py::arg("path"));
  m.def("emit_plotdata", &emit_plotdata, py::arg("report"), py::arg("out_dir"));
}
