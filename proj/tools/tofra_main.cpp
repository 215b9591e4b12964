// tofra — flow-rate allocation and slot-level simulation for random-access
// multihop networks. Subcommands: generate, solve, simulate, experiment,
// plotdata. TOFRA_OUT_DIR sets the default output directory; command-line
// flags override config-file values.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tofra/allocator.hpp"
#include "tofra/experiment.hpp"
#include "tofra/generator.hpp"
#include "tofra/scenario_io.hpp"
#include "tofra/simulator.hpp"

namespace fs = std::filesystem;
using namespace tofra;

namespace {

std::string default_out_dir() {
  const char* env = std::getenv("TOFRA_OUT_DIR");
  return env && *env ? env : ".";
}

std::optional<int> parse_k(const std::string& k) {
  if (k.empty() || k == "N" || k == "n" || k == "all") return std::nullopt;
  return std::stoi(k);
}

RateVector parse_rates(const std::string& text) {
  RateVector out;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == ';') {
      out.push_back(std::stod(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::stod(cur));
  return out;
}

void print_result(const Scenario& scn, const AllocationResult& res,
                  std::ostream& os) {
  os << "predicted_aat " << res.predicted_aat << "\n";
  for (std::size_t k = 0; k < res.rates.size(); ++k)
    os << "q_flow" << scn.flows[k].id << " " << res.rates[k] << "\n";
  os << "evaluations " << res.stats.evaluations << "\n";
  os << "wall_seconds " << res.stats.wall_seconds << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Throughput-optimal flow rate allocation for random-access "
               "wireless multihop networks"};
  app.require_subcommand(1);

  // ---- generate ----
  auto* cmd_gen = app.add_subcommand(
      "generate", "Generate a random scenario with node-disjoint paths");
  GenParams gen;
  std::vector<double> area{500.0, 500.0};
  std::string gen_out;
  int min_routed = 1;
  cmd_gen->add_option("--nodes", gen.node_count, "Number of nodes");
  cmd_gen->add_option("--area", area, "Area size: one value (square) or W H")
      ->expected(1, 2);
  cmd_gen->add_option("--max-flows", gen.max_flows, "Maximum flow count");
  cmd_gen->add_option("--min-flows", gen.min_flows, "Minimum flow count");
  cmd_gen->add_option("--seed", gen.seed, "Generation seed");
  cmd_gen->add_option("--p-min", gen.p_min,
                      "Connectivity threshold on the solo success probability");
  cmd_gen->add_option("--gamma", gen.phy.gamma, "SINR threshold");
  cmd_gen->add_option("--eta", gen.phy.eta, "Noise power [W]");
  cmd_gen->add_option("--ptx", gen.phy.p_tx, "Transmit power [W]");
  cmd_gen->add_option("--alpha", gen.phy.alpha, "Path loss exponent");
  cmd_gen->add_option("--relay-q", gen.relay_tx_prob,
                      "Relay transmission probability");
  cmd_gen->add_option("--min-routed-flows", min_routed,
                      "Regenerate until this many flows survive routing");
  cmd_gen->add_option("--out", gen_out, "Output scenario file");

  // ---- solve ----
  auto* cmd_solve =
      app.add_subcommand("solve", "Solve the flow allocation problem");
  std::string solve_scn, solve_k = "N", solve_out, solve_method = "sa";
  double solve_gamma = 0.0, solve_resolution = 0.01;
  SaParams sa;
  cmd_solve->add_option("--scenario", solve_scn, "Scenario file")->required();
  cmd_solve->add_option("--gamma", solve_gamma,
                        "Override the scenario SINR threshold");
  cmd_solve->add_option("--k", solve_k, "K-dominant truncation (int or N)");
  cmd_solve->add_option("--sa-seed", sa.seed, "Annealing seed");
  cmd_solve->add_option("--restarts", sa.restarts, "Annealing restarts");
  cmd_solve->add_option("--method", solve_method,
                        "sa (annealing) or grid (exhaustive oracle)");
  cmd_solve->add_option("--resolution", solve_resolution,
                        "Grid resolution for --method grid");
  cmd_solve->add_option("--out", solve_out, "Write the result here");

  // ---- simulate ----
  auto* cmd_sim = app.add_subcommand("simulate", "Run the slot simulator");
  std::string sim_scn, sim_rates, sim_scheme, sim_retx = "3", sim_k = "N";
  double sim_gamma = 0.0;
  SimConfig sim_cfg;
  std::uint64_t sim_warmup = 0;
  bool warmup_set = false;
  cmd_sim->add_option("--scenario", sim_scn, "Scenario file")->required();
  cmd_sim->add_option("--rates", sim_rates,
                      "Source rates, comma separated (one per flow)");
  cmd_sim->add_option("--scheme", sim_scheme,
                      "Derive the policy: tofra, bp, fmp or rr");
  cmd_sim->add_option("--slots", sim_cfg.total_slots, "Total slots");
  cmd_sim
      ->add_option("--warmup", sim_warmup,
                   "Warmup slots excluded from metrics (default: 10%)")
      ->each([&](const std::string&) { warmup_set = true; });
  cmd_sim->add_option("--retx", sim_retx, "Max retransmissions (int or inf)");
  cmd_sim->add_flag("--saturated", sim_cfg.saturated_relays,
                    "Keep relay queues backlogged with dummy packets");
  cmd_sim->add_flag("--backoff", [&](std::int64_t) {
      sim_cfg.relay_access.kind = RelayAccess::Kind::UniformBackoff;
    }, "Uniform backoff relay access instead of Bernoulli");
  cmd_sim->add_option("--cw", sim_cfg.relay_access.contention_window,
                      "Contention window for --backoff");
  cmd_sim->add_option("--seed", sim_cfg.seed, "Simulation seed");
  cmd_sim->add_option("--gamma", sim_gamma, "Override the SINR threshold");
  cmd_sim->add_option("--k", sim_k, "K-dominant truncation for --scheme tofra");
  cmd_sim->add_option("--sa-seed", sa.seed, "Annealing seed for --scheme");

  // ---- experiment ----
  auto* cmd_exp = app.add_subcommand(
      "experiment", "Run a full scenario x gamma x scheme grid");
  std::string exp_config, exp_out_dir = default_out_dir();
  std::optional<std::uint64_t> exp_seed;
  std::optional<int> exp_reps, exp_workers;
  cmd_exp->add_option("--config", exp_config, "Experiment config (JSON)")
      ->required();
  cmd_exp->add_option("--out-dir", exp_out_dir, "Output directory");
  cmd_exp->add_option("--seed", exp_seed, "Override the master seed");
  cmd_exp->add_option("--replications", exp_reps, "Override replications");
  cmd_exp->add_option("--workers", exp_workers, "Override worker count");

  // ---- plotdata ----
  auto* cmd_plot = app.add_subcommand(
      "plotdata", "Emit per-figure CSV files from a report");
  std::string plot_report, plot_out_dir = default_out_dir();
  cmd_plot->add_option("--report", plot_report, "Report CSV")->required();
  cmd_plot->add_option("--out-dir", plot_out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_gen) {
      gen.area_w = area[0];
      gen.area_h = area.size() > 1 ? area[1] : area[0];
      const Scenario scn = generate_routed_scenario(gen, min_routed);
      if (gen_out.empty()) {
        std::cout << scenario_to_json_text(scn);
      } else {
        save_scenario(scn, gen_out);
        std::cout << "wrote " << gen_out << " (" << scn.flows.size()
                  << " flows)\n";
      }
    } else if (*cmd_solve) {
      Scenario scn = load_scenario(solve_scn);
      if (solve_gamma > 0.0) scn.phy.gamma = solve_gamma;
      AllocationProblem problem(scn, parse_k(solve_k));
      AllocationResult res;
      if (solve_method == "grid")
        res = solve_grid(problem, solve_resolution);
      else if (solve_method == "sa")
        res = solve_sa(problem, sa);
      else
        throw std::runtime_error("unknown --method " + solve_method);
      if (solve_out.empty()) {
        print_result(scn, res, std::cout);
      } else {
        std::ofstream f(solve_out);
        if (!f) throw std::runtime_error(solve_out + ": cannot open");
        print_result(scn, res, f);
        std::cout << "wrote " << solve_out << "\n";
      }
    } else if (*cmd_sim) {
      Scenario scn = load_scenario(sim_scn);
      if (sim_gamma > 0.0) scn.phy.gamma = sim_gamma;
      if (sim_retx == "inf" || sim_retx == "infinite")
        sim_cfg.max_retransmits = std::nullopt;
      else
        sim_cfg.max_retransmits = static_cast<std::uint32_t>(std::stoul(sim_retx));
      sim_cfg.warmup_slots = warmup_set ? sim_warmup : sim_cfg.total_slots / 10;

      SourcePolicy policy;
      if (!sim_rates.empty()) {
        policy = SourcePolicy::from_rates(parse_rates(sim_rates));
      } else if (!sim_scheme.empty()) {
        const auto scheme = scheme_from_string(sim_scheme);
        if (!scheme) throw std::runtime_error("unknown --scheme " + sim_scheme);
        switch (*scheme) {
          case Scheme::Tofra: {
            AllocationProblem problem(scn, parse_k(sim_k));
            policy = SourcePolicy::from_rates(solve_sa(problem, sa).rates);
            break;
          }
          case Scheme::BestPath:
            policy = SourcePolicy::from_rates(
                baseline_best_path(scn, std::nullopt, sa).rates);
            break;
          case Scheme::FullMultipath:
            policy = SourcePolicy::from_rates(baseline_fmp(scn));
            break;
          case Scheme::RoundRobin:
            policy = SourcePolicy::round_robin(baseline_rr(scn));
            break;
        }
      } else {
        throw std::runtime_error("simulate needs --rates or --scheme");
      }

      const SimMetrics metrics = run_simulation(scn, policy, sim_cfg);
      std::cout << "aat " << metrics.aat << "\n";
      for (std::size_t k = 0; k < metrics.flows.size(); ++k) {
        const FlowStats& fs = metrics.flows[k];
        std::cout << "flow" << scn.flows[k].id << " throughput "
                  << fs.throughput << " delivered " << fs.delivered
                  << " dropped " << fs.dropped << " mean_delay "
                  << fs.mean_delay << " p95_delay " << fs.p95_delay << "\n";
      }
      for (const auto& verdict : queue_stability_report(metrics))
        std::cout << "relay" << verdict.relay << " slope " << verdict.slope
                  << (verdict.stable ? " stable" : " UNSTABLE") << "\n";
    } else if (*cmd_exp) {
      ExperimentConfig cfg = load_experiment_config(exp_config);
      if (exp_seed) cfg.master_seed = *exp_seed;
      if (exp_reps) cfg.replications = *exp_reps;
      if (exp_workers) cfg.workers = *exp_workers;
      const ExperimentReport report = run_experiment(cfg);
      fs::create_directories(exp_out_dir);
      const std::string report_path =
          (fs::path(exp_out_dir) / "report.csv").string();
      write_report_csv(report, report_path);
      const fs::path scen_dir = fs::path(exp_out_dir) / "scenarios";
      fs::create_directories(scen_dir);
      for (std::size_t i = 0; i < report.scenarios.size(); ++i)
        save_scenario(report.scenarios[i],
                      (scen_dir / ("scenario_" + std::to_string(i) + ".json"))
                          .string());
      for (const std::string& w : report.warnings)
        std::cerr << "warning: " << w << "\n";
      std::cout << "wrote " << report_path << " (" << report.rows.size()
                << " rows)\n";
    } else if (*cmd_plot) {
      const ExperimentReport report = read_report_csv(plot_report);
      emit_plotdata(report, plot_out_dir);
      std::cout << "wrote plot data under " << plot_out_dir << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
