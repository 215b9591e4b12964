#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tofra/allocator.hpp"
#include "tofra/generator.hpp"
#include "tofra/scenario.hpp"
#include "tofra/simulator.hpp"

namespace tofra {

// Experiment orchestration: a grid of (scenario x gamma x scheme x K) cells,
// each solved and then simulated over several replications, reported as CSV.
// One master seed determines generation, solver seeds and simulation seeds;
// per-cell seeds derive from the cell's coordinates, never from execution
// order, so reports are byte-identical across reruns and worker counts.

enum class Scheme { Tofra, BestPath, FullMultipath, RoundRobin };

const char* to_string(Scheme scheme);  // TOFRA / BP / FMP / RR
std::optional<Scheme> scheme_from_string(const std::string& s);

struct ScenarioSource {
  std::vector<std::string> files;  // used when non-empty
  GenParams generate;              // otherwise: generated scenarios
  int count = 10;
};

struct ExperimentConfig {
  ScenarioSource scenarios;
  std::vector<double> gammas = {0.5, 1.0, 1.5, 2.0};
  std::vector<Scheme> schemes = {Scheme::Tofra, Scheme::BestPath,
                                 Scheme::FullMultipath, Scheme::RoundRobin};
  // K-dominant truncations for TOFRA; nullopt = use every interferer (K=N).
  // Baselines always run with the full set.
  std::vector<std::optional<int>> k_list = {std::nullopt, 6, 4};
  SimConfig sim;
  SaParams sa;
  int replications = 3;
  std::uint64_t master_seed = 1;
  int workers = 0;  // 0 = hardware concurrency
  int min_routed_flows = 1;

  void validate() const;
};

struct ResultRow {
  int scenario_id = 0;
  double gamma = 0.0;
  Scheme scheme = Scheme::Tofra;
  std::optional<int> k;  // nullopt = N
  std::optional<double> aat_numerical;
  std::optional<double> aat_sim_mean;
  std::optional<double> aat_sim_stderr;
  std::optional<double> deviation_pct;  // signed, (sim - numerical)/numerical
  RateVector rates;
  bool stable = false;  // every relay stable in every replication
  std::string status = "ok";
};

struct ExperimentReport {
  std::vector<ResultRow> rows;
  std::vector<std::string> warnings;
  std::vector<Scenario> scenarios;  // as used (not serialized to CSV)
};

ExperimentReport run_experiment(const ExperimentConfig& config);

inline constexpr const char* kReportHeader =
    "scenario_id,gamma,scheme,k_dominant,aat_numerical,aat_sim_mean,"
    "aat_sim_stderr,deviation_pct,rates,stable,status";

std::string report_to_csv(const ExperimentReport& report);
void write_report_csv(const ExperimentReport& report, const std::string& path);
ExperimentReport read_report_csv(const std::string& path);

// Per-figure CSV files under out_dir, one trio per gamma:
//   model_vs_sim_gamma<g>.csv   (numerical vs simulated AAT per scenario)
//   scheme_comparison_gamma<g>.csv  (scenario,TOFRA,FMP,BP,RR simulated AAT)
//   k_dominant_gamma<g>.csv     (numerical AAT per truncation level)
void emit_plotdata(const ExperimentReport& report, const std::string& out_dir);

ExperimentConfig experiment_config_from_json_text(
    const std::string& text, const std::string& origin = "<string>");
ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace tofra
