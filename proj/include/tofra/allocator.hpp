#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tofra/scenario.hpp"
#include "tofra/throughput.hpp"

namespace tofra {

// Flow-allocation optimization: maximize aggregate throughput subject to the
// bounded-delay constraint (a path's first-link throughput may not exceed any
// downstream link's throughput). The min over a path's links is smoothed with
// one auxiliary variable per multi-hop flow, bounded above by every link
// throughput on that path.
//
// Variable layout: x = [q per flow source (m)] ++ [q' per multi-hop flow].

struct SaParams {
  double initial_temperature = 1.0;
  double cooling = 0.95;        // geometric, in (0, 1)
  int iters_per_temperature = 200;
  double min_temperature = 1e-3;
  double step_sigma = 0.05;     // Gaussian step scale per variable
  int restarts = 8;
  double tolerance = 1e-6;      // constraint tolerance
  double penalty_weight = 0.0;  // > 0 switches to penalized acceptance
  // Deterministic pattern-search refinement of the best point found; keeps
  // repeated solves of structurally identical problems at the same optimum.
  bool polish = true;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SolverStats {
  std::int64_t evaluations = 0;
  int restarts = 0;
  std::int64_t best_found_at = 0;  // evaluation index of the incumbent
  double wall_seconds = 0.0;
};

struct AllocationResult {
  RateVector rates;          // per flow
  std::vector<double> aux;   // q' per multi-hop flow, in flow order
  double predicted_aat = 0.0;
  bool feasible = false;
  SolverStats stats;
};

class AllocationProblem {
 public:
  AllocationProblem(const Scenario& scenario, std::optional<int> k_dominant);

  const Scenario& scenario() const { return scenario_; }
  std::optional<int> k_dominant() const { return k_; }

  std::size_t num_flows() const { return scenario_.flows.size(); }
  std::size_t num_aux() const { return aux_flows_.size(); }
  std::size_t dimension() const { return num_flows() + num_aux(); }

  // Index of flow k's auxiliary variable within the aux block, -1 if the
  // flow is single-hop.
  int aux_index(std::size_t flow) const { return aux_index_of_flow_[flow]; }
  const std::vector<std::size_t>& aux_flows() const { return aux_flows_; }

  std::size_t num_delay_constraints() const;   // S2
  std::size_t num_link_bound_constraints() const;  // S4

  // Link throughputs at the given source rates, flow order then hop order.
  void link_throughputs(const RateVector& rates, std::vector<double>& out) const;
  std::span<const LinkThroughputTable> flow_tables(std::size_t flow) const;

  // Full objective / worst constraint violation at a complete point
  // (rates ++ aux). Violation is the max of box excess, first-link-vs-
  // downstream excess and aux-vs-link excess.
  double objective(std::span<const double> x) const;
  double max_violation(std::span<const double> x) const;
  std::pair<double, double> evaluate(std::span<const double> x) const;

  // Reduced evaluation over source rates only: each auxiliary variable is set
  // to its optimal value min(1, min link throughput of its path), which
  // satisfies its own bounds by construction, so only the delay constraints
  // and the rate boxes can be violated.
  struct ReducedEval {
    double objective = 0.0;
    double violation = 0.0;
  };
  ReducedEval evaluate_reduced(const RateVector& rates,
                               std::vector<double>& link_scratch) const;
  std::vector<double> optimal_aux(const RateVector& rates) const;

 private:
  Scenario scenario_;
  std::optional<int> k_;
  std::vector<LinkThroughputTable> tables_;     // all path links
  std::vector<std::size_t> flow_link_begin_;    // per flow, offsets into tables_
  std::vector<int> aux_index_of_flow_;
  std::vector<std::size_t> aux_flows_;
};

AllocationProblem build_problem(const Scenario& scenario,
                                std::optional<int> k_dominant = std::nullopt);

// Simulated annealing over the source rates, feasibility-preserving walk from
// the all-zeros point (always feasible). Deterministic for a given seed.
// walk_mask restricts which source variables move (empty = all of them).
AllocationResult solve_sa(const AllocationProblem& problem, const SaParams& sa,
                          std::span<const bool> walk_mask = {});

// Exhaustive grid search oracle over the source rates at the given resolution.
// Refuses problems with more than 3 source variables.
AllocationResult solve_grid(const AllocationProblem& problem, double resolution,
                            double tolerance = 1e-6);

// Product over the path's links of the interference-free success probability.
double end_to_end_success_probability(const Scenario& scenario, const Flow& flow);

// Best-Path: optimize only the flow whose path has the highest end-to-end
// success probability (ties toward the lower flow id); all other rates are 0.
AllocationResult baseline_best_path(const Scenario& scenario,
                                    std::optional<int> k_dominant,
                                    const SaParams& sa);

// Full MultiPath: one packet per slot on every path, constraints ignored.
RateVector baseline_fmp(const Scenario& scenario);

// Round-Robin: sources take turns, one per slot.
RoundRobinSchedule baseline_rr(const Scenario& scenario);

}  // namespace tofra
