#include "tofra/allocator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "tofra/phy.hpp"
#include "tofra/rng.hpp"

namespace tofra {

void SaParams::validate() const {
  if (!(initial_temperature > 0.0))
    throw std::invalid_argument("sa: initial_temperature must be > 0");
  if (!(cooling > 0.0 && cooling < 1.0))
    throw std::invalid_argument("sa: cooling must be in (0, 1)");
  if (iters_per_temperature < 1)
    throw std::invalid_argument("sa: iters_per_temperature must be >= 1");
  if (!(min_temperature > 0.0))
    throw std::invalid_argument("sa: min_temperature must be > 0");
  if (!(step_sigma > 0.0)) throw std::invalid_argument("sa: step_sigma must be > 0");
  if (restarts < 1) throw std::invalid_argument("sa: restarts must be >= 1");
  if (!(tolerance >= 0.0)) throw std::invalid_argument("sa: tolerance must be >= 0");
  if (!(penalty_weight >= 0.0))
    throw std::invalid_argument("sa: penalty_weight must be >= 0");
}

AllocationProblem::AllocationProblem(const Scenario& scenario,
                                     std::optional<int> k_dominant)
    : scenario_(scenario), k_(k_dominant) {
  scenario_.validate();
  if (scenario_.flows.empty())
    throw std::invalid_argument("build_problem: scenario has no flows");

  flow_link_begin_.reserve(scenario_.flows.size() + 1);
  aux_index_of_flow_.assign(scenario_.flows.size(), -1);
  for (std::size_t k = 0; k < scenario_.flows.size(); ++k) {
    const Flow& f = scenario_.flows[k];
    if (!f.routed())
      throw std::invalid_argument("build_problem: flow " + std::to_string(f.id) +
                                  " has no path");
    flow_link_begin_.push_back(tables_.size());
    for (const Link& l : f.links()) tables_.emplace_back(scenario_, l, k_);
    if (f.multi_hop()) {
      aux_index_of_flow_[k] = static_cast<int>(aux_flows_.size());
      aux_flows_.push_back(k);
    }
  }
  flow_link_begin_.push_back(tables_.size());
}

std::size_t AllocationProblem::num_delay_constraints() const {
  std::size_t n = 0;
  for (const Flow& f : scenario_.flows)
    if (f.multi_hop()) n += f.hop_count() - 1;
  return n;
}

std::size_t AllocationProblem::num_link_bound_constraints() const {
  std::size_t n = 0;
  for (const Flow& f : scenario_.flows)
    if (f.multi_hop()) n += f.hop_count();
  return n;
}

void AllocationProblem::link_throughputs(const RateVector& rates,
                                         std::vector<double>& out) const {
  out.resize(tables_.size());
  for (std::size_t i = 0; i < tables_.size(); ++i)
    out[i] = tables_[i].evaluate(rates);
}

std::span<const LinkThroughputTable> AllocationProblem::flow_tables(
    std::size_t flow) const {
  return {tables_.data() + flow_link_begin_[flow],
          flow_link_begin_[flow + 1] - flow_link_begin_[flow]};
}

namespace {
double box_excess(double x) { return std::max(std::max(0.0 - x, x - 1.0), 0.0); }
}  // namespace

double AllocationProblem::objective(std::span<const double> x) const {
  if (x.size() != dimension())
    throw std::invalid_argument("evaluate: point has wrong dimension");
  const RateVector rates(x.begin(), x.begin() + num_flows());
  double obj = 0.0;
  for (std::size_t k = 0; k < num_flows(); ++k) {
    if (aux_index_of_flow_[k] >= 0)
      obj += x[num_flows() + static_cast<std::size_t>(aux_index_of_flow_[k])];
    else
      obj += flow_tables(k)[0].evaluate(rates);
  }
  return obj;
}

double AllocationProblem::max_violation(std::span<const double> x) const {
  if (x.size() != dimension())
    throw std::invalid_argument("evaluate: point has wrong dimension");
  const RateVector rates(x.begin(), x.begin() + num_flows());
  double worst = 0.0;
  for (double xi : x) worst = std::max(worst, box_excess(xi));

  std::vector<double> thr;
  link_throughputs(rates, thr);
  for (std::size_t k = 0; k < num_flows(); ++k) {
    const std::size_t begin = flow_link_begin_[k];
    const std::size_t end = flow_link_begin_[k + 1];
    // Delay constraints: first link throughput limited by every downstream link.
    for (std::size_t i = begin + 1; i < end; ++i)
      worst = std::max(worst, thr[begin] - thr[i]);
    // Auxiliary bounds: q' below every link throughput of the path.
    if (aux_index_of_flow_[k] >= 0) {
      const double aux =
          x[num_flows() + static_cast<std::size_t>(aux_index_of_flow_[k])];
      for (std::size_t i = begin; i < end; ++i)
        worst = std::max(worst, aux - thr[i]);
    }
  }
  return worst;
}

std::pair<double, double> AllocationProblem::evaluate(
    std::span<const double> x) const {
  return {objective(x), max_violation(x)};
}

AllocationProblem::ReducedEval AllocationProblem::evaluate_reduced(
    const RateVector& rates, std::vector<double>& link_scratch) const {
  link_throughputs(rates, link_scratch);
  ReducedEval ev;
  for (double q : rates) ev.violation = std::max(ev.violation, box_excess(q));
  for (std::size_t k = 0; k < num_flows(); ++k) {
    const std::size_t begin = flow_link_begin_[k];
    const std::size_t end = flow_link_begin_[k + 1];
    if (aux_index_of_flow_[k] < 0) {
      ev.objective += link_scratch[begin];
      continue;
    }
    double path_min = link_scratch[begin];
    for (std::size_t i = begin + 1; i < end; ++i) {
      ev.violation = std::max(ev.violation, link_scratch[begin] - link_scratch[i]);
      path_min = std::min(path_min, link_scratch[i]);
    }
    ev.objective += std::clamp(path_min, 0.0, 1.0);
  }
  return ev;
}

std::vector<double> AllocationProblem::optimal_aux(const RateVector& rates) const {
  std::vector<double> thr;
  link_throughputs(rates, thr);
  std::vector<double> aux;
  aux.reserve(aux_flows_.size());
  for (std::size_t k : aux_flows_) {
    double path_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = flow_link_begin_[k]; i < flow_link_begin_[k + 1]; ++i)
      path_min = std::min(path_min, thr[i]);
    aux.push_back(std::clamp(path_min, 0.0, 1.0));
  }
  return aux;
}

AllocationProblem build_problem(const Scenario& scenario,
                                std::optional<int> k_dominant) {
  return AllocationProblem(scenario, k_dominant);
}

AllocationResult solve_sa(const AllocationProblem& problem, const SaParams& sa,
                          std::span<const bool> walk_mask) {
  sa.validate();
  const std::size_t m = problem.num_flows();
  if (!walk_mask.empty() && walk_mask.size() != m)
    throw std::invalid_argument("solve_sa: walk mask has wrong dimension");
  const auto t0 = std::chrono::steady_clock::now();

  const bool penalized = sa.penalty_weight > 0.0;
  RateVector best(m, 0.0);
  double best_obj = 0.0;
  std::int64_t best_at = 0;
  std::int64_t evals = 0;
  std::vector<double> scratch;

  for (int r = 0; r < sa.restarts; ++r) {
    Rng rng(derive_seed(sa.seed, {static_cast<std::uint64_t>(r)}));
    RateVector x(m, 0.0);
    auto ev = problem.evaluate_reduced(x, scratch);
    ++evals;
    double score = penalized ? ev.objective - sa.penalty_weight * ev.violation
                             : ev.objective;
    RateVector cand(m);
    for (double t = sa.initial_temperature; t > sa.min_temperature;
         t *= sa.cooling) {
      for (int it = 0; it < sa.iters_per_temperature; ++it) {
        for (std::size_t d = 0; d < m; ++d) {
          if (!walk_mask.empty() && !walk_mask[d]) {
            cand[d] = 0.0;
            continue;
          }
          cand[d] = std::clamp(x[d] + rng.gaussian(0.0, sa.step_sigma), 0.0, 1.0);
        }
        const auto cev = problem.evaluate_reduced(cand, scratch);
        ++evals;
        const bool cand_feasible = cev.violation <= sa.tolerance;
        if (!penalized && !cand_feasible) continue;
        const double cscore =
            penalized ? cev.objective - sa.penalty_weight * cev.violation
                      : cev.objective;
        if (cscore >= score || rng.uniform() < std::exp((cscore - score) / t)) {
          x = cand;
          score = cscore;
          if (cand_feasible && cev.objective > best_obj) {
            best = x;
            best_obj = cev.objective;
            best_at = evals;
          }
        }
      }
    }
  }

  if (sa.polish) {
    // coordinate pattern search with shrinking steps; purely deterministic
    RateVector cand(m);
    for (double step : {0.02, 0.005, 0.001, 0.0002}) {
      for (int sweep = 0; sweep < 200; ++sweep) {
        bool improved = false;
        for (std::size_t d = 0; d < m; ++d) {
          if (!walk_mask.empty() && !walk_mask[d]) continue;
          for (double dir : {1.0, -1.0}) {
            cand = best;
            cand[d] = std::clamp(best[d] + dir * step, 0.0, 1.0);
            if (cand[d] == best[d]) continue;
            const auto ev = problem.evaluate_reduced(cand, scratch);
            ++evals;
            if (ev.violation <= sa.tolerance && ev.objective > best_obj) {
              best = cand;
              best_obj = ev.objective;
              best_at = evals;
              improved = true;
            }
          }
        }
        if (!improved) break;
      }
    }
  }

  AllocationResult out;
  out.rates = best;
  out.aux = problem.optimal_aux(best);
  out.predicted_aat = best_obj;
  out.feasible = true;  // the all-zeros start point is always feasible
  out.stats.evaluations = evals;
  out.stats.restarts = sa.restarts;
  out.stats.best_found_at = best_at;
  out.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

AllocationResult solve_grid(const AllocationProblem& problem, double resolution,
                            double tolerance) {
  if (!(resolution > 0.0 && resolution <= 1.0))
    throw std::invalid_argument("solve_grid: resolution must be in (0, 1]");
  const std::size_t m = problem.num_flows();
  if (m > 3)
    throw std::invalid_argument(
        "solve_grid: refusing exhaustive search over " + std::to_string(m) +
        " source variables (max 3)");
  const auto t0 = std::chrono::steady_clock::now();

  const std::int64_t steps = std::llround(1.0 / resolution);
  RateVector x(m, 0.0);
  RateVector best(m, 0.0);
  double best_obj = 0.0;
  std::int64_t evals = 0;
  std::int64_t best_at = 0;
  std::vector<double> scratch;

  std::vector<std::int64_t> idx(m, 0);
  for (;;) {
    for (std::size_t d = 0; d < m; ++d)
      x[d] = static_cast<double>(idx[d]) / static_cast<double>(steps);
    const auto ev = problem.evaluate_reduced(x, scratch);
    ++evals;
    if (ev.violation <= tolerance && ev.objective > best_obj) {
      best = x;
      best_obj = ev.objective;
      best_at = evals;
    }
    // odometer increment, last variable fastest
    std::size_t d = m;
    while (d > 0) {
      --d;
      if (++idx[d] <= steps) break;
      idx[d] = 0;
      if (d == 0) {
        AllocationResult out;
        out.rates = best;
        out.aux = problem.optimal_aux(best);
        out.predicted_aat = best_obj;
        out.feasible = true;
        out.stats.evaluations = evals;
        out.stats.restarts = 1;
        out.stats.best_found_at = best_at;
        out.stats.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        return out;
      }
    }
  }
}

double end_to_end_success_probability(const Scenario& scenario, const Flow& flow) {
  const auto pos = scenario.positions();
  double p = 1.0;
  for (const Link& l : flow.links()) {
    const NodeId active[] = {l.tx};
    p *= success_probability(l.tx, l.rx, active, pos, scenario.phy);
  }
  return p;
}

AllocationResult baseline_best_path(const Scenario& scenario,
                                    std::optional<int> k_dominant,
                                    const SaParams& sa) {
  if (scenario.flows.empty())
    throw std::invalid_argument("baseline_best_path: scenario has no flows");
  std::size_t pick = 0;
  double best_p = -1.0;
  for (std::size_t k = 0; k < scenario.flows.size(); ++k) {
    const double p = end_to_end_success_probability(scenario, scenario.flows[k]);
    if (p > best_p) {  // ties keep the lower flow id
      best_p = p;
      pick = k;
    }
  }
  AllocationProblem problem(scenario, k_dominant);
  const auto mask = std::make_unique<bool[]>(scenario.flows.size());
  mask[pick] = true;
  return solve_sa(problem, sa, {mask.get(), scenario.flows.size()});
}

RateVector baseline_fmp(const Scenario& scenario) {
  return RateVector(scenario.flows.size(), 1.0);
}

RoundRobinSchedule baseline_rr(const Scenario& scenario) {
  if (scenario.flows.empty())
    throw std::invalid_argument("baseline_rr: scenario has no flows");
  return RoundRobinSchedule{scenario.flows.size()};
}

}  // namespace tofra
