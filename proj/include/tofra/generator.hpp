#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tofra/scenario.hpp"

namespace tofra {

// Random scenario generation and node-disjoint path selection.

struct GenParams {
  int node_count = 50;
  double area_w = 500.0;
  double area_h = 500.0;
  int min_flows = 1;
  int max_flows = 10;
  double p_min = 0.9;        // edge exists when the solo success prob >= p_min
  double relay_tx_prob = 0.5;
  PhyParams phy;
  std::uint64_t seed = 1;
  int max_retries = 20;

  void validate() const;
};

// Uniform node placement, flow count uniform in [min_flows, max_flows],
// source/destination pairs drawn without node reuse across flows. Paths are
// not selected yet (flows carry empty paths, endpoint roles are set).
// Deterministic for a given seed.
Scenario generate_scenario(const GenParams& gen);

enum class PathCost {
  NegLogSuccess,  // least cost == highest end-to-end success probability
  HopCount,
};

struct PathSelection {
  Scenario scenario;                        // routed flows only, roles updated
  std::vector<std::uint32_t> dropped_flows;  // flow ids with no feasible path
};

// Iterative least-cost search: flows are routed in declared order with
// Dijkstra over the residual graph, and every node of a found path is removed
// before the next flow is considered, which makes the path set node-disjoint.
// Edges connect node pairs whose interference-free success probability is at
// least p_min; flows without a path are dropped (and reported).
PathSelection select_disjoint_paths(const Scenario& unrouted, double p_min,
                                    PathCost cost = PathCost::NegLogSuccess);

// Generation followed by path selection, regenerating (with derived seeds) a
// bounded number of times until at least min_routed_flows survive. Throws
// when every retry fails.
Scenario generate_routed_scenario(const GenParams& gen,
                                  int min_routed_flows = 1);

}  // namespace tofra
