#include "tofra/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include "tofra/phy.hpp"
#include "tofra/rng.hpp"

namespace tofra {

void GenParams::validate() const {
  if (node_count < 2) throw std::invalid_argument("gen: node_count must be >= 2");
  if (!(area_w > 0.0 && area_h > 0.0))
    throw std::invalid_argument("gen: area must be positive");
  if (min_flows < 1 || max_flows < min_flows)
    throw std::invalid_argument("gen: need 1 <= min_flows <= max_flows");
  if (!(p_min > 0.0 && p_min < 1.0))
    throw std::invalid_argument("gen: p_min must be in (0, 1)");
  if (!(relay_tx_prob > 0.0 && relay_tx_prob <= 1.0))
    throw std::invalid_argument("gen: relay_tx_prob must be in (0, 1]");
  if (max_retries < 1) throw std::invalid_argument("gen: max_retries must be >= 1");
  phy.validate();
}

Scenario generate_scenario(const GenParams& gen) {
  gen.validate();
  Rng rng(gen.seed);

  Scenario s;
  s.area_w = gen.area_w;
  s.area_h = gen.area_h;
  s.phy = gen.phy;
  s.nodes.resize(static_cast<std::size_t>(gen.node_count));
  for (int i = 0; i < gen.node_count; ++i) {
    Node& n = s.nodes[static_cast<std::size_t>(i)];
    n.id = static_cast<NodeId>(i);
    n.pos = {rng.uniform(0.0, gen.area_w), rng.uniform(0.0, gen.area_h)};
    n.role = NodeRole::Idle;
    n.tx_prob = gen.relay_tx_prob;
  }

  for (int attempt = 0;; ++attempt) {
    const std::uint64_t span =
        static_cast<std::uint64_t>(gen.max_flows - gen.min_flows) + 1;
    const int m = gen.min_flows + static_cast<int>(rng.uniform_int(span));
    if (2 * m <= gen.node_count) {
      // sample 2m distinct endpoints, pair them up in draw order
      std::vector<NodeId> pool(s.nodes.size());
      for (std::size_t i = 0; i < pool.size(); ++i)
        pool[i] = static_cast<NodeId>(i);
      for (int k = 0; k < 2 * m; ++k) {
        const std::size_t j =
            static_cast<std::size_t>(k) +
            static_cast<std::size_t>(rng.uniform_int(pool.size() - static_cast<std::size_t>(k)));
        std::swap(pool[static_cast<std::size_t>(k)], pool[j]);
      }
      s.flows.resize(static_cast<std::size_t>(m));
      for (int k = 0; k < m; ++k) {
        Flow& f = s.flows[static_cast<std::size_t>(k)];
        f.id = static_cast<std::uint32_t>(k);
        f.source = pool[static_cast<std::size_t>(2 * k)];
        f.destination = pool[static_cast<std::size_t>(2 * k + 1)];
        s.nodes[f.source].role = NodeRole::Source;
        s.nodes[f.destination].role = NodeRole::Sink;
      }
      return s;
    }
    if (attempt + 1 >= gen.max_retries)
      throw std::runtime_error(
          "generate_scenario: cannot place " + std::to_string(m) +
          " node-disjoint flows with " + std::to_string(gen.node_count) +
          " nodes after " + std::to_string(gen.max_retries) + " retries");
  }
}

namespace {

// Interference-free success probability of a potential edge.
double solo_success(const Position& a, const Position& b, const PhyParams& phy) {
  const double g = received_power_factor(a, b, phy);
  return std::exp(-phy.gamma * phy.eta / (phy.v * g));
}

// Dijkstra over the alive nodes; returns the least-cost path or empty.
std::vector<NodeId> least_cost_path(
    const std::vector<std::vector<std::pair<NodeId, double>>>& adj,
    const std::vector<std::uint8_t>& alive, NodeId src, NodeId dst) {
  const std::size_t n = adj.size();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<NodeId> prev(n, static_cast<NodeId>(n));
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[src] = 0.0;
  pq.push({0.0, src});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    if (u == dst) break;
    for (const auto& [v, w] : adj[u]) {
      if (!alive[v]) continue;
      const double nd = d + w;
      if (nd < dist[v]) {
        dist[v] = nd;
        prev[v] = u;
        pq.push({nd, v});
      }
    }
  }
  if (!std::isfinite(dist[dst])) return {};
  std::vector<NodeId> path;
  for (NodeId at = dst;; at = prev[at]) {
    path.push_back(at);
    if (at == src) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

PathSelection select_disjoint_paths(const Scenario& unrouted, double p_min,
                                    PathCost cost) {
  if (!(p_min > 0.0 && p_min < 1.0))
    throw std::invalid_argument("select_disjoint_paths: p_min must be in (0, 1)");

  const std::size_t n = unrouted.node_count();
  const auto pos = unrouted.positions();

  // connectivity graph: edges where the solo success probability clears p_min
  std::vector<std::vector<std::pair<NodeId, double>>> adj(n);
  bool any_edge = false;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = 0; j < n; ++j) {
      if (i == j || distance(pos[i], pos[j]) <= 0.0) continue;
      const double p = solo_success(pos[i], pos[j], unrouted.phy);
      if (p < p_min) continue;
      const double w = cost == PathCost::NegLogSuccess ? -std::log(p) : 1.0;
      adj[i].push_back({j, w});
      any_edge = true;
    }
  }
  if (!any_edge)
    throw std::runtime_error(
        "select_disjoint_paths: connectivity graph has no edges at p_min = " +
        std::to_string(p_min));

  PathSelection out;
  out.scenario = unrouted;
  for (Node& node : out.scenario.nodes) {
    node.role = NodeRole::Idle;
    // relay_tx_prob was stamped at generation; keep whatever tx_prob is set
  }

  std::vector<std::uint8_t> alive(n, 1);
  std::vector<Flow> routed;
  for (const Flow& f : unrouted.flows) {
    if (!alive[f.source] || !alive[f.destination]) {
      out.dropped_flows.push_back(f.id);
      continue;
    }
    auto path = least_cost_path(adj, alive, f.source, f.destination);
    if (path.empty()) {
      out.dropped_flows.push_back(f.id);
      continue;
    }
    Flow g = f;
    g.path = std::move(path);
    for (NodeId id : g.path) alive[id] = 0;
    routed.push_back(std::move(g));
  }

  out.scenario.flows = std::move(routed);
  for (Flow& f : out.scenario.flows) {
    out.scenario.nodes[f.source].role = NodeRole::Source;
    out.scenario.nodes[f.destination].role = NodeRole::Sink;
    for (std::size_t i = 1; i + 1 < f.path.size(); ++i)
      out.scenario.nodes[f.path[i]].role = NodeRole::Relay;
  }
  out.scenario.validate();
  return out;
}

Scenario generate_routed_scenario(const GenParams& gen, int min_routed_flows) {
  GenParams attempt = gen;
  for (int r = 0; r < gen.max_retries; ++r) {
    attempt.seed = r == 0 ? gen.seed
                          : derive_seed(gen.seed, {static_cast<std::uint64_t>(r)});
    const Scenario unrouted = generate_scenario(attempt);
    try {
      PathSelection sel = select_disjoint_paths(unrouted, gen.p_min);
      if (sel.scenario.flows.size() >=
          static_cast<std::size_t>(min_routed_flows))
        return std::move(sel.scenario);
    } catch (const std::runtime_error&) {
      // no edges at all; regenerate
    }
  }
  throw std::runtime_error(
      "generate_routed_scenario: no attempt out of " +
      std::to_string(gen.max_retries) + " yielded " +
      std::to_string(min_routed_flows) + " routed flow(s)");
}

}  // namespace tofra
