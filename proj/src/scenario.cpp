#include "tofra/scenario.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace tofra {

double distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

const char* to_string(NodeRole role) {
  switch (role) {
    case NodeRole::Source: return "source";
    case NodeRole::Relay: return "relay";
    case NodeRole::Sink: return "sink";
    case NodeRole::Idle: return "idle";
  }
  return "?";
}

std::optional<NodeRole> role_from_string(const std::string& s) {
  if (s == "source") return NodeRole::Source;
  if (s == "relay") return NodeRole::Relay;
  if (s == "sink") return NodeRole::Sink;
  if (s == "idle") return NodeRole::Idle;
  return std::nullopt;
}

void PhyParams::validate() const {
  if (!(gamma > 0.0)) throw std::invalid_argument("phy: gamma must be > 0");
  if (!(eta >= 0.0)) throw std::invalid_argument("phy: eta must be >= 0");
  if (!(p_tx > 0.0)) throw std::invalid_argument("phy: p_tx must be > 0");
  if (!(alpha >= 2.0 && alpha <= 6.0))
    throw std::invalid_argument("phy: alpha must be in [2, 6]");
  if (!(v > 0.0)) throw std::invalid_argument("phy: v must be > 0");
}

std::vector<Link> Flow::links() const {
  std::vector<Link> out;
  if (path.size() < 2) return out;
  out.reserve(path.size() - 1);
  for (std::size_t i = 0; i + 1 < path.size(); ++i)
    out.push_back({path[i], path[i + 1]});
  return out;
}

std::vector<Position> Scenario::positions() const {
  std::vector<Position> pos(nodes.size());
  for (const Node& n : nodes) pos[n.id] = n.pos;
  return pos;
}

double Scenario::node_q(NodeId id, const RateVector& rates) const {
  const Node& n = node(id);
  switch (n.role) {
    case NodeRole::Source: {
      auto f = flow_of_source(id);
      if (!f || *f >= rates.size())
        throw std::invalid_argument("node_q: no rate entry for source node " +
                                    std::to_string(id));
      return rates[*f];
    }
    case NodeRole::Relay: return n.tx_prob;
    case NodeRole::Sink:
    case NodeRole::Idle: return 0.0;
  }
  return 0.0;
}

std::optional<std::size_t> Scenario::flow_of_source(NodeId id) const {
  for (std::size_t k = 0; k < flows.size(); ++k)
    if (flows[k].source == id) return k;
  return std::nullopt;
}

std::optional<std::size_t> Scenario::flow_of_relay(NodeId id) const {
  for (std::size_t k = 0; k < flows.size(); ++k) {
    const auto& p = flows[k].path;
    for (std::size_t i = 1; i + 1 < p.size(); ++i)
      if (p[i] == id) return k;
  }
  return std::nullopt;
}

std::vector<Link> Scenario::path_links() const {
  std::vector<Link> out;
  for (const Flow& f : flows)
    for (const Link& l : f.links()) out.push_back(l);
  return out;
}

void Scenario::validate() const {
  if (!(area_w > 0.0 && area_h > 0.0))
    throw std::invalid_argument("scenario: area must be positive");
  phy.validate();

  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Node& n = nodes[k];
    if (n.id != k)
      throw std::invalid_argument("scenario: nodes[" + std::to_string(k) +
                                  "] has id " + std::to_string(n.id) +
                                  "; ids must be dense 0..N-1 in order");
    if (!std::isfinite(n.pos.x) || !std::isfinite(n.pos.y))
      throw std::invalid_argument("scenario: nodes[" + std::to_string(k) +
                                  "] has non-finite position");
    if (n.role == NodeRole::Relay && !(n.tx_prob > 0.0 && n.tx_prob <= 1.0))
      throw std::invalid_argument("scenario: relay node " + std::to_string(k) +
                                  " needs tx_prob in (0, 1]");
  }

  // Paths must be node-disjoint on their transmitting nodes; destinations may
  // coincide (a shared sink never transmits).
  std::unordered_set<NodeId> used_tx;
  std::unordered_set<NodeId> used_sink;
  std::set<std::uint32_t> flow_ids;
  for (std::size_t k = 0; k < flows.size(); ++k) {
    const Flow& f = flows[k];
    const std::string tag = "scenario: flows[" + std::to_string(k) + "]";
    if (!flow_ids.insert(f.id).second)
      throw std::invalid_argument(tag + ": duplicate flow id");
    if (f.source >= nodes.size() || f.destination >= nodes.size())
      throw std::invalid_argument(tag + ": endpoint node out of range");
    if (!f.routed()) continue;

    if (f.path.size() < 2)
      throw std::invalid_argument(tag + ": path needs at least 2 nodes");
    if (f.path.front() != f.source)
      throw std::invalid_argument(tag + ": path must start at the source");
    if (f.path.back() != f.destination)
      throw std::invalid_argument(tag + ": path must end at the destination");

    std::unordered_set<NodeId> seen;
    for (std::size_t i = 0; i < f.path.size(); ++i) {
      const NodeId id = f.path[i];
      if (id >= nodes.size())
        throw std::invalid_argument(tag + ": path node out of range");
      if (!seen.insert(id).second)
        throw std::invalid_argument(tag + ": path repeats node " +
                                    std::to_string(id));
      const bool terminal = i + 1 == f.path.size();
      if (used_tx.count(id) || (terminal ? false : used_sink.count(id)))
        throw std::invalid_argument(tag + ": node " + std::to_string(id) +
                                    " is shared with another path");
      (terminal ? used_sink : used_tx).insert(id);
    }

    if (node(f.source).role != NodeRole::Source)
      throw std::invalid_argument(tag + ": source node must have role source");
    if (node(f.destination).role != NodeRole::Sink)
      throw std::invalid_argument(tag + ": destination node must have role sink");
    for (std::size_t i = 1; i + 1 < f.path.size(); ++i)
      if (node(f.path[i]).role != NodeRole::Relay)
        throw std::invalid_argument(tag + ": interior path node " +
                                    std::to_string(f.path[i]) +
                                    " must have role relay");
  }
}

}  // namespace tofra
