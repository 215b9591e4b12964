#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tofra {

using NodeId = std::uint32_t;

// Node ids are dense: node k lives at scenario.nodes[k].
struct Position {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Position& a, const Position& b);

enum class NodeRole { Source, Relay, Sink, Idle };

const char* to_string(NodeRole role);
std::optional<NodeRole> role_from_string(const std::string& s);

// Physical-layer parameters, uniform across the network. gamma/eta are
// per-receiver in principle; a single value is used throughout.
struct PhyParams {
  double gamma = 1.0;    // SINR capture threshold
  double eta = 7e-11;    // receiver noise power [W]
  double p_tx = 0.1;     // transmit power [W]
  double alpha = 4.0;    // path loss exponent
  double v = 1.0;        // mean of the exponential fading gain, per link

  void validate() const;  // throws std::invalid_argument
};

struct Node {
  NodeId id = 0;
  Position pos;
  NodeRole role = NodeRole::Idle;
  double tx_prob = 0.5;  // relay access probability; ignored for other roles
};

// Directed link (tx -> rx).
struct Link {
  NodeId tx = 0;
  NodeId rx = 0;

  friend bool operator==(const Link&, const Link&) = default;
  friend bool operator<(const Link& a, const Link& b) {
    return a.tx != b.tx ? a.tx < b.tx : a.rx < b.rx;
  }
};

// One unicast flow pinned to a single source-routed path. An empty path means
// the flow has not been routed yet.
struct Flow {
  std::uint32_t id = 0;
  NodeId source = 0;
  NodeId destination = 0;
  std::vector<NodeId> path;  // source first, destination last when routed

  bool routed() const { return !path.empty(); }
  bool multi_hop() const { return path.size() > 2; }
  std::size_t hop_count() const { return path.empty() ? 0 : path.size() - 1; }
  std::vector<Link> links() const;
};

// One transmission probability per flow source, indexed by flow order.
using RateVector = std::vector<double>;

// Deterministic round-robin source schedule: source k transmits (at rate 1)
// only in slots s with s % num_flows == k.
struct RoundRobinSchedule {
  std::size_t num_flows = 1;

  bool active(std::size_t flow, std::uint64_t slot) const {
    return slot % num_flows == flow;
  }
};

struct Scenario {
  double area_w = 500.0;
  double area_h = 500.0;
  PhyParams phy;
  std::vector<Node> nodes;  // nodes[k].id == k
  std::vector<Flow> flows;

  std::size_t node_count() const { return nodes.size(); }
  const Node& node(NodeId id) const { return nodes.at(id); }

  std::vector<Position> positions() const;

  // Per-slot transmission probability of a node: flow rate for sources,
  // fixed access probability for relays, 0 for sinks and idle nodes.
  double node_q(NodeId id, const RateVector& rates) const;

  std::optional<std::size_t> flow_of_source(NodeId id) const;
  std::optional<std::size_t> flow_of_relay(NodeId id) const;

  // Every link of every routed path, in flow order then hop order.
  std::vector<Link> path_links() const;

  void validate() const;  // throws std::invalid_argument with field context
};

}  // namespace tofra
