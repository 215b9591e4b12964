#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tofra/scenario.hpp"

namespace tofra {

// Analytic average-throughput model. A link's throughput is the per-slot
// probability of a successful reception, obtained by enumerating every subset
// of its interferers, weighting each subset by its activation probability and
// multiplying by the closed-form capture probability for that subset.

// Exact enumeration is allowed up to this many interferers (~1e6 subsets);
// larger sets must be truncated to their dominant members first.
inline constexpr int kMaxExactInterferers = 20;

struct InterfererSet {
  Link link;
  std::vector<NodeId> members;  // ascending node id

  std::size_t size() const { return members.size(); }
};

// All transmission-capable nodes (flow sources and on-path relays) that can
// interfere with the link: everything except the link's own endpoints and
// sinks. Idle bystanders never transmit and are excluded. Throws if the link
// lies on no routed path.
InterfererSet interferer_set(const Scenario& scenario, Link link);

// The k interferers with the largest received power factor at the link's
// receiver; ties broken toward the lower node id. k >= L returns the full set.
InterfererSet dominant_interferers(const Scenario& scenario, Link link, int k);

// q_{i,j}: the transmitter's access probability, thinned by the receiver's
// own transmission probability when the receiver is not the flow destination
// (a busy half-duplex receiver cannot take the packet).
double effective_tx_factor(const Scenario& scenario, Link link,
                           const RateVector& rates);

// Precomputed evaluator for one link: capture probabilities for all 2^L
// interferer subsets are geometry-only and cached, so re-evaluating at many
// rate vectors costs O(2^L) multiplications.
class LinkThroughputTable {
 public:
  LinkThroughputTable(const Scenario& scenario, Link link,
                      const InterfererSet& included);
  LinkThroughputTable(const Scenario& scenario, Link link,
                      std::optional<int> k_dominant);

  double evaluate(const RateVector& rates) const;

  Link link() const { return link_; }
  const InterfererSet& interferers() const { return set_; }
  std::span<const double> subset_success() const { return subset_success_; }

 private:
  // How a node's transmission probability is resolved at evaluation time.
  struct QRef {
    int flow = -1;       // >= 0: rates[flow]
    double fixed = 0.0;  // used when flow < 0 (relay tx_prob / sink 0)
    double get(const RateVector& rates) const {
      return flow >= 0 ? rates[static_cast<std::size_t>(flow)] : fixed;
    }
  };

  void build(const Scenario& scenario);

  Link link_;
  InterfererSet set_;
  QRef tx_q_;
  QRef rx_q_;
  bool rx_is_destination_ = false;
  std::vector<QRef> member_q_;
  std::vector<double> subset_success_;  // indexed by interferer bitmask
};

// One-shot link throughput over the given interferer set.
double link_throughput(const Scenario& scenario, Link link,
                       const RateVector& rates, const InterfererSet& included);

// Flow throughput: bottleneck (minimum) link throughput along the path.
// k_dominant limits each link's interferer set; nullopt means all.
double path_throughput(const Scenario& scenario, const Flow& flow,
                       const RateVector& rates,
                       std::optional<int> k_dominant = std::nullopt);

// Aggregate throughput: sum of path throughputs over every routed flow.
double aggregate_throughput(const Scenario& scenario, const RateVector& rates,
                            std::optional<int> k_dominant = std::nullopt);

}  // namespace tofra
