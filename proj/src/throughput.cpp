#include "tofra/throughput.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "tofra/phy.hpp"

namespace tofra {

namespace {

bool on_some_path(const Scenario& scenario, Link link) {
  for (const Flow& f : scenario.flows) {
    const auto& p = f.path;
    for (std::size_t i = 0; i + 1 < p.size(); ++i)
      if (p[i] == link.tx && p[i + 1] == link.rx) return true;
  }
  return false;
}

}  // namespace

InterfererSet interferer_set(const Scenario& scenario, Link link) {
  if (!on_some_path(scenario, link))
    throw std::invalid_argument("interferer_set: link (" +
                                std::to_string(link.tx) + "," +
                                std::to_string(link.rx) +
                                ") lies on no routed path");

  InterfererSet out{link, {}};
  for (const Flow& f : scenario.flows) {
    const auto& p = f.path;
    // Sources and relays transmit; the path's last node is a sink.
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
      const NodeId id = p[i];
      if (id == link.tx || id == link.rx) continue;
      out.members.push_back(id);
    }
  }
  std::sort(out.members.begin(), out.members.end());
  return out;
}

InterfererSet dominant_interferers(const Scenario& scenario, Link link, int k) {
  if (k < 0) throw std::invalid_argument("dominant_interferers: k must be >= 0");
  InterfererSet full = interferer_set(scenario, link);
  if (static_cast<std::size_t>(k) >= full.size()) return full;

  const auto pos = scenario.positions();
  std::vector<std::pair<double, NodeId>> ranked;
  ranked.reserve(full.size());
  for (NodeId id : full.members)
    ranked.emplace_back(
        received_power_factor(pos[id], pos[link.rx], scenario.phy), id);
  // Strongest received power first; equal powers resolve to the lower id.
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  ranked.resize(static_cast<std::size_t>(k));

  InterfererSet out{link, {}};
  for (const auto& [g, id] : ranked) out.members.push_back(id);
  std::sort(out.members.begin(), out.members.end());
  return out;
}

double effective_tx_factor(const Scenario& scenario, Link link,
                           const RateVector& rates) {
  const double q_tx = scenario.node_q(link.tx, rates);
  if (scenario.node(link.rx).role == NodeRole::Sink) return q_tx;
  return q_tx * (1.0 - scenario.node_q(link.rx, rates));
}

LinkThroughputTable::LinkThroughputTable(const Scenario& scenario, Link link,
                                         const InterfererSet& included)
    : link_(link), set_(included) {
  build(scenario);
}

LinkThroughputTable::LinkThroughputTable(const Scenario& scenario, Link link,
                                         std::optional<int> k_dominant)
    : link_(link),
      set_(k_dominant ? dominant_interferers(scenario, link, *k_dominant)
                      : interferer_set(scenario, link)) {
  build(scenario);
}

void LinkThroughputTable::build(const Scenario& scenario) {
  const std::size_t count = set_.size();
  if (count > kMaxExactInterferers)
    throw std::invalid_argument(
        "link_throughput: " + std::to_string(count) +
        " interferers exceed the exact enumeration cap of " +
        std::to_string(kMaxExactInterferers) +
        "; truncate with dominant_interferers (K-dominant) first");

  auto q_ref = [&](NodeId id) {
    const Node& n = scenario.node(id);
    QRef r;
    if (n.role == NodeRole::Source) {
      auto f = scenario.flow_of_source(id);
      if (!f)
        throw std::invalid_argument("link_throughput: source node " +
                                    std::to_string(id) + " drives no flow");
      r.flow = static_cast<int>(*f);
    } else {
      r.fixed = n.role == NodeRole::Relay ? n.tx_prob : 0.0;
    }
    return r;
  };

  tx_q_ = q_ref(link_.tx);
  rx_is_destination_ = scenario.node(link_.rx).role == NodeRole::Sink;
  rx_q_ = rx_is_destination_ ? QRef{} : q_ref(link_.rx);
  member_q_.clear();
  for (NodeId id : set_.members) member_q_.push_back(q_ref(id));

  // Capture probability for every interferer subset; depends only on
  // geometry and gamma, not on the rates.
  const auto pos = scenario.positions();
  const PhyParams& phy = scenario.phy;
  const double g_sig = received_power_factor(pos[link_.tx], pos[link_.rx], phy);
  std::vector<double> ratio(count);  // gamma * g_k / g_sig, v uniform
  for (std::size_t n = 0; n < count; ++n)
    ratio[n] = phy.gamma *
               received_power_factor(pos[set_.members[n]], pos[link_.rx], phy) /
               g_sig;

  const double solo = std::exp(-phy.gamma * phy.eta / (phy.v * g_sig));
  subset_success_.assign(std::size_t{1} << count, solo);
  for (std::size_t n = 0; n < count; ++n) {
    const std::size_t bit = std::size_t{1} << n;
    const double factor = 1.0 / (1.0 + ratio[n]);
    for (std::size_t l = 0; l < bit; ++l)
      subset_success_[l | bit] = subset_success_[l] * factor;
  }
}

double LinkThroughputTable::evaluate(const RateVector& rates) const {
  double q_ij = tx_q_.get(rates);
  if (!rx_is_destination_) q_ij *= 1.0 - rx_q_.get(rates);
  if (q_ij == 0.0) return 0.0;

  const std::size_t count = set_.size();
  thread_local std::vector<double> weight;
  weight.assign(std::size_t{1} << count, 0.0);
  weight[0] = 1.0;
  for (std::size_t n = 0; n < count; ++n) {
    const std::size_t bit = std::size_t{1} << n;
    const double q_n = member_q_[n].get(rates);
    for (std::size_t l = 0; l < bit; ++l) {
      weight[l | bit] = weight[l] * q_n;
      weight[l] *= 1.0 - q_n;
    }
  }

  double sum = 0.0;
  for (std::size_t l = 0; l < weight.size(); ++l)
    sum += subset_success_[l] * weight[l];
  return q_ij * sum;
}

double link_throughput(const Scenario& scenario, Link link,
                       const RateVector& rates, const InterfererSet& included) {
  return LinkThroughputTable(scenario, link, included).evaluate(rates);
}

double path_throughput(const Scenario& scenario, const Flow& flow,
                       const RateVector& rates, std::optional<int> k_dominant) {
  double best = std::numeric_limits<double>::infinity();
  for (const Link& l : flow.links())
    best = std::min(best,
                    LinkThroughputTable(scenario, l, k_dominant).evaluate(rates));
  return std::isfinite(best) ? best : 0.0;
}

double aggregate_throughput(const Scenario& scenario, const RateVector& rates,
                            std::optional<int> k_dominant) {
  double sum = 0.0;
  for (const Flow& f : scenario.flows)
    if (f.routed()) sum += path_throughput(scenario, f, rates, k_dominant);
  return sum;
}

}  // namespace tofra
