#include "tofra/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "tofra/phy.hpp"
#include "tofra/rng.hpp"

namespace tofra {

void SimConfig::validate() const {
  if (total_slots == 0) throw std::invalid_argument("sim: total_slots must be > 0");
  if (warmup_slots >= total_slots)
    throw std::invalid_argument("sim: warmup_slots must be < total_slots");
  if (max_retransmits && *max_retransmits < 1)
    throw std::invalid_argument("sim: max_retransmits must be >= 1 or infinite");
  if (relay_access.kind == RelayAccess::Kind::UniformBackoff &&
      relay_access.contention_window < 0)
    throw std::invalid_argument("sim: contention_window must be >= 0");
}

SourcePolicy SourcePolicy::from_rates(RateVector r) {
  SourcePolicy p;
  p.kind = Kind::Rates;
  p.rates = std::move(r);
  return p;
}

SourcePolicy SourcePolicy::round_robin(RoundRobinSchedule s) {
  SourcePolicy p;
  p.kind = Kind::RoundRobin;
  p.schedule = s;
  return p;
}

namespace {

struct Packet {
  std::uint32_t flow = 0;
  std::uint64_t created = 0;  // slot the packet entered the network
  std::uint32_t fails = 0;
  bool dummy = false;
};

struct SourceState {
  NodeId node = 0;
  std::uint32_t flow = 0;
  NodeId next_hop = 0;
  Packet hol;
};

struct RelayState {
  NodeId node = 0;
  std::uint32_t flow = 0;
  NodeId next_hop = 0;
  double tx_prob = 0.5;
  std::deque<Packet> queue;
  std::uint64_t real_in_queue = 0;
  bool seen_real = false;
  std::int64_t backoff = -1;  // UniformBackoff mode; -1 = not yet drawn

  // queue statistics
  double qlen_sum = 0.0;  // post-warmup
  std::uint64_t peak = 0;
  // least-squares accumulators over the second half of the run
  double n = 0, st = 0, stt = 0, sy = 0, sty = 0;
};

struct Transmission {
  NodeId tx = 0;
  NodeId rx = 0;
  int source_idx = -1;  // exactly one of source_idx / relay_idx is >= 0
  int relay_idx = -1;
  std::size_t link_idx = 0;
};

}  // namespace

SimMetrics run_simulation(const Scenario& scenario, const SourcePolicy& policy,
                          const SimConfig& config) {
  scenario.validate();
  config.validate();
  const std::size_t m = scenario.flows.size();
  if (m == 0) throw std::invalid_argument("sim: scenario has no flows");
  for (const Flow& f : scenario.flows)
    if (!f.routed())
      throw std::invalid_argument("sim: flow " + std::to_string(f.id) +
                                  " has no path");
  if (policy.kind == SourcePolicy::Kind::Rates) {
    if (policy.rates.size() != m)
      throw std::invalid_argument("sim: policy has " +
                                  std::to_string(policy.rates.size()) +
                                  " rates for " + std::to_string(m) + " flows");
    for (double q : policy.rates)
      if (!(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("sim: rates must lie in [0, 1]");
  } else if (policy.schedule.num_flows != m) {
    throw std::invalid_argument("sim: round-robin schedule covers " +
                                std::to_string(policy.schedule.num_flows) +
                                " flows, scenario has " + std::to_string(m));
  }

  // --- static topology tables ---
  const auto pos = scenario.positions();
  const PhyParams& phy = scenario.phy;
  const std::size_t n_nodes = scenario.node_count();

  std::vector<SourceState> sources(m);
  std::vector<RelayState> relays;
  std::vector<Link> links = scenario.path_links();
  std::vector<std::size_t> link_index(n_nodes, SIZE_MAX);  // by transmitter
  for (std::size_t i = 0; i < links.size(); ++i) link_index[links[i].tx] = i;

  for (std::size_t k = 0; k < m; ++k) {
    const Flow& f = scenario.flows[k];
    sources[k] = {f.source, static_cast<std::uint32_t>(k), f.path[1], {}};
    for (std::size_t h = 1; h + 1 < f.path.size(); ++h) {
      RelayState r;
      r.node = f.path[h];
      r.flow = static_cast<std::uint32_t>(k);
      r.next_hop = f.path[h + 1];
      r.tx_prob = scenario.node(f.path[h]).tx_prob;
      relays.push_back(std::move(r));
    }
  }
  std::sort(relays.begin(), relays.end(),
            [](const RelayState& a, const RelayState& b) { return a.node < b.node; });
  std::vector<int> relay_of_node(n_nodes, -1);
  for (std::size_t ri = 0; ri < relays.size(); ++ri)
    relay_of_node[relays[ri].node] = static_cast<int>(ri);

  // Received power factors, filled for (transmit-capable, on-path receiver)
  // pairs only. Degenerate geometry is rejected here, up front.
  std::vector<bool> can_transmit(n_nodes, false), is_receiver(n_nodes, false);
  for (const auto& s : sources) can_transmit[s.node] = true;
  for (const auto& r : relays) can_transmit[r.node] = true;
  for (const Link& l : links) is_receiver[l.rx] = true;
  std::vector<double> g(n_nodes * n_nodes, 0.0);
  for (NodeId t = 0; t < n_nodes; ++t) {
    if (!can_transmit[t]) continue;
    for (NodeId r = 0; r < n_nodes; ++r)
      if (is_receiver[r] && r != t)
        g[t * n_nodes + r] = received_power_factor(pos[t], pos[r], phy);
  }

  Rng rng(config.seed);

  // --- per-run state & metrics ---
  SimMetrics metrics;
  metrics.total_slots = config.total_slots;
  metrics.measured_slots = config.total_slots - config.warmup_slots;
  metrics.flows.resize(m);
  metrics.links.resize(links.size());
  for (std::size_t i = 0; i < links.size(); ++i) metrics.links[i].link = links[i];

  std::vector<std::vector<double>> delays(m);

  for (std::size_t k = 0; k < m; ++k) {
    sources[k].hol = Packet{static_cast<std::uint32_t>(k), 0, 0, false};
    metrics.flows[k].injected = 1;
  }

  const std::uint64_t half_start = config.total_slots / 2;
  std::vector<std::uint8_t> transmitting(n_nodes, 0);
  std::vector<Transmission> txs;
  std::vector<NodeId> receivers;
  std::vector<double> fade(n_nodes, 0.0);
  std::vector<NodeId> active;

  auto mint = [&](std::size_t k, std::uint64_t slot) {
    sources[k].hol = Packet{static_cast<std::uint32_t>(k), slot + 1, 0, false};
    ++metrics.flows[k].injected;
  };

  for (std::uint64_t slot = 0; slot < config.total_slots; ++slot) {
    const bool measure = slot >= config.warmup_slots;
    txs.clear();

    // (1) source access decisions
    for (std::size_t k = 0; k < m; ++k) {
      bool send;
      if (policy.kind == SourcePolicy::Kind::Rates)
        send = rng.bernoulli(policy.rates[k]);
      else
        send = policy.schedule.active(k, slot);
      if (send)
        txs.push_back({sources[k].node, sources[k].next_hop,
                       static_cast<int>(k), -1, link_index[sources[k].node]});
    }

    // (2) relay access decisions (ascending node id)
    for (std::size_t ri = 0; ri < relays.size(); ++ri) {
      RelayState& r = relays[ri];
      if (config.saturated_relays && r.queue.empty() && r.seen_real)
        r.queue.push_back(Packet{r.flow, slot, 0, true});
      if (r.queue.empty()) continue;
      bool send;
      if (config.relay_access.kind == RelayAccess::Kind::Bernoulli) {
        send = rng.bernoulli(r.tx_prob);
      } else {
        if (r.backoff < 0)
          r.backoff = static_cast<std::int64_t>(rng.uniform_int(
              static_cast<std::uint64_t>(config.relay_access.contention_window) + 1));
        send = r.backoff == 0;
        if (send)
          r.backoff = static_cast<std::int64_t>(rng.uniform_int(
              static_cast<std::uint64_t>(config.relay_access.contention_window) + 1));
        else
          --r.backoff;
      }
      if (send)
        txs.push_back({r.node, r.next_hop, -1, static_cast<int>(ri),
                       link_index[r.node]});
    }

    // (3) global active set; receptions at transmitting nodes are void
    active.clear();
    for (const Transmission& t : txs) transmitting[t.tx] = 1;
    for (NodeId id = 0; id < n_nodes; ++id)
      if (transmitting[id]) active.push_back(id);

    receivers.clear();
    for (const Transmission& t : txs)
      if (!transmitting[t.rx]) receivers.push_back(t.rx);
    std::sort(receivers.begin(), receivers.end());
    receivers.erase(std::unique(receivers.begin(), receivers.end()),
                    receivers.end());

    // (4) capture test per intended reception: one fading draw per
    // (active transmitter, receiver) pair, shared by every packet tested at
    // that receiver
    std::vector<std::uint8_t> success(txs.size(), 0);
    for (NodeId rx : receivers) {
      double total_power = 0.0;
      for (NodeId t : active) {
        fade[t] = rng.exponential(phy.v);
        total_power += fade[t] * g[t * n_nodes + rx];
      }
      for (std::size_t i = 0; i < txs.size(); ++i) {
        if (txs[i].rx != rx) continue;
        const double signal = fade[txs[i].tx] * g[txs[i].tx * n_nodes + rx];
        const double denom = phy.eta + (total_power - signal);
        const bool ok = denom <= 0.0 || signal / denom >= phy.gamma;
        success[i] = ok ? 1 : 0;
      }
    }

    // (5) outcomes, in decision order
    for (std::size_t i = 0; i < txs.size(); ++i) {
      const Transmission& t = txs[i];
      Packet* pkt = t.source_idx >= 0
                        ? &sources[static_cast<std::size_t>(t.source_idx)].hol
                        : &relays[static_cast<std::size_t>(t.relay_idx)].queue.front();
      if (measure) ++metrics.links[t.link_idx].attempts;

      if (success[i]) {
        if (measure) ++metrics.links[t.link_idx].successes;
        const Packet moved = *pkt;
        // dequeue at the sender
        if (t.source_idx >= 0) {
          mint(static_cast<std::size_t>(t.source_idx), slot);
        } else {
          RelayState& r = relays[static_cast<std::size_t>(t.relay_idx)];
          if (!r.queue.front().dummy) --r.real_in_queue;
          r.queue.pop_front();
        }
        // hand over to the next hop
        const Node& rx_node = scenario.node(t.rx);
        if (rx_node.role == NodeRole::Sink) {
          if (!moved.dummy) {
            ++metrics.flows[moved.flow].delivered;
            if (measure) {
              ++metrics.flows[moved.flow].delivered_measured;
              delays[moved.flow].push_back(
                  static_cast<double>(slot - moved.created + 1));
            }
          }
        } else if (!moved.dummy) {
          RelayState& r =
              relays[static_cast<std::size_t>(relay_of_node[t.rx])];
          Packet forwarded = moved;
          forwarded.fails = 0;
          r.queue.push_back(forwarded);
          ++r.real_in_queue;
          r.seen_real = true;
        }
        // a received dummy is discarded: each relay saturates its own queue
      } else {
        ++pkt->fails;
        if (config.max_retransmits && pkt->fails >= *config.max_retransmits) {
          if (t.source_idx >= 0) {
            ++metrics.flows[pkt->flow].dropped;
            mint(static_cast<std::size_t>(t.source_idx), slot);
          } else {
            RelayState& r = relays[static_cast<std::size_t>(t.relay_idx)];
            if (!pkt->dummy) {
              ++metrics.flows[pkt->flow].dropped;
              --r.real_in_queue;
            }
            r.queue.pop_front();
          }
        }
      }
    }
    for (const Transmission& t : txs) transmitting[t.tx] = 0;

    // (6) queue statistics at slot end
    for (RelayState& r : relays) {
      const auto len = r.real_in_queue;
      if (measure) {
        r.qlen_sum += static_cast<double>(len);
        r.peak = std::max(r.peak, len);
      }
      if (slot >= half_start) {
        const double tt = static_cast<double>(slot - half_start);
        const double y = static_cast<double>(len);
        r.n += 1.0;
        r.st += tt;
        r.stt += tt * tt;
        r.sy += y;
        r.sty += tt * y;
      }
    }
  }

  // --- final metrics ---
  for (std::size_t k = 0; k < m; ++k) {
    FlowStats& fs = metrics.flows[k];
    fs.in_flight_end = 1;  // the source head-of-line packet
    fs.throughput = static_cast<double>(fs.delivered_measured) /
                    static_cast<double>(metrics.measured_slots);
    auto& d = delays[k];
    if (!d.empty()) {
      double sum = 0.0;
      for (double x : d) sum += x;
      fs.mean_delay = sum / static_cast<double>(d.size());
      std::sort(d.begin(), d.end());
      const std::size_t idx = static_cast<std::size_t>(
          std::ceil(0.95 * static_cast<double>(d.size()))) - 1;
      fs.p95_delay = d[std::min(idx, d.size() - 1)];
    }
    metrics.aat += fs.throughput;
  }
  for (const RelayState& r : relays)
    metrics.flows[r.flow].in_flight_end += r.real_in_queue;

  metrics.relays.reserve(relays.size());
  for (const RelayState& r : relays) {
    RelayStats rs;
    rs.relay = r.node;
    rs.mean_queue_length =
        r.qlen_sum / static_cast<double>(metrics.measured_slots);
    rs.peak_queue = r.peak;
    const double det = r.n * r.stt - r.st * r.st;
    rs.queue_slope = det > 0.0 ? (r.n * r.sty - r.st * r.sy) / det : 0.0;
    metrics.relays.push_back(rs);
  }
  return metrics;
}

std::vector<CensusEntry> link_success_census(const SimMetrics& metrics) {
  constexpr double z = 1.959963984540054;  // 97.5% normal quantile
  std::vector<CensusEntry> out;
  for (const LinkStats& ls : metrics.links) {
    if (ls.attempts == 0) continue;  // undefined ratio, reported as absent
    CensusEntry e;
    e.link = ls.link;
    e.attempts = ls.attempts;
    e.successes = ls.successes;
    const double n = static_cast<double>(ls.attempts);
    const double p = static_cast<double>(ls.successes) / n;
    e.ratio = p;
    const double z2n = z * z / n;
    const double denom = 1.0 + z2n;
    const double center = (p + z2n / 2.0) / denom;
    const double half =
        z * std::sqrt(p * (1.0 - p) / n + z2n / (4.0 * n)) / denom;
    e.wilson_low = std::max(0.0, center - half);
    e.wilson_high = std::min(1.0, center + half);
    out.push_back(e);
  }
  return out;
}

std::vector<StabilityVerdict> queue_stability_report(const SimMetrics& metrics) {
  std::vector<StabilityVerdict> out;
  out.reserve(metrics.relays.size());
  for (const RelayStats& r : metrics.relays)
    out.push_back({r.relay, r.queue_slope, r.queue_slope <= kStableSlopeThreshold});
  return out;
}

}  // namespace tofra
