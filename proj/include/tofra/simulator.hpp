#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tofra/scenario.hpp"

namespace tofra {

// Packet-level slotted-ALOHA Monte Carlo simulator with SINR capture,
// per-slot Rayleigh block fading, multi-packet reception, half-duplex nodes,
// unbounded relay FIFO queues and a per-packet retransmission limit.
//
// Per slot: sources decide to transmit their head-of-line packet (always
// backlogged), relays with queued packets access the medium with their fixed
// probability (saturated mode refills empty relay queues with uncounted dummy
// packets once a real packet has been seen), receptions at nodes that chose
// to transmit are voided, every intended reception is tested with
// SINR >= gamma against all concurrent transmitters, successes hand the
// packet to the next hop with an instantaneous perfect acknowledgement, and
// failures count against the retransmission limit.

struct RelayAccess {
  enum class Kind {
    Bernoulli,       // transmit with tx_prob each slot (matches the analysis)
    UniformBackoff,  // wait U{0..cw} slots between transmissions;
                     // effective rate ~ 2 / (cw + 2)
  };
  Kind kind = Kind::Bernoulli;
  int contention_window = 5;
};

struct SimConfig {
  std::uint64_t total_slots = 20000;
  std::uint64_t warmup_slots = 2000;  // excluded from measured metrics
  // Packet dropped once it has failed this many transmissions; nullopt keeps
  // retrying forever.
  std::optional<std::uint32_t> max_retransmits = 3;
  bool saturated_relays = false;
  RelayAccess relay_access;
  std::uint64_t seed = 1;

  void validate() const;
};

// Transmission policy for the flow sources. Relays always follow their
// scenario access probability (or the backoff window).
struct SourcePolicy {
  enum class Kind { Rates, RoundRobin };
  Kind kind = Kind::Rates;
  RateVector rates;
  RoundRobinSchedule schedule;

  static SourcePolicy from_rates(RateVector r);
  static SourcePolicy round_robin(RoundRobinSchedule s);
};

struct FlowStats {
  // Full-run counters; conservation holds exactly:
  // injected == delivered + dropped + in_flight_end.
  std::uint64_t injected = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;  // retransmit-limit drops of real packets
  std::uint64_t in_flight_end = 0;

  // Post-warmup measurements.
  std::uint64_t delivered_measured = 0;
  double throughput = 0.0;  // packets/slot
  double mean_delay = 0.0;  // slots from creation to delivery, inclusive
  double p95_delay = 0.0;
};

struct LinkStats {
  Link link;
  std::uint64_t attempts = 0;   // post-warmup transmissions (real or dummy)
  std::uint64_t successes = 0;  // post-warmup captured receptions
};

struct RelayStats {
  NodeId relay = 0;
  double mean_queue_length = 0.0;  // real packets, post-warmup
  double queue_slope = 0.0;        // packets/slot over the run's second half
  std::uint64_t peak_queue = 0;
};

struct SimMetrics {
  std::uint64_t total_slots = 0;
  std::uint64_t measured_slots = 0;
  std::vector<FlowStats> flows;
  double aat = 0.0;  // sum of per-flow throughput
  std::vector<LinkStats> links;    // path links, flow order then hop order
  std::vector<RelayStats> relays;  // ascending relay node id
};

SimMetrics run_simulation(const Scenario& scenario, const SourcePolicy& policy,
                          const SimConfig& config);

struct CensusEntry {
  Link link;
  std::uint64_t attempts = 0;
  std::uint64_t successes = 0;
  double ratio = 0.0;
  double wilson_low = 0.0;  // 95% Wilson score interval
  double wilson_high = 0.0;
};

// Empirical per-link success ratio with confidence intervals. Links that saw
// no attempts are omitted.
std::vector<CensusEntry> link_success_census(const SimMetrics& metrics);

struct StabilityVerdict {
  NodeId relay = 0;
  double slope = 0.0;
  bool stable = false;
};

// A relay queue is stable when its queue-length slope over the second half of
// the run stays at or below 1e-3 packets/slot.
std::vector<StabilityVerdict> queue_stability_report(const SimMetrics& metrics);

inline constexpr double kStableSlopeThreshold = 1e-3;

}  // namespace tofra
