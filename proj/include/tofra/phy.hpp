#pragma once

#include <span>
#include <utility>

#include "tofra/scenario.hpp"

namespace tofra {

// Physical-layer math: path-loss power factors, closed-form Rayleigh success
// probability for a link under a set of concurrent transmitters, and the
// instantaneous SINR used by the simulator's capture test.
//
// Fading gains are exponential with mean v (so the closed form below holds
// with the ratio v(k,j)g(k,j) / v(i,j)g(i,j) in the interference product).

// g(i,j) = p_tx * r^(-alpha). Throws on coincident positions (r == 0).
double received_power_factor(const Position& tx, const Position& rx,
                             const PhyParams& phy);

// Closed-form capture probability given precomputed (power factor, fading
// mean) pairs for the interferers. This is the per-link primitive; v is
// plumbed per link here, the NodeId wrappers below use the uniform phy.v.
double capture_probability(double gamma, double eta, double g_signal,
                           double v_signal,
                           std::span<const std::pair<double, double>> interferers);

// Success probability of link (tx -> rx) when the nodes in `active` transmit
// concurrently. Preconditions: tx in active, rx not in active (half-duplex
// receiver); violations throw std::invalid_argument.
double success_probability(NodeId tx, NodeId rx, std::span<const NodeId> active,
                           std::span<const Position> positions,
                           const PhyParams& phy);

// Instantaneous SINR at rx for tx's signal, given one exponential fading draw
// per active transmitter (fades[k] belongs to active[k]). Returns +infinity
// when there is neither noise nor interference.
double instantaneous_sinr(NodeId tx, NodeId rx, std::span<const NodeId> active,
                          std::span<const double> fades,
                          std::span<const Position> positions,
                          const PhyParams& phy);

}  // namespace tofra
