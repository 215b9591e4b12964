#include "tofra/phy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tofra {

double received_power_factor(const Position& tx, const Position& rx,
                             const PhyParams& phy) {
  const double r = distance(tx, rx);
  if (r <= 0.0)
    throw std::invalid_argument(
        "received_power_factor: coincident positions (r = 0), geometry is "
        "degenerate");
  return phy.p_tx * std::pow(r, -phy.alpha);
}

double capture_probability(double gamma, double eta, double g_signal,
                           double v_signal,
                           std::span<const std::pair<double, double>> interferers) {
  const double mean_rx = v_signal * g_signal;  // mean received signal power
  double p = std::exp(-gamma * eta / mean_rx);
  for (const auto& [g_k, v_k] : interferers)
    p /= 1.0 + gamma * (v_k * g_k) / mean_rx;
  return p;
}

double success_probability(NodeId tx, NodeId rx, std::span<const NodeId> active,
                           std::span<const Position> positions,
                           const PhyParams& phy) {
  bool tx_found = false;
  for (NodeId k : active) {
    if (k == tx) tx_found = true;
    if (k == rx)
      throw std::invalid_argument(
          "success_probability: receiver " + std::to_string(rx) +
          " is in the active set; a half-duplex node cannot receive while "
          "transmitting");
  }
  if (!tx_found)
    throw std::invalid_argument("success_probability: transmitter " +
                                std::to_string(tx) +
                                " is not in the active set");

  const double g_sig = received_power_factor(positions[tx], positions[rx], phy);
  double p = std::exp(-phy.gamma * phy.eta / (phy.v * g_sig));
  for (NodeId k : active) {
    if (k == tx) continue;
    const double g_k = received_power_factor(positions[k], positions[rx], phy);
    p /= 1.0 + phy.gamma * (phy.v * g_k) / (phy.v * g_sig);
  }
  return p;
}

double instantaneous_sinr(NodeId tx, NodeId rx, std::span<const NodeId> active,
                          std::span<const double> fades,
                          std::span<const Position> positions,
                          const PhyParams& phy) {
  if (fades.size() != active.size())
    throw std::invalid_argument(
        "instantaneous_sinr: need one fading draw per active transmitter");

  double signal = 0.0;
  double interference = 0.0;
  bool tx_found = false;
  for (std::size_t n = 0; n < active.size(); ++n) {
    const double rx_power =
        fades[n] * received_power_factor(positions[active[n]], positions[rx], phy);
    if (active[n] == tx) {
      signal = rx_power;
      tx_found = true;
    } else {
      interference += rx_power;
    }
  }
  if (!tx_found)
    throw std::invalid_argument("instantaneous_sinr: transmitter " +
                                std::to_string(tx) +
                                " is not in the active set");

  const double denom = phy.eta + interference;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return signal / denom;
}

}  // namespace tofra
