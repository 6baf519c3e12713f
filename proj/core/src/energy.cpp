#include "pbsync/energy.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace pbsync {

std::string Energy::to_string() const {
  const std::int64_t mag = nj < 0 ? -nj : nj;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%lld.%09lld", nj < 0 ? "-" : "",
                static_cast<long long>(mag / 1'000'000'000),
                static_cast<long long>(mag % 1'000'000'000));
  return buf;
}

Nanos RadioCostModel::airtime(MessageKind kind) const {
  const double seconds = frame_bytes(kind) * 8.0 / (bitrate_kbps * 1e3);
  return static_cast<Nanos>(std::nearbyint(seconds * 1e9));
}

namespace {
// mW * ns = 1e-12 J = 1e-3 nJ
Energy power_for(double mw, Nanos duration) {
  return Energy{static_cast<std::int64_t>(std::nearbyint(mw * static_cast<double>(duration) * 1e-3))};
}
}  // namespace

Energy RadioCostModel::tx_charge(MessageKind kind) const {
  return mode == CostMode::PerMessage ? tx_cost : power_for(tx_power_mw, airtime(kind));
}

Energy RadioCostModel::rx_charge(MessageKind kind) const {
  return mode == CostMode::PerMessage ? rx_cost : power_for(rx_power_mw, airtime(kind));
}

EnergyLedger::EnergyLedger(std::size_t nodes, Energy budget, RadioCostModel model)
    : accounts_(nodes), model_(model) {
  for (EnergyAccount& a : accounts_) a.initial_budget = budget;
}

bool EnergyLedger::apply(NodeId node, Energy cost, bool tx) {
  EnergyAccount& a = accounts_.at(node);
  if (a.dead) {
    ++ignored_;
    return false;
  }
  if (a.remaining() < cost) {
    a.dead = true;
    ++refused_;
    return false;
  }
  if (tx) {
    a.consumed_tx += cost;
    ++a.tx_count;
  } else {
    a.consumed_rx += cost;
    ++a.rx_count;
  }
  return true;
}

bool EnergyLedger::charge_tx(NodeId node, MessageKind kind) {
  return apply(node, model_.tx_charge(kind), true);
}

bool EnergyLedger::charge_rx(NodeId node, MessageKind kind) {
  return apply(node, model_.rx_charge(kind), false);
}

void EnergyLedger::charge_idle(NodeId node, TrueTime until) {
  EnergyAccount& a = accounts_.at(node);
  if (until <= a.idle_accounted_until) return;
  const Nanos span = until - a.idle_accounted_until;
  a.idle_accounted_until = until;
  if (a.dead || model_.idle_power_mw <= 0.0) return;
  const Energy cost = power_for(model_.idle_power_mw, span);
  if (a.remaining() < cost) {
    a.consumed_idle += a.remaining();
    a.dead = true;
    return;
  }
  a.consumed_idle += cost;
}

Energy EnergyLedger::consumed_delta(NodeId a, NodeId b) const {
  return account(a).consumed() - account(b).consumed();
}

}  // namespace pbsync
