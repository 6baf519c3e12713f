#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "pbsync/message.hpp"
#include "pbsync/time.hpp"

namespace pbsync {

/// Energy in integer nanojoules, so per-message sums are exact.
struct Energy {
  std::int64_t nj = 0;

  static Energy from_joules(double j) { return Energy{static_cast<std::int64_t>(j * 1e9 + (j >= 0 ? 0.5 : -0.5))}; }
  static Energy from_millijoules(double mj) { return from_joules(mj * 1e-3); }
  double joules() const { return static_cast<double>(nj) * 1e-9; }
  /// Fixed 9-decimal joule rendering, exact for every value.
  std::string to_string() const;

  Energy& operator+=(Energy o) { nj += o.nj; return *this; }
  friend Energy operator+(Energy a, Energy b) { return Energy{a.nj + b.nj}; }
  friend Energy operator-(Energy a, Energy b) { return Energy{a.nj - b.nj}; }
  friend Energy operator*(std::int64_t k, Energy e) { return Energy{k * e.nj}; }
  friend constexpr auto operator<=>(Energy, Energy) = default;
};

enum class CostMode : std::uint8_t { PerMessage, PowerTimesDuration };

/// What one transmission or reception costs.
///
/// PerMessage charges a flat amount per frame. PowerTimesDuration charges
/// power times frame airtime, airtime = frame_bytes * 8 / bitrate.
struct RadioCostModel {
  CostMode mode = CostMode::PerMessage;
  Energy tx_cost = Energy::from_millijoules(7.0);
  Energy rx_cost = Energy::from_millijoules(4.5);
  double tx_power_mw = 7.0;
  double rx_power_mw = 4.5;
  double bitrate_kbps = 250.0;
  double idle_power_mw = 0.0;

  Energy tx_charge(MessageKind kind) const;
  Energy rx_charge(MessageKind kind) const;
  Nanos airtime(MessageKind kind) const;
};

struct EnergyAccount {
  Energy initial_budget;
  Energy consumed_tx;
  Energy consumed_rx;
  Energy consumed_idle;
  std::uint64_t tx_count = 0;
  std::uint64_t rx_count = 0;
  bool dead = false;
  TrueTime idle_accounted_until{};

  Energy consumed() const { return consumed_tx + consumed_rx + consumed_idle; }
  Energy remaining() const { return initial_budget - consumed(); }
};

/// Per-node battery accounting.
///
/// A charge that does not fit in the remaining budget is refused and the node
/// is marked dead; dead nodes neither transmit nor receive.
class EnergyLedger {
 public:
  EnergyLedger(std::size_t nodes, Energy budget, RadioCostModel model);

  /// False if the node is (or just became) dead; the charge is then not applied.
  bool charge_tx(NodeId node, MessageKind kind);
  bool charge_rx(NodeId node, MessageKind kind);
  /// Charges idle power from the last idle update up to `until`.
  void charge_idle(NodeId node, TrueTime until);

  bool alive(NodeId node) const { return !accounts_.at(node).dead; }
  const EnergyAccount& account(NodeId node) const { return accounts_.at(node); }
  std::size_t size() const { return accounts_.size(); }
  const RadioCostModel& model() const { return model_; }

  /// Total consumed by a minus total consumed by b.
  Energy consumed_delta(NodeId a, NodeId b) const;

  std::uint64_t ignored_charges() const { return ignored_; }
  std::uint64_t refused_charges() const { return refused_; }

 private:
  bool apply(NodeId node, Energy cost, bool tx);

  std::vector<EnergyAccount> accounts_;
  RadioCostModel model_;
  std::uint64_t ignored_ = 0;
  std::uint64_t refused_ = 0;
};

}  // namespace pbsync
