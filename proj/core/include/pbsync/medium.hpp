#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pbsync/energy.hpp"
#include "pbsync/message.hpp"
#include "pbsync/rng.hpp"
#include "pbsync/topology.hpp"

namespace pbsync {

/// A node transmitted outside its TDMA slot.
class SlotViolationError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Delivery {
  NodeId receiver = 0;
  TrueTime arrival{};
};

/// Shared radio channel.
///
/// A transmission reaches every node of the audience (the radios awake for
/// that exchange under the TDMA receive plan) that is in range, alive, and not
/// hit by loss. Arrival = send time + base link delay + jitter, never earlier
/// than the previous arrival on the same ordered link.
class Medium {
 public:
  Medium(const Topology& topo, LinkModel links, const TdmaSchedule& tdma, EnergyLedger& ledger,
         Rng jitter_rng, Rng loss_rng);

  /// Charges the sender once and each committed receiver once. Returns no
  /// deliveries when the sender is dead. Throws SlotViolationError when the
  /// sender does not own the slot containing t.
  std::vector<Delivery> broadcast(NodeId sender, const SyncMessage& msg, TrueTime t,
                                  std::span<const NodeId> audience);

  const LinkModel& links() const { return links_; }
  std::uint64_t transmissions() const { return transmissions_; }
  std::uint64_t deliveries() const { return deliveries_; }
  std::uint64_t lost() const { return lost_; }

 private:
  const Topology& topo_;
  LinkModel links_;
  const TdmaSchedule& tdma_;
  EnergyLedger& ledger_;
  Rng jitter_rng_;
  Rng loss_rng_;
  std::map<std::pair<NodeId, NodeId>, TrueTime> last_arrival_;
  std::uint64_t transmissions_ = 0;
  std::uint64_t deliveries_ = 0;
  std::uint64_t lost_ = 0;
};

}  // namespace pbsync
