#include "pbsync/medium.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pbsync {

Medium::Medium(const Topology& topo, LinkModel links, const TdmaSchedule& tdma,
               EnergyLedger& ledger, Rng jitter_rng, Rng loss_rng)
    : topo_(topo),
      links_(std::move(links)),
      tdma_(tdma),
      ledger_(ledger),
      jitter_rng_(std::move(jitter_rng)),
      loss_rng_(std::move(loss_rng)) {}

std::vector<Delivery> Medium::broadcast(NodeId sender, const SyncMessage& msg, TrueTime t,
                                        std::span<const NodeId> audience) {
  if (!tdma_.owns(sender, t)) {
    throw SlotViolationError("node " + std::to_string(sender) + " transmitted at " +
                             std::to_string(t.ns) + " ns outside its TDMA slot");
  }
  std::vector<Delivery> out;
  if (!ledger_.charge_tx(sender, msg.kind)) return out;
  ++transmissions_;

  for (NodeId rx : audience) {
    if (rx == sender || !topo_.in_range(sender, rx) || !ledger_.alive(rx)) continue;
    if (loss_rng_.bernoulli(links_.loss_probability)) {
      ++lost_;
      continue;
    }
    Nanos delay = links_.base_delay(topo_, sender, rx);
    const double sd = links_.jitter_stddev(topo_, sender, rx);
    if (sd > 0.0) {
      const double j = std::clamp(sd * jitter_rng_.gaussian(), -4.0 * sd, 4.0 * sd);
      delay += static_cast<Nanos>(std::nearbyint(j));
    }
    TrueTime arrival = t + std::max<Nanos>(delay, 0);
    TrueTime& last = last_arrival_[{sender, rx}];
    arrival = std::max(arrival, last);
    last = arrival;
    if (!ledger_.charge_rx(rx, msg.kind)) continue;
    ++deliveries_;
    out.push_back({rx, arrival});
  }
  return out;
}

}  // namespace pbsync
