#include <gtest/gtest.h>

#include <map>
#include <vector>

#include "pbsync/energy.hpp"
#include "pbsync/medium.hpp"

using namespace pbsync;

namespace {

struct Fixture {
  Topology topo = build_hierarchy({});
  TdmaSchedule tdma = assign_tdma_slots(topo);
  EnergyLedger ledger{topo.size(), Energy::from_joules(1.0), RadioCostModel{}};

  Medium make(LinkModel links = {}, std::uint64_t seed = 1) {
    return Medium(topo, std::move(links), tdma, ledger, Rng(seed), Rng(seed + 1));
  }
  TrueTime slot_of(NodeId n) const { return tdma.next_slot_start(n, TrueTime{0}); }
};

SyncMessage sync_from(NodeId master, NodeId slave) {
  return SyncMessage{MessageKind::Sync, master, master, slave, 0, {}};
}

}  // namespace

TEST(Medium, DeliversToAudienceInRangeWithGeometricDelay) {
  Fixture f;
  Medium m = f.make();
  const std::vector<NodeId> audience{1, 9, 10};
  const TrueTime t = f.slot_of(1);
  const auto out = m.broadcast(1, sync_from(1, 9), t, audience);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].receiver, 9u);
  EXPECT_EQ(out[0].arrival, t + 25);
  EXPECT_EQ(f.ledger.account(1).tx_count, 1u);
  EXPECT_EQ(f.ledger.account(9).rx_count, 1u);
  EXPECT_EQ(f.ledger.account(11).rx_count, 0u);  // not in the audience
}

TEST(Medium, TransmittingOutsideOwnSlotIsAnError) {
  Fixture f;
  Medium m = f.make();
  const std::vector<NodeId> audience{9};
  EXPECT_THROW(m.broadcast(1, sync_from(1, 9), f.slot_of(2), audience), SlotViolationError);
}

TEST(Medium, OutOfRangeReceiversHearNothing) {
  Fixture f;
  f.topo = Topology(f.topo.nodes(), 30.0);
  Medium m = f.make();
  // routers 1 and 5 sit on opposite sides, 40 m apart
  const std::vector<NodeId> audience{5, 0};
  const auto out = m.broadcast(1, sync_from(0, 1), f.slot_of(1), audience);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].receiver, 0u);
}

TEST(Medium, TotalLossStillChargesTheSender) {
  Fixture f;
  LinkModel l;
  l.loss_probability = 1.0;
  Medium m = f.make(l);
  const std::vector<NodeId> audience{9, 10};
  EXPECT_TRUE(m.broadcast(1, sync_from(1, 9), f.slot_of(1), audience).empty());
  EXPECT_EQ(m.lost(), 2u);
  EXPECT_EQ(m.transmissions(), 1u);
  EXPECT_EQ(f.ledger.account(1).tx_count, 1u);
  EXPECT_EQ(f.ledger.account(9).rx_count, 0u);
}

TEST(Medium, DeadSenderTransmitsNothing) {
  Fixture f;
  f.ledger = EnergyLedger(f.topo.size(), Energy::from_millijoules(5.0), RadioCostModel{});
  Medium m = f.make();
  const std::vector<NodeId> audience{9};
  EXPECT_TRUE(m.broadcast(1, sync_from(1, 9), f.slot_of(1), audience).empty());
  EXPECT_FALSE(f.ledger.alive(1));
  EXPECT_EQ(m.transmissions(), 0u);
}

TEST(Medium, ArrivalsArePerLinkFifoUnderHeavyJitter) {
  Fixture f;
  LinkModel l;
  l.jitter_rn_ns = 500.0;
  l.jitter_cr_ns = 500.0;
  f.ledger = EnergyLedger(f.topo.size(), Energy::from_joules(1e6), RadioCostModel{});
  Medium m = f.make(l, 77);
  const std::vector<NodeId> audience{9, 10, 11, 12, 0};
  std::map<NodeId, TrueTime> last;
  const TrueTime start = f.slot_of(1);
  for (int i = 0; i < 20; ++i) {
    for (const Delivery& d : m.broadcast(1, sync_from(1, 9), start + i * 40, audience)) {
      if (auto it = last.find(d.receiver); it != last.end()) ASSERT_GE(d.arrival, it->second);
      ASSERT_GE(d.arrival, start + i * 40);
      last[d.receiver] = d.arrival;
    }
  }
}
