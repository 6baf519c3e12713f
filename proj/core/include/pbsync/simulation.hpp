#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include "pbsync/clock.hpp"
#include "pbsync/config.hpp"
#include "pbsync/energy.hpp"
#include "pbsync/kernel.hpp"
#include "pbsync/medium.hpp"
#include "pbsync/protocol.hpp"
#include "pbsync/rng.hpp"
#include "pbsync/topology.hpp"

namespace pbsync {

/// Hierarchy level an exchange belongs to.
enum class SyncLevel : std::uint8_t { ConcentratorRouter, RouterNode };

std::string_view to_string(SyncLevel level);

/// Role of a node toward its own master.
enum class NodeRole : std::uint8_t { Reference, Slave1588, PbsListener };

/// Ground-truth error of a node against its reference at one sampling tick.
struct SyncErrorSample {
  TrueTime time;
  NodeId node = 0;
  NodeId reference = 0;
  Nanos error = 0;  ///< local(node) - local(reference)

  friend bool operator==(const SyncErrorSample&, const SyncErrorSample&) = default;
};

/// Emitted for every estimate a node applies.
struct EstimateEvent {
  TrueTime at;
  NodeId node = 0;
  NodeId master = 0;
  NodeRole role = NodeRole::Slave1588;
  SyncEstimate estimate;
  ExchangeRecord record;
  Nanos error_before = 0;  ///< ground truth local(node) - local(master) before correction
  Nanos error_after = 0;
};

/// Transmission counts per (level, cycle, kind).
class MessageCounter {
 public:
  void add(SyncLevel level, std::uint64_t cycle, MessageKind kind) { ++counts_[{level, cycle, kind}]; }
  std::uint64_t count(SyncLevel level, std::uint64_t cycle, MessageKind kind) const;
  std::uint64_t total(SyncLevel level, std::uint64_t cycle, const std::set<MessageKind>& kinds) const;
  std::vector<std::uint64_t> cycles(SyncLevel level) const;
  const std::map<std::tuple<SyncLevel, std::uint64_t, MessageKind>, std::uint64_t>& raw() const {
    return counts_;
  }

 private:
  std::map<std::tuple<SyncLevel, std::uint64_t, MessageKind>, std::uint64_t> counts_;
};

/// One scenario run: topology, clocks, protocol state machines, radio medium,
/// energy ledger and ground-truth error sampling, all driven by one kernel.
///
/// Exchanges are paced by TDMA frames of one exchange period each. A master
/// sends Sync and FollowUp in its slot; the slave's DelayRequest goes out in
/// the slave's slot once the response delay has elapsed; the master answers
/// in its slot of the following frame, ahead of the next Sync.
class Simulation {
 public:
  explicit Simulation(ScenarioConfig cfg);
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  void run_until(TrueTime t);
  void run() { run_until(TrueTime::from_seconds(cfg_.end_s)); }

  const ScenarioConfig& config() const { return cfg_; }
  const Topology& topology() const { return topo_; }
  const TdmaSchedule& tdma() const { return tdma_; }
  const Medium& medium() const { return *medium_; }
  const EnergyLedger& ledger() const { return ledger_; }
  const MessageCounter& messages() const { return messages_; }
  const Kernel& kernel() const { return kernel_; }
  Kernel& kernel() { return kernel_; }
  const std::vector<SyncErrorSample>& samples() const { return samples_; }
  const ClockState& clock(NodeId id) const { return nodes_.at(id).clock; }
  TrueTime now() const { return kernel_.now(); }

  NodeRole role(NodeId id) const { return nodes_.at(id).role; }
  /// The node a given node synchronises to; empty for the concentrator.
  std::optional<NodeId> reference(NodeId id) const { return topo_.node(id).parent; }
  SyncLevel level_of_master(NodeId master) const;
  /// 1588 slaves of a master, in id order.
  std::vector<NodeId> slaves_of(NodeId master) const;
  std::vector<NodeId> listeners_of(NodeId master, NodeId slave) const;
  /// Extra slave -> listener latency applied to one listener.
  Nanos listener_skew(NodeId listener) const;

  void set_estimate_hook(std::function<void(const EstimateEvent&)> hook) { hook_ = std::move(hook); }

  /// Observers for every committed transmission (with its deliveries) and
  /// every reception. Used by tests; they must not alter the run.
  using TransmitHook = std::function<void(NodeId sender, const SyncMessage&, TrueTime sent,
                                          const std::vector<Delivery>&)>;
  using ReceiveHook = std::function<void(NodeId receiver, const SyncMessage&, TrueTime at)>;
  void set_transmit_hook(TransmitHook hook) { tx_hook_ = std::move(hook); }
  void set_receive_hook(ReceiveHook hook) { rx_hook_ = std::move(hook); }

  std::uint64_t slave_losses() const;
  std::uint64_t listener_losses() const;
  std::uint64_t master_aborts() const;
  std::uint64_t estimates_applied() const { return estimates_applied_; }

 private:
  struct Outgoing {
    SyncMessage msg;
    TrueTime ready_at;
  };
  struct NodeState {
    ClockState clock;
    NodeRole role = NodeRole::Reference;
    std::vector<MasterSession> masters;  ///< one per 1588 slave of this node
    std::vector<std::optional<SyncMessage>> pending_follow_up;  ///< per master session
    std::optional<SlaveSession> slave;
    std::optional<ListenerSession> listener;
    std::optional<TrueTime> exchange_started;  ///< for the two-frame timeout
    std::deque<Outgoing> outbox;
    std::optional<EventId> slot_event;
    std::optional<TrueTime> slot_event_at;
    TrueTime master_active_from = TrueTime::max();
  };

  void init_clocks();
  void init_roles();
  void init_links(LinkModel& links);
  void ensure_slot_event(NodeId id, TrueTime earliest);
  void on_slot(NodeId id);
  void transmit(NodeId id, SyncMessage msg);
  void transmit_sync(NodeId id, std::size_t session);
  void receive(NodeId id, const SyncMessage& msg);
  void apply_estimate(NodeId id, const SyncEstimate& est, const ExchangeRecord& rec);
  void sample();
  std::uint64_t cycle_of(TrueTime t) const;
  std::vector<NodeId> audience(const SyncMessage& msg) const;

  ScenarioConfig cfg_;
  Topology topo_;
  TdmaSchedule tdma_;
  EnergyLedger ledger_;
  Kernel kernel_;
  std::unique_ptr<Medium> medium_;
  Rng noise_rng_;
  TimestampNoise noise_;
  std::vector<NodeState> nodes_;
  std::map<std::pair<NodeId, NodeId>, std::vector<NodeId>> listeners_;
  std::map<NodeId, Nanos> skew_;
  MessageCounter messages_;
  std::vector<SyncErrorSample> samples_;
  std::function<void(const EstimateEvent&)> hook_;
  TransmitHook tx_hook_;
  ReceiveHook rx_hook_;
  std::uint64_t estimates_applied_ = 0;
  Nanos period_ = 0;
};

}  // namespace pbsync
