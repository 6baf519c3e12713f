#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "pbsync/message.hpp"
#include "pbsync/time.hpp"

namespace pbsync {

/// Timestamps gathered during one exchange.
///
/// The slave view is T1_M, T2_S, T3_S, T4_M. A receiver-only listener X
/// collects T1_M and T4_M from the FollowUp/DelayResponse payloads and stamps
/// its own receptions of Sync (T2_X) and DelayRequest (T4_X).
struct ExchangeRecord {
  std::uint64_t exchange_id = 0;
  std::optional<LocalTime> t1_m;
  std::optional<LocalTime> t2_s;
  std::optional<LocalTime> t3_s;
  std::optional<LocalTime> t4_m;
  std::optional<LocalTime> t2_x;
  std::optional<LocalTime> t4_x;

  bool slave_complete() const { return t1_m && t2_s && t3_s && t4_m; }
  bool pbs_complete() const { return t1_m && t2_x && t4_m && t4_x; }
};

enum class EstimateMethod : std::uint8_t { TwoWay1588, Pbs };

/// Offset and delay estimate produced at the end of an exchange.
///
/// delta_hat is "this node minus its master". The node corrects by
/// subtracting it.
struct SyncEstimate {
  Nanos delta_hat = 0;
  Nanos d_hat = 0;
  EstimateMethod method = EstimateMethod::TwoWay1588;
  std::uint64_t exchange_id = 0;
  /// Sign of the half nanosecond dropped by truncating division (two-way only).
  int offset_half_dropped = 0;
  int delay_half_dropped = 0;
  bool negative_delay() const { return d_hat < 0; }
};

class IncompleteRecordError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Standard two-way estimate. Divisions truncate toward zero.
///   delta_hat = ((T2_S - T1_M) - (T4_M - T3_S)) / 2
///   d_hat     = ((T2_S - T1_M) + (T4_M - T3_S)) / 2
SyncEstimate estimate_twoway(const ExchangeRecord& rec);

/// Receiver-only offset of listener X to master M: T4_X - T4_M.
/// Exact when the DelayRequest reaches X and M at the same instant.
inline constexpr Nanos pbs_offset(LocalTime t4_x, LocalTime t4_m) { return t4_x - t4_m; }

/// Receiver-only delay M->X: T2_X - T1_M - delta_XM.
inline constexpr Nanos pbs_delay(LocalTime t2_x, LocalTime t1_m, Nanos delta_xm) {
  return (t2_x - t1_m) - delta_xm;
}

/// Offset composition delta_XM = delta_XS + delta_SM.
inline constexpr Nanos compose_offsets(Nanos delta_xs, Nanos delta_sm) { return delta_xs + delta_sm; }

/// Listener estimate from a pbs-complete record.
SyncEstimate estimate_pbs(const ExchangeRecord& rec);

/// (T4_X - T4_M) - delta_XM. Equals d_SX - d_SM in noiseless runs, i.e. how far
/// the DelayRequest arrival at X lags its arrival at M.
Nanos asymmetry_residual(const ExchangeRecord& rec, Nanos delta_xm);

/// Master side of one master/slave pair.
class MasterSession {
 public:
  MasterSession(NodeId master, NodeId slave) : master_(master), slave_(slave) {}

  struct Opening {
    SyncMessage sync;
    SyncMessage follow_up;
  };

  /// Opens a new exchange whose Sync left the antenna at local stamp t1.
  /// A still-pending exchange is aborted.
  Opening start_exchange(LocalTime t1);

  /// Answers the DelayRequest of the pending exchange with T4. Anything else
  /// is dropped and counted.
  std::optional<SyncMessage> on_delay_request(const SyncMessage& msg, LocalTime rx);

  NodeId master() const { return master_; }
  NodeId slave() const { return slave_; }
  bool pending() const { return pending_.has_value(); }
  std::uint64_t last_exchange_id() const { return next_id_ == 0 ? 0 : next_id_ - 1; }
  std::uint64_t aborted() const { return aborted_; }
  std::uint64_t dropped() const { return dropped_; }

 private:
  NodeId master_;
  NodeId slave_;
  std::uint64_t next_id_ = 0;
  std::optional<std::uint64_t> pending_;
  std::uint64_t aborted_ = 0;
  std::uint64_t dropped_ = 0;
};

/// Slave side of the two-way exchange.
class SlaveSession {
 public:
  SlaveSession(NodeId master, NodeId self) : master_(master), self_(self) {}

  struct Action {
    std::optional<SyncMessage> reply;  ///< DelayRequest to transmit
    std::optional<SyncEstimate> estimate;
    std::optional<ExchangeRecord> record;  ///< the completed record, with estimate
  };

  /// Consumes one message of this pair. Out-of-order or foreign messages
  /// discard the exchange in progress.
  Action on_message(const SyncMessage& msg, LocalTime rx);

  /// Records T3_S once the DelayRequest actually left the antenna.
  void on_request_sent(std::uint64_t exchange_id, LocalTime t3);

  /// Drops the exchange in progress (timeout).
  void expire();

  const std::optional<ExchangeRecord>& current() const { return current_; }
  std::uint64_t losses() const { return losses_; }
  std::uint64_t completed() const { return completed_; }

 private:
  enum class Stage { Idle, GotSync, AwaitSend, AwaitResponse };
  void discard();

  NodeId master_;
  NodeId self_;
  Stage stage_ = Stage::Idle;
  std::optional<ExchangeRecord> current_;
  std::uint64_t losses_ = 0;
  std::uint64_t completed_ = 0;
};

/// Receiver-only listener overhearing one master/slave pair. Never transmits.
class ListenerSession {
 public:
  ListenerSession(NodeId master, NodeId slave) : master_(master), slave_(slave) {}

  std::optional<SyncEstimate> on_message(const SyncMessage& msg, LocalTime rx);
  void expire();

  const std::optional<ExchangeRecord>& current() const { return current_; }
  /// Record behind the most recent estimate.
  const std::optional<ExchangeRecord>& last_completed() const { return last_; }
  std::uint64_t losses() const { return losses_; }
  std::uint64_t completed() const { return completed_; }

 private:
  void discard();

  NodeId master_;
  NodeId slave_;
  std::optional<ExchangeRecord> current_;
  std::optional<ExchangeRecord> last_;
  MessageKind expected_ = MessageKind::Sync;
  std::uint64_t losses_ = 0;
  std::uint64_t completed_ = 0;
};

}  // namespace pbsync
