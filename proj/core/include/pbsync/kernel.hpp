#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "pbsync/time.hpp"

namespace pbsync {

struct EventId {
  std::uint64_t value = 0;
  friend constexpr auto operator<=>(EventId, EventId) = default;
};

/// Thrown when an event is scheduled before the current simulation time.
class PastEventError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// One dispatched event, as recorded in the optional trace.
struct DispatchRecord {
  EventId id;
  TrueTime time;
  NodeId target;

  friend bool operator==(const DispatchRecord&, const DispatchRecord&) = default;
};

/// Deterministic discrete-event scheduler.
///
/// Events dispatch in (fire_at, sequence) order; the sequence number is the
/// insertion order, so simultaneous events run FIFO. Handlers may schedule
/// further events, including at the current instant.
class Kernel {
 public:
  using Action = std::function<void()>;

  /// Target used for harness-level events that belong to no node.
  static constexpr NodeId kHarness = 0xffffffffu;

  EventId schedule(TrueTime fire_at, NodeId target, Action action);
  EventId schedule_in(Nanos delay, NodeId target, Action action) {
    return schedule(now_ + delay, target, std::move(action));
  }

  /// Dispatches every event with fire_at <= t_end, then sets now = t_end.
  std::uint64_t run_until(TrueTime t_end);

  /// Removes a pending event. False if it already ran, was cancelled, or is unknown.
  bool cancel(EventId id);

  TrueTime now() const { return now_; }
  std::size_t pending() const { return queue_.size(); }
  std::uint64_t scheduled_total() const { return next_seq_; }
  std::uint64_t dispatched_total() const { return dispatched_; }
  std::uint64_t cancelled_total() const { return cancelled_; }

  void enable_trace(bool on) { trace_enabled_ = on; }
  const std::vector<DispatchRecord>& trace() const { return trace_; }

 private:
  struct Key {
    std::uint64_t time;
    std::uint64_t seq;
    friend constexpr auto operator<=>(const Key&, const Key&) = default;
  };
  struct Entry {
    NodeId target;
    Action action;
  };

  TrueTime now_{};
  std::uint64_t next_seq_ = 0;
  std::uint64_t dispatched_ = 0;
  std::uint64_t cancelled_ = 0;
  std::map<Key, Entry> queue_;
  std::unordered_map<std::uint64_t, std::uint64_t> fire_time_of_;
  bool trace_enabled_ = false;
  std::vector<DispatchRecord> trace_;
};

}  // namespace pbsync
