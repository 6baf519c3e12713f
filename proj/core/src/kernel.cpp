#include "pbsync/kernel.hpp"

#include <string>

namespace pbsync {

EventId Kernel::schedule(TrueTime fire_at, NodeId target, Action action) {
  if (fire_at < now_) {
    throw PastEventError("event scheduled at " + std::to_string(fire_at.ns) +
                         " ns, before current time " + std::to_string(now_.ns) + " ns");
  }
  const std::uint64_t seq = next_seq_++;
  queue_.emplace(Key{fire_at.ns, seq}, Entry{target, std::move(action)});
  fire_time_of_.emplace(seq, fire_at.ns);
  return EventId{seq};
}

std::uint64_t Kernel::run_until(TrueTime t_end) {
  if (t_end < now_) {
    throw PastEventError("run_until(" + std::to_string(t_end.ns) + ") is before now");
  }
  std::uint64_t count = 0;
  while (!queue_.empty()) {
    auto it = queue_.begin();
    if (it->first.time > t_end.ns) break;
    const Key key = it->first;
    Entry entry = std::move(it->second);
    queue_.erase(it);
    fire_time_of_.erase(key.seq);
    now_ = TrueTime{key.time};
    if (trace_enabled_) trace_.push_back({EventId{key.seq}, now_, entry.target});
    ++dispatched_;
    ++count;
    entry.action();
  }
  now_ = t_end;
  return count;
}

bool Kernel::cancel(EventId id) {
  auto it = fire_time_of_.find(id.value);
  if (it == fire_time_of_.end()) return false;
  queue_.erase(Key{it->second, id.value});
  fire_time_of_.erase(it);
  ++cancelled_;
  return true;
}

}  // namespace pbsync
