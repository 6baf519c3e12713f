#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "pbsync/time.hpp"

namespace pbsync {

enum class MessageKind : std::uint8_t { Sync = 0, FollowUp = 1, DelayRequest = 2, DelayResponse = 3 };

inline constexpr std::array<MessageKind, 4> kAllMessageKinds{
    MessageKind::Sync, MessageKind::FollowUp, MessageKind::DelayRequest,
    MessageKind::DelayResponse};

std::string_view to_string(MessageKind kind);
std::optional<MessageKind> parse_message_kind(std::string_view text);

/// One timing message of a master/slave exchange.
///
/// `master` and `slave` name the pair the exchange belongs to; `origin` is the
/// transmitter. FollowUp carries T1 (master's Sync transmit stamp) and
/// DelayResponse carries T4 (master's DelayRequest receive stamp).
struct SyncMessage {
  MessageKind kind = MessageKind::Sync;
  NodeId origin = 0;
  NodeId master = 0;
  NodeId slave = 0;
  std::uint64_t exchange_id = 0;
  std::optional<LocalTime> carried;

  bool well_formed() const {
    const bool wants_stamp = kind == MessageKind::FollowUp || kind == MessageKind::DelayResponse;
    return wants_stamp == carried.has_value();
  }
};

/// Nominal frame lengths in bytes, used for airtime-based energy accounting.
std::uint32_t frame_bytes(MessageKind kind);

}  // namespace pbsync
