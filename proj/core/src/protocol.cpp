#include "pbsync/protocol.hpp"

namespace pbsync {

namespace {

int half_sign(Nanos numerator) {
  if (numerator % 2 == 0) return 0;
  return numerator > 0 ? 1 : -1;
}

SyncMessage make(MessageKind kind, NodeId origin, NodeId master, NodeId slave, std::uint64_t id,
                 std::optional<LocalTime> carried = std::nullopt) {
  return SyncMessage{kind, origin, master, slave, id, carried};
}

}  // namespace

SyncEstimate estimate_twoway(const ExchangeRecord& rec) {
  if (!rec.slave_complete()) {
    throw IncompleteRecordError("two-way estimate needs T1_M, T2_S, T3_S and T4_M");
  }
  const Nanos forward = *rec.t2_s - *rec.t1_m;
  const Nanos backward = *rec.t4_m - *rec.t3_s;
  SyncEstimate est;
  est.method = EstimateMethod::TwoWay1588;
  est.exchange_id = rec.exchange_id;
  est.delta_hat = (forward - backward) / 2;
  est.d_hat = (forward + backward) / 2;
  est.offset_half_dropped = half_sign(forward - backward);
  est.delay_half_dropped = half_sign(forward + backward);
  return est;
}

SyncEstimate estimate_pbs(const ExchangeRecord& rec) {
  if (!rec.pbs_complete()) {
    throw IncompleteRecordError("receiver-only estimate needs T1_M, T2_X, T4_M and T4_X");
  }
  SyncEstimate est;
  est.method = EstimateMethod::Pbs;
  est.exchange_id = rec.exchange_id;
  est.delta_hat = pbs_offset(*rec.t4_x, *rec.t4_m);
  est.d_hat = pbs_delay(*rec.t2_x, *rec.t1_m, est.delta_hat);
  return est;
}

Nanos asymmetry_residual(const ExchangeRecord& rec, Nanos delta_xm) {
  if (!rec.t4_x || !rec.t4_m) {
    throw IncompleteRecordError("asymmetry residual needs T4_X and T4_M");
  }
  return (*rec.t4_x - *rec.t4_m) - delta_xm;
}

MasterSession::Opening MasterSession::start_exchange(LocalTime t1) {
  if (pending_) ++aborted_;
  const std::uint64_t id = next_id_++;
  pending_ = id;
  return Opening{make(MessageKind::Sync, master_, master_, slave_, id),
                 make(MessageKind::FollowUp, master_, master_, slave_, id, t1)};
}

std::optional<SyncMessage> MasterSession::on_delay_request(const SyncMessage& msg, LocalTime rx) {
  if (msg.kind != MessageKind::DelayRequest || msg.master != master_ || msg.slave != slave_ ||
      !pending_ || msg.exchange_id != *pending_) {
    ++dropped_;
    return std::nullopt;
  }
  pending_.reset();
  return make(MessageKind::DelayResponse, master_, master_, slave_, msg.exchange_id, rx);
}

void SlaveSession::discard() {
  if (current_) ++losses_;
  current_.reset();
  stage_ = Stage::Idle;
}

void SlaveSession::expire() { discard(); }

SlaveSession::Action SlaveSession::on_message(const SyncMessage& msg, LocalTime rx) {
  Action out;
  if (msg.master != master_ || msg.slave != self_ || !msg.well_formed()) {
    discard();
    return out;
  }
  switch (msg.kind) {
    case MessageKind::Sync:
      discard();
      current_ = ExchangeRecord{};
      current_->exchange_id = msg.exchange_id;
      current_->t2_s = rx;
      stage_ = Stage::GotSync;
      break;
    case MessageKind::FollowUp:
      if (stage_ != Stage::GotSync || current_->exchange_id != msg.exchange_id) {
        discard();
        break;
      }
      current_->t1_m = msg.carried;
      stage_ = Stage::AwaitSend;
      out.reply = make(MessageKind::DelayRequest, self_, master_, self_, msg.exchange_id);
      break;
    case MessageKind::DelayResponse:
      if (stage_ != Stage::AwaitResponse || current_->exchange_id != msg.exchange_id) {
        discard();
        break;
      }
      current_->t4_m = msg.carried;
      out.estimate = estimate_twoway(*current_);
      out.record = *current_;
      ++completed_;
      current_.reset();
      stage_ = Stage::Idle;
      break;
    case MessageKind::DelayRequest:
      discard();
      break;
  }
  return out;
}

void SlaveSession::on_request_sent(std::uint64_t exchange_id, LocalTime t3) {
  if (stage_ != Stage::AwaitSend || current_->exchange_id != exchange_id) return;
  current_->t3_s = t3;
  stage_ = Stage::AwaitResponse;
}

void ListenerSession::discard() {
  if (current_) ++losses_;
  current_.reset();
  expected_ = MessageKind::Sync;
}

void ListenerSession::expire() { discard(); }

std::optional<SyncEstimate> ListenerSession::on_message(const SyncMessage& msg, LocalTime rx) {
  if (msg.master != master_ || msg.slave != slave_ || !msg.well_formed()) {
    discard();
    return std::nullopt;
  }
  if (msg.kind == MessageKind::Sync) {
    discard();
    current_ = ExchangeRecord{};
    current_->exchange_id = msg.exchange_id;
    current_->t2_x = rx;
    expected_ = MessageKind::FollowUp;
    return std::nullopt;
  }
  if (!current_ || msg.kind != expected_ || msg.exchange_id != current_->exchange_id) {
    discard();
    return std::nullopt;
  }
  switch (msg.kind) {
    case MessageKind::FollowUp:
      current_->t1_m = msg.carried;
      expected_ = MessageKind::DelayRequest;
      return std::nullopt;
    case MessageKind::DelayRequest:
      current_->t4_x = rx;
      expected_ = MessageKind::DelayResponse;
      return std::nullopt;
    case MessageKind::DelayResponse: {
      current_->t4_m = msg.carried;
      last_ = *current_;
      const SyncEstimate est = estimate_pbs(*current_);
      ++completed_;
      current_.reset();
      expected_ = MessageKind::Sync;
      return est;
    }
    case MessageKind::Sync:
      break;
  }
  return std::nullopt;
}

}  // namespace pbsync

namespace pbsync {

std::string_view to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::Sync: return "sync";
    case MessageKind::FollowUp: return "follow_up";
    case MessageKind::DelayRequest: return "delay_request";
    case MessageKind::DelayResponse: return "delay_response";
  }
  return "unknown";
}

std::optional<MessageKind> parse_message_kind(std::string_view text) {
  for (MessageKind k : kAllMessageKinds) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

// IEEE 1588 fixed message lengths.
std::uint32_t frame_bytes(MessageKind kind) {
  return kind == MessageKind::DelayResponse ? 54 : 44;
}

}  // namespace pbsync
