#include "pbsync/simulation.hpp"

#include <algorithm>
#include <cmath>

namespace pbsync {

std::string_view to_string(SyncLevel level) {
  return level == SyncLevel::ConcentratorRouter ? "C-R" : "R-N";
}

std::uint64_t MessageCounter::count(SyncLevel level, std::uint64_t cycle, MessageKind kind) const {
  auto it = counts_.find({level, cycle, kind});
  return it == counts_.end() ? 0 : it->second;
}

std::uint64_t MessageCounter::total(SyncLevel level, std::uint64_t cycle,
                                    const std::set<MessageKind>& kinds) const {
  std::uint64_t sum = 0;
  for (MessageKind k : kinds) sum += count(level, cycle, k);
  return sum;
}

std::vector<std::uint64_t> MessageCounter::cycles(SyncLevel level) const {
  std::set<std::uint64_t> seen;
  for (const auto& [key, n] : counts_) {
    if (std::get<0>(key) == level) seen.insert(std::get<1>(key));
  }
  return {seen.begin(), seen.end()};
}

namespace {

Nanos micros_to_ns(double us) { return static_cast<Nanos>(std::llround(us * 1e3)); }

TdmaOptions tdma_options(const ScenarioConfig& cfg) {
  TdmaOptions o;
  o.slot_duration = micros_to_ns(cfg.medium.slot_us);
  o.frame_slots = static_cast<std::uint32_t>(cfg.exchange_period() / o.slot_duration);
  o.spatial_reuse = cfg.medium.spatial_reuse;
  return o;
}

ScenarioConfig validated(ScenarioConfig cfg) {
  cfg.topology.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

}  // namespace

Simulation::Simulation(ScenarioConfig cfg)
    : cfg_(validated(std::move(cfg))),
      topo_(build_hierarchy(cfg_.topology)),
      tdma_(assign_tdma_slots(topo_, tdma_options(cfg_))),
      ledger_(topo_.size(), Energy::from_joules(cfg_.energy.budget_j), cfg_.energy.model),
      noise_rng_(make_stream(cfg_.seed, RngStream::TimestampNoise)),
      noise_{cfg_.clock.timestamp_noise_ns},
      nodes_(topo_.size()),
      period_(cfg_.exchange_period()) {
  init_clocks();
  init_roles();

  LinkModel links;
  links.signal_speed_m_per_ns = cfg_.medium.signal_speed_m_per_ns;
  links.jitter_cr_ns = cfg_.medium.jitter_cr_ns;
  links.jitter_rn_ns = cfg_.medium.jitter_rn_ns;
  links.loss_probability = cfg_.medium.loss_probability;
  links.overrides = cfg_.medium.link_delay_ns;
  init_links(links);
  medium_ = std::make_unique<Medium>(topo_, std::move(links), tdma_, ledger_,
                                     make_stream(cfg_.seed, RngStream::Jitter),
                                     make_stream(cfg_.seed, RngStream::Loss));

  for (NodeId id = 0; id < topo_.size(); ++id) {
    NodeState& n = nodes_[id];
    if (n.masters.empty()) continue;
    const double start = id == topo_.concentrator() ? cfg_.protocol.level1_start_s
                                                    : cfg_.protocol.level2_start_s;
    n.master_active_from = TrueTime::from_seconds(start);
    ensure_slot_event(id, n.master_active_from);
  }
  if (cfg_.metrics.sampling) {
    kernel_.schedule(TrueTime{0}, Kernel::kHarness, [this] { sample(); });
  }
}

void Simulation::init_clocks() {
  Rng rng = make_stream(cfg_.seed, RngStream::ClockInit);
  const auto max_offset = static_cast<std::int64_t>(std::llround(cfg_.clock.initial_offset_max_us * 1e3));
  const double drift = cfg_.clock.drift_ppm * 1e-6;
  for (NodeId id = 0; id < topo_.size(); ++id) {
    const Tier tier = topo_.node(id).tier;
    // Both draws happen for every node so the stream does not depend on the mode.
    const std::int64_t offset = rng.uniform_int(-max_offset, max_offset);
    const double uniform = rng.uniform(-drift, drift);

    ClockState& c = nodes_[id].clock;
    c.theta = tier == Tier::Concentrator ? 0 : offset;
    switch (cfg_.clock.drift_mode) {
      case DriftMode::Uniform: c.rho = uniform; break;
      case DriftMode::Tiered:
        c.rho = tier == Tier::Concentrator ? 0.0
                : tier == Tier::Router     ? cfg_.clock.router_drift_ppm * 1e-6
                                           : cfg_.clock.leaf_drift_ppm * 1e-6;
        break;
      case DriftMode::Fixed: c.rho = tier == Tier::Concentrator ? 0.0 : drift; break;
      case DriftMode::Zero: c.rho = 0.0; break;
    }
    if (auto it = cfg_.clock.drift_ppm_of.find(id); it != cfg_.clock.drift_ppm_of.end()) {
      c.rho = it->second * 1e-6;
    }
    if (auto it = cfg_.clock.offset_ns_of.find(id); it != cfg_.clock.offset_ns_of.end()) {
      c.theta = it->second;
    }
    validate(c);
  }
}

void Simulation::init_roles() {
  std::vector<NodeId> masters{topo_.concentrator()};
  masters.insert(masters.end(), topo_.routers().begin(), topo_.routers().end());
  for (NodeId m : masters) {
    const auto& kids = topo_.children(m);
    if (kids.empty()) continue;
    const Protocol proto =
        m == topo_.concentrator() ? cfg_.protocol.level1 : cfg_.protocol.level2;
    if (proto == Protocol::Pure1588) {
      for (NodeId s : kids) {
        nodes_[m].masters.emplace_back(m, s);
        nodes_[s].slave.emplace(m, s);
        nodes_[s].role = NodeRole::Slave1588;
      }
      continue;
    }
    NodeId s = *std::min_element(kids.begin(), kids.end());
    if (auto it = cfg_.protocol.slaves.find(m); it != cfg_.protocol.slaves.end()) s = it->second;
    nodes_[m].masters.emplace_back(m, s);
    nodes_[s].slave.emplace(m, s);
    nodes_[s].role = NodeRole::Slave1588;
    auto& group = listeners_[{m, s}];
    for (NodeId x : kids) {
      if (x == s) continue;
      nodes_[x].listener.emplace(m, s);
      nodes_[x].role = NodeRole::PbsListener;
      group.push_back(x);
    }
  }
  for (NodeState& n : nodes_) n.pending_follow_up.resize(n.masters.size());
}

void Simulation::init_links(LinkModel& links) {
  const double lo = cfg_.medium.listener_skew_min_ns;
  const double hi = cfg_.medium.listener_skew_max_ns;
  if (hi <= 0.0) return;
  Rng rng = make_stream(cfg_.seed, RngStream::ListenerSkew);
  for (const auto& [pair, group] : listeners_) {
    const NodeId slave = pair.second;
    for (NodeId x : group) {
      const Nanos skew = rng.uniform_int(std::llround(lo), std::llround(hi));
      skew_[x] = skew;
      links.overrides[{slave, x}] = links.base_delay(topo_, slave, x) + skew;
    }
  }
}

Nanos Simulation::listener_skew(NodeId listener) const {
  auto it = skew_.find(listener);
  return it == skew_.end() ? 0 : it->second;
}

SyncLevel Simulation::level_of_master(NodeId master) const {
  return master == topo_.concentrator() ? SyncLevel::ConcentratorRouter : SyncLevel::RouterNode;
}

std::vector<NodeId> Simulation::slaves_of(NodeId master) const {
  std::vector<NodeId> out;
  for (const MasterSession& s : nodes_.at(master).masters) out.push_back(s.slave());
  return out;
}

std::vector<NodeId> Simulation::listeners_of(NodeId master, NodeId slave) const {
  auto it = listeners_.find({master, slave});
  return it == listeners_.end() ? std::vector<NodeId>{} : it->second;
}

std::uint64_t Simulation::cycle_of(TrueTime t) const {
  return t.ns / static_cast<std::uint64_t>(period_ * cfg_.protocol.rounds_per_cycle);
}

std::vector<NodeId> Simulation::audience(const SyncMessage& msg) const {
  std::vector<NodeId> out{msg.master, msg.slave};
  if (auto it = listeners_.find({msg.master, msg.slave}); it != listeners_.end()) {
    out.insert(out.end(), it->second.begin(), it->second.end());
  }
  return out;
}

void Simulation::run_until(TrueTime t) {
  kernel_.run_until(t);
  for (NodeId id = 0; id < topo_.size(); ++id) ledger_.charge_idle(id, t);
}

void Simulation::ensure_slot_event(NodeId id, TrueTime earliest) {
  NodeState& n = nodes_[id];
  const TrueTime at = tdma_.next_slot_start(id, std::max(earliest, kernel_.now()));
  if (n.slot_event) {
    if (*n.slot_event_at <= at) return;
    kernel_.cancel(*n.slot_event);
  }
  n.slot_event = kernel_.schedule(at, id, [this, id] { on_slot(id); });
  n.slot_event_at = at;
}

void Simulation::on_slot(NodeId id) {
  NodeState& n = nodes_[id];
  n.slot_event.reset();
  n.slot_event_at.reset();
  const TrueTime start = kernel_.now();
  const Nanos spacing = micros_to_ns(cfg_.medium.message_spacing_us);
  const Nanos slot = tdma_.slot_duration;
  Nanos cursor = 0;

  // Queued replies first, then the new exchanges.
  std::deque<Outgoing> later;
  while (!n.outbox.empty()) {
    Outgoing o = std::move(n.outbox.front());
    n.outbox.pop_front();
    if (o.ready_at > start || cursor >= slot) {
      later.push_back(std::move(o));
      continue;
    }
    kernel_.schedule(start + cursor, id, [this, id, msg = o.msg] { transmit(id, msg); });
    cursor += spacing;
  }
  n.outbox = std::move(later);

  if (start >= n.master_active_from) {
    for (std::size_t i = 0; i < n.masters.size(); ++i) {
      if (cursor + spacing >= slot) break;
      kernel_.schedule(start + cursor, id, [this, id, i] { transmit_sync(id, i); });
      cursor += spacing;
      kernel_.schedule(start + cursor, id, [this, id, i] {
        if (auto& fu = nodes_[id].pending_follow_up[i]) {
          const SyncMessage msg = *fu;
          fu.reset();
          transmit(id, msg);
        }
      });
      cursor += spacing;
    }
  }

  if (!n.outbox.empty()) {
    TrueTime earliest = start + 1;
    for (const Outgoing& o : n.outbox) earliest = std::max(earliest, std::min(o.ready_at, earliest));
    ensure_slot_event(id, earliest);
  }
  if (!n.masters.empty() && n.master_active_from != TrueTime::max()) ensure_slot_event(id, start + 1);
}

void Simulation::transmit_sync(NodeId id, std::size_t session) {
  NodeState& n = nodes_[id];
  const TrueTime now = kernel_.now();
  const LocalTime t1 = timestamp_event(n.clock, now, noise_, noise_rng_);
  MasterSession::Opening open = n.masters[session].start_exchange(t1);
  n.pending_follow_up[session] = open.follow_up;
  transmit(id, open.sync);
}

void Simulation::transmit(NodeId id, SyncMessage msg) {
  NodeState& n = nodes_[id];
  const TrueTime now = kernel_.now();
  if (msg.kind == MessageKind::DelayRequest && n.slave) {
    const LocalTime t3 = timestamp_event(n.clock, now, noise_, noise_rng_);
    n.slave->on_request_sent(msg.exchange_id, t3);
  }
  const std::uint64_t before = medium_->transmissions();
  const std::vector<NodeId> who = audience(msg);
  const std::vector<Delivery> out = medium_->broadcast(id, msg, now, who);
  if (medium_->transmissions() == before) return;
  messages_.add(level_of_master(msg.master), cycle_of(now), msg.kind);
  if (tx_hook_) tx_hook_(id, msg, now, out);
  for (const Delivery& d : out) {
    kernel_.schedule(d.arrival, d.receiver, [this, r = d.receiver, msg] { receive(r, msg); });
  }
}

void Simulation::receive(NodeId id, const SyncMessage& msg) {
  NodeState& n = nodes_[id];
  const TrueTime now = kernel_.now();
  if (rx_hook_) rx_hook_(id, msg, now);
  const LocalTime rx = timestamp_event(n.clock, now, noise_, noise_rng_);
  const Nanos timeout = 2 * period_;

  if (msg.master == id) {
    for (MasterSession& s : n.masters) {
      if (s.slave() != msg.slave) continue;
      if (auto resp = s.on_delay_request(msg, rx)) {
        n.outbox.push_back({*resp, now});
        ensure_slot_event(id, now);
      }
      return;
    }
    return;
  }

  if (msg.kind == MessageKind::Sync) n.exchange_started = now;
  const bool stale = msg.kind == MessageKind::DelayResponse && n.exchange_started &&
                     now - *n.exchange_started > timeout;

  if (n.slave && msg.slave == id) {
    if (stale) {
      n.slave->expire();
      return;
    }
    SlaveSession::Action act = n.slave->on_message(msg, rx);
    if (act.reply) {
      const TrueTime ready = now + micros_to_ns(cfg_.protocol.response_delay_us);
      n.outbox.push_back({*act.reply, ready});
      ensure_slot_event(id, ready);
    }
    if (act.estimate) apply_estimate(id, *act.estimate, *act.record);
    return;
  }
  if (n.listener) {
    if (stale) {
      n.listener->expire();
      return;
    }
    if (auto est = n.listener->on_message(msg, rx)) {
      apply_estimate(id, *est, *n.listener->last_completed());
    }
  }
}

void Simulation::apply_estimate(NodeId id, const SyncEstimate& est, const ExchangeRecord& rec) {
  NodeState& n = nodes_[id];
  const NodeId master = *topo_.node(id).parent;
  const TrueTime now = kernel_.now();
  EstimateEvent ev;
  ev.at = now;
  ev.node = id;
  ev.master = master;
  ev.role = n.role;
  ev.estimate = est;
  ev.record = rec;
  ev.error_before = true_offset(n.clock, nodes_[master].clock, now);
  n.clock = apply_offset_correction(n.clock, est.delta_hat, now);
  ev.error_after = true_offset(n.clock, nodes_[master].clock, now);
  ++estimates_applied_;
  if (hook_) hook_(ev);
}

void Simulation::sample() {
  const TrueTime now = kernel_.now();
  for (NodeId id = 0; id < topo_.size(); ++id) {
    const auto ref = topo_.node(id).parent;
    if (!ref) continue;
    samples_.push_back({now, id, *ref, true_offset(nodes_[id].clock, nodes_[*ref].clock, now)});
  }
  const auto interval = static_cast<Nanos>(std::llround(cfg_.metrics.sample_interval_ms * 1e6));
  kernel_.schedule(now + interval, Kernel::kHarness, [this] { sample(); });
}

std::uint64_t Simulation::slave_losses() const {
  std::uint64_t sum = 0;
  for (const NodeState& n : nodes_) if (n.slave) sum += n.slave->losses();
  return sum;
}

std::uint64_t Simulation::listener_losses() const {
  std::uint64_t sum = 0;
  for (const NodeState& n : nodes_) if (n.listener) sum += n.listener->losses();
  return sum;
}

std::uint64_t Simulation::master_aborts() const {
  std::uint64_t sum = 0;
  for (const NodeState& n : nodes_) {
    for (const MasterSession& s : n.masters) sum += s.aborted();
  }
  return sum;
}

}  // namespace pbsync
