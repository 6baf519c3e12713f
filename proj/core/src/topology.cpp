#include "pbsync/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "pbsync/rng.hpp"

namespace pbsync {

std::string_view to_string(Tier tier) {
  switch (tier) {
    case Tier::Concentrator: return "concentrator";
    case Tier::Router: return "router";
    case Tier::Leaf: return "leaf";
  }
  return "unknown";
}

double distance_m(Position a, Position b) { return std::hypot(a.x_m - b.x_m, a.y_m - b.y_m); }

Topology::Topology(std::vector<NodeInfo> nodes, double radio_range_m)
    : nodes_(std::move(nodes)), children_(nodes_.size()), radio_range_m_(radio_range_m) {
  for (const NodeInfo& n : nodes_) {
    if (n.tier == Tier::Router) routers_.push_back(n.id);
    if (n.parent) children_.at(*n.parent).push_back(n.id);
  }
}

double Topology::distance(NodeId a, NodeId b) const {
  return distance_m(node(a).pos, node(b).pos);
}

bool Topology::in_range(NodeId a, NodeId b) const { return distance(a, b) <= radio_range_m_; }

Topology build_hierarchy(const HierarchyConfig& cfg) {
  if (cfg.routers == 0) throw std::invalid_argument("topology.routers must be at least 1");
  if (cfg.leaves_per_router == 0) {
    throw std::invalid_argument("topology.leaves_per_router must be at least 1");
  }
  Rng rng = make_stream(cfg.seed, RngStream::Placement);
  auto jitter = [&](Position p) {
    if (cfg.placement_jitter_m <= 0.0) return p;
    p.x_m += rng.uniform(-cfg.placement_jitter_m, cfg.placement_jitter_m);
    p.y_m += rng.uniform(-cfg.placement_jitter_m, cfg.placement_jitter_m);
    return p;
  };

  std::vector<NodeInfo> nodes;
  nodes.reserve(1 + cfg.routers * (1 + cfg.leaves_per_router));
  nodes.push_back({0, Tier::Concentrator, std::nullopt, {0.0, 0.0}});

  std::vector<double> router_angle(cfg.routers);
  for (std::uint32_t r = 0; r < cfg.routers; ++r) {
    router_angle[r] = 2.0 * std::numbers::pi * r / cfg.routers;
    const Position p{cfg.router_distance_m * std::cos(router_angle[r]),
                     cfg.router_distance_m * std::sin(router_angle[r])};
    nodes.push_back({static_cast<NodeId>(1 + r), Tier::Router, NodeId{0}, jitter(p)});
  }
  for (std::uint32_t r = 0; r < cfg.routers; ++r) {
    const NodeId router = 1 + r;
    const Position base = nodes[router].pos;
    for (std::uint32_t l = 0; l < cfg.leaves_per_router; ++l) {
      const double a = router_angle[r] + 2.0 * std::numbers::pi * l / cfg.leaves_per_router;
      const Position p{base.x_m + cfg.leaf_distance_m * std::cos(a),
                       base.y_m + cfg.leaf_distance_m * std::sin(a)};
      nodes.push_back({static_cast<NodeId>(nodes.size()), Tier::Leaf, router, jitter(p)});
    }
  }

  Topology topo(std::move(nodes), cfg.radio_range_m);
  for (const NodeInfo& n : topo.nodes()) {
    if (n.parent && !topo.in_range(n.id, *n.parent)) {
      throw std::invalid_argument("node " + std::to_string(n.id) +
                                  " is out of radio range of its parent");
    }
  }
  return topo;
}

Nanos LinkModel::base_delay(const Topology& topo, NodeId from, NodeId to) const {
  if (auto it = overrides.find({from, to}); it != overrides.end()) return it->second;
  return static_cast<Nanos>(std::nearbyint(topo.distance(from, to) / signal_speed_m_per_ns));
}

double LinkModel::jitter_stddev(const Topology& topo, NodeId from, NodeId to) const {
  const bool touches_concentrator =
      topo.node(from).tier == Tier::Concentrator || topo.node(to).tier == Tier::Concentrator;
  return touches_concentrator ? jitter_cr_ns : jitter_rn_ns;
}

std::uint32_t TdmaSchedule::distinct_slots() const {
  return static_cast<std::uint32_t>(std::set<std::uint32_t>(slot_of.begin(), slot_of.end()).size());
}

TrueTime TdmaSchedule::next_slot_start(NodeId node, TrueTime at_or_after) const {
  const auto frame = static_cast<std::uint64_t>(frame_duration());
  const auto offset = static_cast<std::uint64_t>(slot_of.at(node)) *
                      static_cast<std::uint64_t>(slot_duration);
  if (at_or_after.ns <= offset) return TrueTime{offset};
  const std::uint64_t k = (at_or_after.ns - offset + frame - 1) / frame;
  return TrueTime{k * frame + offset};
}

bool TdmaSchedule::owns(NodeId node, TrueTime t) const {
  const auto frame = static_cast<std::uint64_t>(frame_duration());
  const std::uint64_t in_frame = t.ns % frame;
  return in_frame / static_cast<std::uint64_t>(slot_duration) == slot_of.at(node);
}

bool may_interfere(const Topology& topo, NodeId a, NodeId b) {
  return topo.distance(a, b) <= 2.0 * topo.radio_range_m();
}

TdmaSchedule assign_tdma_slots(const Topology& topo, const TdmaOptions& opts) {
  if (opts.slot_duration <= 0) throw std::invalid_argument("slot duration must be positive");
  TdmaSchedule s;
  s.slot_duration = opts.slot_duration;
  s.slot_of.resize(topo.size());
  // The concentrator goes last so that no slave owns the slot right after
  // its master's; a slave then always has at least one slot of slack
  // between the master's FollowUp and its own DelayRequest.
  std::vector<NodeId> order;
  for (NodeId id = 0; id < topo.size(); ++id) {
    if (id != topo.concentrator()) order.push_back(id);
  }
  order.push_back(topo.concentrator());

  std::uint32_t used = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const NodeId id = order[i];
    std::uint32_t slot = static_cast<std::uint32_t>(i);
    if (opts.spatial_reuse) {
      std::set<std::uint32_t> taken;
      for (std::size_t j = 0; j < i; ++j) {
        if (may_interfere(topo, id, order[j])) taken.insert(s.slot_of[order[j]]);
      }
      slot = 0;
      while (taken.contains(slot)) ++slot;
    }
    s.slot_of[id] = slot;
    used = std::max(used, slot + 1);
  }
  if (opts.frame_slots != 0 && opts.frame_slots < used) {
    throw std::invalid_argument("frame of " + std::to_string(opts.frame_slots) +
                                " slots cannot hold " + std::to_string(used) + " slots");
  }
  s.frame_slots = opts.frame_slots == 0 ? used : opts.frame_slots;
  return s;
}

}  // namespace pbsync
