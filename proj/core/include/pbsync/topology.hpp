#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "pbsync/time.hpp"

namespace pbsync {

enum class Tier : std::uint8_t { Concentrator, Router, Leaf };

std::string_view to_string(Tier tier);

struct Position {
  double x_m = 0.0;
  double y_m = 0.0;
};

double distance_m(Position a, Position b);

struct NodeInfo {
  NodeId id = 0;
  Tier tier = Tier::Leaf;
  std::optional<NodeId> parent;
  Position pos;
};

struct HierarchyConfig {
  std::uint32_t routers = 8;
  std::uint32_t leaves_per_router = 8;
  double router_distance_m = 20.0;  ///< concentrator to router
  double leaf_distance_m = 5.0;     ///< router to leaf
  double radio_range_m = 60.0;
  double placement_jitter_m = 0.0;  ///< uniform +/- displacement per axis
  std::uint64_t seed = 1;

  friend bool operator==(const HierarchyConfig&, const HierarchyConfig&) = default;
};

/// Concentrator / routers / leaves.
///
/// Node ids are dense: 0 is the concentrator, 1..R are routers, then the leaves
/// of router 1, router 2, and so on.
class Topology {
 public:
  Topology(std::vector<NodeInfo> nodes, double radio_range_m);

  std::size_t size() const { return nodes_.size(); }
  const NodeInfo& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<NodeInfo>& nodes() const { return nodes_; }
  NodeId concentrator() const { return 0; }
  const std::vector<NodeId>& routers() const { return routers_; }
  /// Direct children of a node (routers of the concentrator, leaves of a router).
  const std::vector<NodeId>& children(NodeId id) const { return children_.at(id); }
  double radio_range_m() const { return radio_range_m_; }

  bool in_range(NodeId a, NodeId b) const;
  double distance(NodeId a, NodeId b) const;

 private:
  std::vector<NodeInfo> nodes_;
  std::vector<NodeId> routers_;
  std::vector<std::vector<NodeId>> children_;
  double radio_range_m_;
};

/// Lays out the hierarchy: routers on a circle around the concentrator,
/// leaves on a circle around their router. Throws std::invalid_argument for
/// zero routers or zero leaves per router.
Topology build_hierarchy(const HierarchyConfig& cfg);

/// Ground truth link behaviour between node pairs.
struct LinkModel {
  double signal_speed_m_per_ns = 0.2;  ///< ~2/3 c
  double jitter_cr_ns = 0.0;           ///< links touching the concentrator
  double jitter_rn_ns = 0.0;           ///< all other links
  double loss_probability = 0.0;
  /// Explicit base delay for an ordered (from, to) pair; overrides geometry.
  std::map<std::pair<NodeId, NodeId>, Nanos> overrides;

  Nanos base_delay(const Topology& topo, NodeId from, NodeId to) const;
  double jitter_stddev(const Topology& topo, NodeId from, NodeId to) const;
};

struct TdmaOptions {
  Nanos slot_duration = kNanosPerMilli;
  /// Frame length in slots; 0 means "just enough for the assigned slots".
  std::uint32_t frame_slots = 0;
  /// Reuse slot indices between nodes that cannot interfere.
  bool spatial_reuse = false;
};

/// Slot ownership. Node n may transmit during
/// [k * frame + slot_of[n] * slot, k * frame + (slot_of[n] + 1) * slot).
struct TdmaSchedule {
  Nanos slot_duration = kNanosPerMilli;
  std::uint32_t frame_slots = 0;
  std::vector<std::uint32_t> slot_of;

  Nanos frame_duration() const { return slot_duration * frame_slots; }
  std::uint32_t distinct_slots() const;
  TrueTime next_slot_start(NodeId node, TrueTime at_or_after) const;
  bool owns(NodeId node, TrueTime t) const;
};

/// Two nodes may interfere when some receiver could hear both, i.e. their
/// radio disks overlap.
bool may_interfere(const Topology& topo, NodeId a, NodeId b);

/// Deterministic slot assignment. Nodes are taken in id order with the
/// concentrator moved to the end. Without spatial reuse each gets its own
/// slot in that order; with it, a greedy colouring of the interference graph.
TdmaSchedule assign_tdma_slots(const Topology& topo, const TdmaOptions& opts = {});

}  // namespace pbsync
