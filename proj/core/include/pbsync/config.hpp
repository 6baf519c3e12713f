#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

#include "pbsync/energy.hpp"
#include "pbsync/message.hpp"
#include "pbsync/topology.hpp"

namespace pbsync {

/// Invalid scenario configuration. `field()` names the offending key as
/// "section.key".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class Protocol : std::uint8_t { Pure1588, Hybrid1588Pbs };

std::string_view to_string(Protocol p);

enum class DriftMode : std::uint8_t {
  Uniform,      ///< each node uniform in [-drift, +drift]
  Tiered,       ///< concentrator 0, routers and leaves at their tier drifts
  Fixed,        ///< every node +drift, concentrator 0
  Zero,
};

std::string_view to_string(DriftMode m);

struct ProtocolConfig {
  Protocol level1 = Protocol::Pure1588;  ///< concentrator <-> routers
  Protocol level2 = Protocol::Hybrid1588Pbs;  ///< routers <-> leaves
  double cycle_s = 0.1;
  std::uint32_t rounds_per_cycle = 1;
  double level1_start_s = 0.3;
  double level2_start_s = 7.0;
  double response_delay_us = 1000.0;
  /// Explicit 1588 slave per group master; default is the lowest child id.
  std::map<NodeId, NodeId> slaves;
};

struct ClockConfig {
  DriftMode drift_mode = DriftMode::Tiered;
  double drift_ppm = 1.5;         ///< bound for uniform, value for fixed
  double router_drift_ppm = 1.5;  ///< tiered only
  double leaf_drift_ppm = -1.2;   ///< tiered only
  double initial_offset_max_us = 1000.0;
  double timestamp_noise_ns = 15.0;
  std::map<NodeId, double> drift_ppm_of;   ///< per-node override
  std::map<NodeId, Nanos> offset_ns_of;    ///< per-node override
};

struct MediumConfig {
  double slot_us = 1000.0;
  double message_spacing_us = 40.0;
  bool spatial_reuse = false;
  double signal_speed_m_per_ns = 0.2;
  double jitter_cr_ns = 0.0;
  double jitter_rn_ns = 10.0;
  double loss_probability = 0.0;
  /// Extra fixed latency on slave -> listener links, drawn per listener
  /// uniformly from [min, max].
  double listener_skew_min_ns = 0.0;
  double listener_skew_max_ns = 0.0;
  std::map<std::pair<NodeId, NodeId>, Nanos> link_delay_ns;
};

struct EnergyConfig {
  double budget_j = 2700.0;
  RadioCostModel model;
};

struct MetricsConfig {
  bool sampling = true;
  double sample_interval_ms = 50.0;
  double router_bound_ns = 1000.0;
  double leaf_bound_ns = 50000.0;
  std::set<MessageKind> counted_kinds{MessageKind::Sync, MessageKind::FollowUp,
                                      MessageKind::DelayRequest, MessageKind::DelayResponse};
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  double end_s = 60.0;
  HierarchyConfig topology;
  ProtocolConfig protocol;
  ClockConfig clock;
  MediumConfig medium;
  EnergyConfig energy;
  MetricsConfig metrics;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
  Nanos exchange_period() const;
};

/// Parses the INI-style scenario format. Unknown sections or keys are errors.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Renders a config in the same format; parse_config(to_text(c)) reproduces c.
std::string to_text(const ScenarioConfig& cfg);

}  // namespace pbsync
