#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pbsync/config.hpp"
#include "pbsync/energy.hpp"
#include "pbsync/simulation.hpp"

namespace pbsync {

/// Role label used in CSVs and reports: concentrator, router_1588,
/// router_pbs, leaf_1588, leaf_pbs.
std::string role_label(const Topology& topo, NodeRole role, NodeId id);

/// |error| statistics of one node class after convergence.
struct ErrorBand {
  std::size_t samples = 0;
  Nanos min_abs = 0;
  Nanos max_abs = 0;
  double mean_abs = 0.0;
  Nanos p99_abs = 0;  ///< nearest-rank 99th percentile
};

/// |error| statistics over a set of samples.
ErrorBand error_band(const std::vector<Nanos>& errors);

struct EnergyRow {
  NodeId node = 0;
  std::string role;
  std::uint64_t tx_count = 0;
  std::uint64_t rx_count = 0;
  Energy consumed_tx;
  Energy consumed_rx;
  Energy remaining;
};

struct MessageRow {
  SyncLevel level = SyncLevel::ConcentratorRouter;
  std::uint64_t cycle = 0;
  MessageKind kind = MessageKind::Sync;
  std::uint64_t count = 0;
};

/// Summary of one run. Everything except the config echo and the protocol
/// diagnostics can be recomputed from the three CSVs.
struct RunReport {
  std::string config_text;
  std::optional<TrueTime> convergence;
  std::map<std::string, ErrorBand> bands;             ///< keyed by role label
  std::map<SyncLevel, std::uint64_t> per_cycle_messages;  ///< steady state, counted kinds
  std::map<std::string, Energy> mean_consumed;        ///< keyed by role label
  std::uint64_t estimates_applied = 0;
  std::uint64_t slave_losses = 0;
  std::uint64_t listener_losses = 0;
  std::uint64_t master_aborts = 0;
};

struct RunResult {
  ScenarioConfig config;
  RunReport report;
  std::vector<SyncErrorSample> samples;
  std::vector<EnergyRow> energy;
  std::vector<MessageRow> messages;
};

/// First sampling tick after which every node stays within its bound
/// (routers: router bound, leaves: leaf bound). Empty if the last tick
/// still violates a bound or there are no samples.
std::optional<TrueTime> convergence_time(const std::vector<SyncErrorSample>& samples,
                                         const Topology& topo, Nanos router_bound,
                                         Nanos leaf_bound);

/// Per-cycle totals for the requested kinds, in cycle order.
std::vector<std::uint64_t> per_cycle_counts(const MessageCounter& counter, SyncLevel level,
                                            const std::set<MessageKind>& kinds);

/// Steady-state per-cycle count (per_cycle) or the whole-run total.
///
/// The first and last active cycles of a level are excluded from the steady
/// state: the first has no DelayResponse yet, the last may be cut by the end
/// of the run. The steady value is the most frequent remaining total.
std::uint64_t count_messages(const MessageCounter& counter, SyncLevel level,
                             const std::set<MessageKind>& kinds, bool per_cycle);

/// Builds the report and CSV rows from a finished simulation.
RunResult collect(const Simulation& sim);

/// Full deterministic run of one scenario.
RunResult run_scenario(const ScenarioConfig& cfg);

void write_errors_csv(const std::vector<SyncErrorSample>& samples, std::ostream& out);
void write_energy_csv(const std::vector<EnergyRow>& rows, std::ostream& out);
void write_messages_csv(const std::vector<MessageRow>& rows, std::ostream& out);
void write_report(const RunReport& report, std::ostream& out);

/// Writes errors.csv, energy.csv, messages.csv and report.txt into dir.
void write_outputs(const RunResult& result, const std::filesystem::path& dir);

struct ComparisonReport {
  RunResult a;
  RunResult b;
  Energy pbs_node;      ///< mean consumption of a receiver-only leaf
  Energy node_1588;     ///< mean consumption of a two-way leaf
  Energy delta;         ///< node_1588 - pbs_node
  double saving_pct = 0.0;
  std::uint64_t rn_messages_hybrid = 0;
  std::uint64_t rn_messages_pure = 0;
  double rn_message_reduction = 0.0;  ///< 1 - hybrid/pure
};

/// Published reference values printed next to the measured ones.
inline constexpr double kReferenceSavingPct = 84.0;
inline constexpr double kReferenceDeltaJoules = 15.07;

/// Runs both configs on the same topology and seed. The hybrid run supplies
/// the receiver-only node, the pure run the two-way node. Throws ConfigError
/// on topology or seed mismatch.
ComparisonReport compare_protocols(const ScenarioConfig& a, const ScenarioConfig& b);

void write_comparison(const ComparisonReport& cmp, std::ostream& out);

}  // namespace pbsync
