#include "pbsync/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace pbsync {

std::string role_label(const Topology& topo, NodeRole role, NodeId id) {
  const Tier tier = topo.node(id).tier;
  if (tier == Tier::Concentrator) return "concentrator";
  const std::string prefix = tier == Tier::Router ? "router_" : "leaf_";
  switch (role) {
    case NodeRole::Slave1588: return prefix + "1588";
    case NodeRole::PbsListener: return prefix + "pbs";
    case NodeRole::Reference: break;
  }
  return prefix + "unsynced";
}

ErrorBand error_band(const std::vector<Nanos>& errors) {
  ErrorBand b;
  if (errors.empty()) return b;
  std::vector<Nanos> abs;
  abs.reserve(errors.size());
  for (Nanos e : errors) abs.push_back(e < 0 ? -e : e);
  std::sort(abs.begin(), abs.end());
  b.samples = abs.size();
  b.min_abs = abs.front();
  b.max_abs = abs.back();
  long double sum = 0;
  for (Nanos a : abs) sum += a;
  b.mean_abs = static_cast<double>(sum / abs.size());
  const std::size_t rank = (abs.size() * 99 + 99) / 100;  // ceil(0.99 n)
  b.p99_abs = abs[rank - 1];
  return b;
}

std::optional<TrueTime> convergence_time(const std::vector<SyncErrorSample>& samples,
                                         const Topology& topo, Nanos router_bound,
                                         Nanos leaf_bound) {
  std::map<TrueTime, bool> tick_ok;
  for (const SyncErrorSample& s : samples) {
    const Nanos bound = topo.node(s.node).tier == Tier::Router ? router_bound : leaf_bound;
    const Nanos mag = s.error < 0 ? -s.error : s.error;
    auto [it, fresh] = tick_ok.try_emplace(s.time, true);
    if (mag > bound) it->second = false;
  }
  std::optional<TrueTime> since;
  for (const auto& [t, ok] : tick_ok) {
    if (!ok) since.reset();
    else if (!since) since = t;
  }
  return since;
}

std::vector<std::uint64_t> per_cycle_counts(const MessageCounter& counter, SyncLevel level,
                                            const std::set<MessageKind>& kinds) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t c : counter.cycles(level)) out.push_back(counter.total(level, c, kinds));
  return out;
}

std::uint64_t count_messages(const MessageCounter& counter, SyncLevel level,
                             const std::set<MessageKind>& kinds, bool per_cycle) {
  std::vector<std::uint64_t> totals = per_cycle_counts(counter, level, kinds);
  if (!per_cycle) {
    std::uint64_t sum = 0;
    for (auto v : totals) sum += v;
    return sum;
  }
  if (totals.size() > 2) totals = {totals.begin() + 1, totals.end() - 1};
  std::map<std::uint64_t, std::size_t> freq;
  for (auto v : totals) ++freq[v];
  std::uint64_t best = 0;
  std::size_t best_n = 0;
  for (const auto& [v, n] : freq) {
    if (n > best_n) {
      best = v;
      best_n = n;
    }
  }
  return best;
}

RunResult collect(const Simulation& sim) {
  RunResult r;
  r.config = sim.config();
  r.samples = sim.samples();
  const Topology& topo = sim.topology();
  const MetricsConfig& m = r.config.metrics;
  RunReport& rep = r.report;
  rep.config_text = to_text(r.config);
  rep.convergence = convergence_time(r.samples, topo, static_cast<Nanos>(m.router_bound_ns),
                                     static_cast<Nanos>(m.leaf_bound_ns));

  std::map<std::string, std::vector<Nanos>> by_role;
  const TrueTime from = rep.convergence.value_or(TrueTime{0});
  for (const SyncErrorSample& s : r.samples) {
    if (s.time < from) continue;
    by_role[role_label(topo, sim.role(s.node), s.node)].push_back(s.error);
  }
  for (const auto& [label, errs] : by_role) rep.bands[label] = error_band(errs);

  for (SyncLevel level : {SyncLevel::ConcentratorRouter, SyncLevel::RouterNode}) {
    rep.per_cycle_messages[level] = count_messages(sim.messages(), level, m.counted_kinds, true);
  }

  std::map<std::string, std::pair<Energy, std::int64_t>> sums;
  for (NodeId id = 0; id < topo.size(); ++id) {
    const EnergyAccount& a = sim.ledger().account(id);
    EnergyRow row{id, role_label(topo, sim.role(id), id), a.tx_count, a.rx_count,
                  a.consumed_tx, a.consumed_rx, a.remaining()};
    auto& [sum, n] = sums[row.role];
    sum += a.consumed();
    ++n;
    r.energy.push_back(std::move(row));
  }
  for (const auto& [label, acc] : sums) {
    rep.mean_consumed[label] = Energy{acc.first.nj / acc.second};
  }

  for (const auto& [key, n] : sim.messages().raw()) {
    r.messages.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), n});
  }
  rep.estimates_applied = sim.estimates_applied();
  rep.slave_losses = sim.slave_losses();
  rep.listener_losses = sim.listener_losses();
  rep.master_aborts = sim.master_aborts();
  return r;
}

RunResult run_scenario(const ScenarioConfig& cfg) {
  Simulation sim(cfg);
  sim.run();
  return collect(sim);
}

void write_errors_csv(const std::vector<SyncErrorSample>& samples, std::ostream& out) {
  out << "true_time_ns,node_id,reference_id,error_ns\n";
  for (const SyncErrorSample& s : samples) {
    out << s.time.ns << ',' << s.node << ',' << s.reference << ',' << s.error << '\n';
  }
}

void write_energy_csv(const std::vector<EnergyRow>& rows, std::ostream& out) {
  out << "node_id,role,tx_count,rx_count,consumed_tx,consumed_rx,remaining\n";
  for (const EnergyRow& r : rows) {
    out << r.node << ',' << r.role << ',' << r.tx_count << ',' << r.rx_count << ','
        << r.consumed_tx.to_string() << ',' << r.consumed_rx.to_string() << ','
        << r.remaining.to_string() << '\n';
  }
}

void write_messages_csv(const std::vector<MessageRow>& rows, std::ostream& out) {
  out << "level,cycle,kind,count\n";
  for (const MessageRow& r : rows) {
    out << to_string(r.level) << ',' << r.cycle << ',' << to_string(r.kind) << ',' << r.count
        << '\n';
  }
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void write_report(const RunReport& report, std::ostream& out) {
  out << "# configuration\n" << report.config_text << '\n';
  out << "# summary\n";
  out << "convergence_s = "
      << (report.convergence ? fixed(report.convergence->seconds(), 3) : std::string("none"))
      << '\n';
  for (const auto& [label, b] : report.bands) {
    out << "error." << label << " = samples " << b.samples << ", min " << b.min_abs
        << " ns, mean " << fixed(b.mean_abs, 1) << " ns, p99 " << b.p99_abs << " ns, max "
        << b.max_abs << " ns\n";
  }
  for (const auto& [level, n] : report.per_cycle_messages) {
    out << "messages_per_cycle." << to_string(level) << " = " << n << '\n';
  }
  for (const auto& [label, e] : report.mean_consumed) {
    out << "mean_consumed_j." << label << " = " << e.to_string() << '\n';
  }
  out << "estimates_applied = " << report.estimates_applied << '\n';
  out << "slave_losses = " << report.slave_losses << '\n';
  out << "listener_losses = " << report.listener_losses << '\n';
  out << "master_aborts = " << report.master_aborts << '\n';
}

namespace {

void write_file(const std::filesystem::path& p, const auto& fn) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + p.string());
  fn(f);
  if (!f) throw std::runtime_error("write failed: " + p.string());
}

}  // namespace

void write_outputs(const RunResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "errors.csv", [&](std::ostream& o) { write_errors_csv(result.samples, o); });
  write_file(dir / "energy.csv", [&](std::ostream& o) { write_energy_csv(result.energy, o); });
  write_file(dir / "messages.csv", [&](std::ostream& o) { write_messages_csv(result.messages, o); });
  write_file(dir / "report.txt", [&](std::ostream& o) { write_report(result.report, o); });
}

ComparisonReport compare_protocols(const ScenarioConfig& a, const ScenarioConfig& b) {
  if (a.seed != b.seed) throw ConfigError("run.seed", "compared runs must share the seed");
  HierarchyConfig ta = a.topology, tb = b.topology;
  ta.seed = tb.seed = 0;
  if (!(ta == tb)) throw ConfigError("topology", "compared runs must share the topology");
  const bool a_hybrid = a.protocol.level2 == Protocol::Hybrid1588Pbs;
  const bool b_hybrid = b.protocol.level2 == Protocol::Hybrid1588Pbs;
  if (a_hybrid == b_hybrid) {
    throw ConfigError("protocol.level2", "compare needs one hybrid and one pure run");
  }

  ComparisonReport cmp;
  cmp.a = run_scenario(a);
  cmp.b = run_scenario(b);
  const RunResult& hybrid = a_hybrid ? cmp.a : cmp.b;
  const RunResult& pure = a_hybrid ? cmp.b : cmp.a;
  const auto mean = [](const RunResult& r, const std::string& label) {
    auto it = r.report.mean_consumed.find(label);
    return it == r.report.mean_consumed.end() ? Energy{} : it->second;
  };
  cmp.pbs_node = mean(hybrid, "leaf_pbs");
  cmp.node_1588 = mean(pure, "leaf_1588");
  cmp.delta = cmp.node_1588 - cmp.pbs_node;
  if (cmp.node_1588.nj > 0) {
    cmp.saving_pct = 100.0 * static_cast<double>(cmp.delta.nj) / static_cast<double>(cmp.node_1588.nj);
  }
  cmp.rn_messages_hybrid = hybrid.report.per_cycle_messages.at(SyncLevel::RouterNode);
  cmp.rn_messages_pure = pure.report.per_cycle_messages.at(SyncLevel::RouterNode);
  if (cmp.rn_messages_pure > 0) {
    cmp.rn_message_reduction =
        1.0 - static_cast<double>(cmp.rn_messages_hybrid) / static_cast<double>(cmp.rn_messages_pure);
  }
  return cmp;
}

void write_comparison(const ComparisonReport& cmp, std::ostream& out) {
  out << "receiver_only_leaf_j = " << cmp.pbs_node.to_string() << '\n';
  out << "two_way_leaf_j = " << cmp.node_1588.to_string() << '\n';
  out << "delta_j = " << cmp.delta.to_string() << " (reference " << fixed(kReferenceDeltaJoules, 2)
      << ")\n";
  out << "saving_pct = " << fixed(cmp.saving_pct, 2) << " (reference "
      << fixed(kReferenceSavingPct, 1) << ")\n";
  out << "rn_messages_per_cycle = hybrid " << cmp.rn_messages_hybrid << ", pure "
      << cmp.rn_messages_pure << ", reduction " << fixed(100.0 * cmp.rn_message_reduction, 1)
      << "%\n";
}

}  // namespace pbsync
