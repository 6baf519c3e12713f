#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "pbsync/report.hpp"

using namespace pbsync;
namespace fs = std::filesystem;

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

template <class Fn>
std::string render(Fn fn) {
  std::ostringstream s;
  fn(s);
  return s.str();
}

// Nanojoules from the fixed 9-decimal rendering.
std::int64_t nj_of(const std::string& joules) {
  const auto dot = joules.find('.');
  return std::stoll(joules.substr(0, dot)) * 1'000'000'000 + std::stoll(joules.substr(dot + 1));
}

RunResult short_run() {
  ScenarioConfig c;
  c.end_s = 15;
  c.medium.listener_skew_min_ns = 2000;
  c.medium.listener_skew_max_ns = 44000;
  return run_scenario(c);
}

}  // namespace

TEST(Report, ErrorBandUsesNearestRank) {
  std::vector<Nanos> e;
  for (int i = 1; i <= 200; ++i) e.push_back(i % 2 ? i : -i);
  const ErrorBand b = error_band(e);
  EXPECT_EQ(b.samples, 200u);
  EXPECT_EQ(b.min_abs, 1);
  EXPECT_EQ(b.max_abs, 200);
  EXPECT_EQ(b.p99_abs, 198);  // ceil(0.99 * 200) = 198th value
  EXPECT_DOUBLE_EQ(b.mean_abs, 100.5);
  EXPECT_EQ(error_band({}).samples, 0u);
}

TEST(Report, ConvergenceIsFirstTickOfTheFinalCompliantRun) {
  const Topology t = build_hierarchy({1, 1});  // nodes 0, 1 (router), 2 (leaf)
  auto at = [](std::uint64_t ms, NodeId n, Nanos e) {
    return SyncErrorSample{TrueTime{ms * 1'000'000}, n, n == 1 ? 0u : 1u, e};
  };
  std::vector<SyncErrorSample> s{at(0, 1, 5000),  at(0, 2, 10),    at(50, 1, 10), at(50, 2, 10),
                                 at(100, 1, 10),  at(100, 2, 90000), at(150, 1, -999),
                                 at(150, 2, -49999), at(200, 1, 0), at(200, 2, 0)};
  EXPECT_EQ(convergence_time(s, t, 1000, 50000), TrueTime{150'000'000});
  s.push_back(at(250, 1, 1001));
  EXPECT_FALSE(convergence_time(s, t, 1000, 50000));
  EXPECT_FALSE(convergence_time({}, t, 1000, 50000));
}

TEST(Report, SteadyStateSkipsEdgeCyclesAndTakesTheMode) {
  MessageCounter m;
  const auto add = [&](std::uint64_t cycle, int n) {
    for (int i = 0; i < n; ++i) m.add(SyncLevel::RouterNode, cycle, MessageKind::Sync);
  };
  add(3, 1);   // first active cycle
  add(4, 5);
  add(5, 5);
  add(6, 4);
  add(7, 2);   // cut by the end of the run
  const std::set<MessageKind> all{kAllMessageKinds.begin(), kAllMessageKinds.end()};
  EXPECT_EQ(count_messages(m, SyncLevel::RouterNode, all, true), 5u);
  EXPECT_EQ(count_messages(m, SyncLevel::RouterNode, all, false), 17u);
  EXPECT_EQ(count_messages(m, SyncLevel::ConcentratorRouter, all, true), 0u);
  EXPECT_EQ(per_cycle_counts(m, SyncLevel::RouterNode, all), (std::vector<std::uint64_t>{1, 5, 5, 4, 2}));
}

TEST(Report, RoleLabels) {
  const Topology t = build_hierarchy({});
  EXPECT_EQ(role_label(t, NodeRole::Reference, 0), "concentrator");
  EXPECT_EQ(role_label(t, NodeRole::Slave1588, 3), "router_1588");
  EXPECT_EQ(role_label(t, NodeRole::PbsListener, 3), "router_pbs");
  EXPECT_EQ(role_label(t, NodeRole::Slave1588, 9), "leaf_1588");
  EXPECT_EQ(role_label(t, NodeRole::PbsListener, 10), "leaf_pbs");
}

TEST(Report, CsvSchemasAndLineEndings) {
  const RunResult r = short_run();
  const std::string errors = render([&](auto& o) { write_errors_csv(r.samples, o); });
  const std::string energy = render([&](auto& o) { write_energy_csv(r.energy, o); });
  const std::string messages = render([&](auto& o) { write_messages_csv(r.messages, o); });
  for (const std::string* text : {&errors, &energy, &messages}) {
    EXPECT_EQ(text->find('\r'), std::string::npos);
    EXPECT_EQ(text->back(), '\n');
  }
  EXPECT_EQ(errors.substr(0, errors.find('\n')), "true_time_ns,node_id,reference_id,error_ns");
  EXPECT_EQ(energy.substr(0, energy.find('\n')),
            "node_id,role,tx_count,rx_count,consumed_tx,consumed_rx,remaining");
  EXPECT_EQ(messages.substr(0, messages.find('\n')), "level,cycle,kind,count");
  EXPECT_EQ(parse_csv(errors).size(), 1 + r.samples.size());
  EXPECT_EQ(parse_csv(energy).size(), 1 + 73u);
}

// Every report statistic is recomputed here from the CSV text alone.
TEST(Report, StatisticsMatchRecomputationFromCsv) {
  const RunResult r = short_run();
  const auto errors = parse_csv(render([&](auto& o) { write_errors_csv(r.samples, o); }));
  const auto energy = parse_csv(render([&](auto& o) { write_energy_csv(r.energy, o); }));
  const auto messages = parse_csv(render([&](auto& o) { write_messages_csv(r.messages, o); }));

  std::map<NodeId, std::string> role;
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> consumed;  // sum, count
  const std::int64_t budget = Energy::from_joules(r.config.energy.budget_j).nj;
  for (std::size_t i = 1; i < energy.size(); ++i) {
    const auto& row = energy[i];
    role[static_cast<NodeId>(std::stoul(row[0]))] = row[1];
    EXPECT_EQ(nj_of(row[4]) + nj_of(row[5]) + nj_of(row[6]), budget);
    auto& [sum, n] = consumed[row[1]];
    sum += budget - nj_of(row[6]);
    ++n;
  }
  for (const auto& [label, acc] : consumed) {
    EXPECT_EQ(r.report.mean_consumed.at(label).nj, acc.first / acc.second) << label;
  }

  // convergence: last tick with any violation, then the next tick
  std::map<std::uint64_t, bool> bad;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const std::uint64_t t = std::stoull(errors[i][0]);
    const NodeId node = static_cast<NodeId>(std::stoul(errors[i][1]));
    const Nanos mag = std::llabs(std::stoll(errors[i][3]));
    const bool router = role[node].rfind("router", 0) == 0;
    bad[t] = bad[t] || mag > (router ? 1000 : 50000);
  }
  std::optional<std::uint64_t> conv;
  for (const auto& [t, b] : bad) {
    if (b) conv.reset();
    else if (!conv) conv = t;
  }
  ASSERT_TRUE(conv);
  ASSERT_TRUE(r.report.convergence);
  EXPECT_EQ(r.report.convergence->ns, *conv);

  std::map<std::string, std::vector<Nanos>> by_role;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (std::stoull(errors[i][0]) < *conv) continue;
    by_role[role[static_cast<NodeId>(std::stoul(errors[i][1]))]].push_back(
        std::llabs(std::stoll(errors[i][3])));
  }
  ASSERT_EQ(by_role.size(), r.report.bands.size());
  for (auto& [label, v] : by_role) {
    std::sort(v.begin(), v.end());
    const ErrorBand& b = r.report.bands.at(label);
    EXPECT_EQ(b.samples, v.size());
    EXPECT_EQ(b.max_abs, v.back());
    EXPECT_EQ(b.min_abs, v.front());
    EXPECT_EQ(b.p99_abs, v[(v.size() * 99 + 99) / 100 - 1]);
  }

  // steady per-cycle message counts
  std::map<std::string, std::map<std::uint64_t, std::uint64_t>> per_cycle;
  for (std::size_t i = 1; i < messages.size(); ++i) {
    per_cycle[messages[i][0]][std::stoull(messages[i][1])] += std::stoull(messages[i][3]);
  }
  for (const auto& [level, expect] : r.report.per_cycle_messages) {
    const auto& cycles = per_cycle[std::string(to_string(level))];
    std::map<std::uint64_t, int> freq;
    std::size_t k = 0;
    for (const auto& [cycle, n] : cycles) {
      if (k != 0 && k + 1 != cycles.size()) ++freq[n];
      ++k;
    }
    const auto mode = std::max_element(freq.begin(), freq.end(),
                                       [](auto& a, auto& b) { return a.second < b.second; });
    EXPECT_EQ(expect, mode->first) << to_string(level);
  }
}

TEST(Report, WritesAllOutputsAndReportsUnwritablePaths) {
  ScenarioConfig c;
  c.end_s = 2;
  const RunResult r = run_scenario(c);
  const fs::path dir = fs::temp_directory_path() / "pbsync_report_test";
  fs::remove_all(dir);
  write_outputs(r, dir);
  for (const char* f : {"errors.csv", "energy.csv", "messages.csv", "report.txt"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  std::ifstream rep(dir / "report.txt");
  std::stringstream text;
  text << rep.rdbuf();
  EXPECT_NE(text.str().find("[protocol]"), std::string::npos);  // config echoed
  EXPECT_THROW(write_outputs(r, dir / "errors.csv" / "sub"), std::exception);
  fs::remove_all(dir);
}

TEST(Report, ComparisonNeedsMatchingPair) {
  ScenarioConfig hybrid;
  hybrid.end_s = 12;
  ScenarioConfig pure = hybrid;
  pure.protocol.level2 = Protocol::Pure1588;
  const ComparisonReport cmp = compare_protocols(hybrid, pure);
  EXPECT_GT(cmp.delta.nj, 0);
  EXPECT_GT(cmp.saving_pct, 0.0);
  EXPECT_EQ(cmp.rn_messages_hybrid, 32u);
  EXPECT_EQ(cmp.rn_messages_pure, 256u);
  const std::string text = render([&](auto& o) { write_comparison(cmp, o); });
  EXPECT_NE(text.find("reference 84.0"), std::string::npos);
  EXPECT_NE(text.find("reference 15.07"), std::string::npos);

  EXPECT_THROW(compare_protocols(hybrid, hybrid), ConfigError);
  pure.seed = 9;
  EXPECT_THROW(compare_protocols(hybrid, pure), ConfigError);
  pure.seed = hybrid.seed;
  pure.topology.routers = 4;
  EXPECT_THROW(compare_protocols(hybrid, pure), ConfigError);
}
