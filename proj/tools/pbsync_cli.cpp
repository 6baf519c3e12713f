// Command-line driver: run, compare and sweep scenario configs.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 runtime error.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pbsync/config.hpp"
#include "pbsync/report.hpp"

namespace fs = std::filesystem;
using namespace pbsync;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> until;
};

ScenarioConfig load(const std::string& path, const Overrides& o) {
  ScenarioConfig cfg = load_config(path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.until) cfg.end_s = *o.until;
  cfg.validate();
  return cfg;
}

void print_summary(const RunResult& r, std::ostream& out) {
  const RunReport& rep = r.report;
  out << "convergence: ";
  if (rep.convergence) out << rep.convergence->seconds() << " s\n";
  else out << "not reached\n";
  for (const auto& [label, b] : rep.bands) {
    out << "  " << label << ": p99 " << b.p99_abs << " ns, max " << b.max_abs << " ns ("
        << b.samples << " samples)\n";
  }
  for (const auto& [level, n] : rep.per_cycle_messages) {
    out << "  messages/cycle " << to_string(level) << ": " << n << '\n';
  }
}

int cmd_run(const std::string& config, const fs::path& out, const Overrides& o) {
  const RunResult r = run_scenario(load(config, o));
  write_outputs(r, out);
  print_summary(r, std::cout);
  std::cout << "outputs written to " << out.string() << '\n';
  return 0;
}

int cmd_compare(const std::string& a, const std::string& b, const fs::path& out,
                const Overrides& o) {
  const ComparisonReport cmp = compare_protocols(load(a, o), load(b, o));
  fs::create_directories(out);
  write_outputs(cmp.a, out / "a");
  write_outputs(cmp.b, out / "b");
  std::ofstream f(out / "comparison.txt", std::ios::binary);
  write_comparison(cmp, f);
  if (!f) throw std::runtime_error("cannot write " + (out / "comparison.txt").string());
  write_comparison(cmp, std::cout);
  return 0;
}

int cmd_sweep(const std::string& config, unsigned seeds, const fs::path& out, const Overrides& o) {
  const ScenarioConfig base = load(config, o);
  std::vector<std::future<RunResult>> runs;
  for (unsigned i = 0; i < seeds; ++i) {
    ScenarioConfig cfg = base;
    cfg.seed = base.seed + i;
    runs.push_back(std::async(std::launch::async, [cfg] { return run_scenario(cfg); }));
  }
  fs::create_directories(out);
  std::ofstream summary(out / "sweep.csv", std::ios::binary);
  summary << "seed,convergence_s,role,p99_abs_ns,max_abs_ns\n";
  for (unsigned i = 0; i < seeds; ++i) {
    const RunResult r = runs[i].get();
    write_outputs(r, out / ("seed_" + std::to_string(r.config.seed)));
    const std::string conv =
        r.report.convergence ? std::to_string(r.report.convergence->seconds()) : "";
    for (const auto& [label, b] : r.report.bands) {
      summary << r.config.seed << ',' << conv << ',' << label << ',' << b.p99_abs << ','
              << b.max_abs << '\n';
    }
    std::cout << "seed " << r.config.seed << ": ";
    print_summary(r, std::cout);
  }
  if (!summary) throw std::runtime_error("cannot write " + (out / "sweep.csv").string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical 1588/PBS clock synchronisation simulator"};
  app.require_subcommand(1);

  Overrides o;
  std::string out = "out";
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", o.seed, "override run seed");
    sub->add_option("--until", o.until, "override simulated end time in seconds");
  };

  std::string config, config_b;
  unsigned seeds = 1;
  CLI::App* run = app.add_subcommand("run", "run one scenario");
  run->add_option("config", config, "scenario file")->required();
  add_common(run);

  CLI::App* compare = app.add_subcommand("compare", "compare a hybrid and a pure 1588 scenario");
  compare->add_option("config_a", config, "first scenario")->required();
  compare->add_option("config_b", config_b, "second scenario")->required();
  add_common(compare);

  CLI::App* sweep = app.add_subcommand("sweep", "run one scenario over consecutive seeds");
  sweep->add_option("config", config, "scenario file")->required();
  sweep->add_option("--seeds", seeds, "number of seeds")->required()->check(CLI::PositiveNumber);
  add_common(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config, out, o);
    if (*compare) return cmd_compare(config, config_b, out, o);
    return cmd_sweep(config, seeds, out, o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
