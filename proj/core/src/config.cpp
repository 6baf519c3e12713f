#include "pbsync/config.hpp"
#include "pbsync/clock.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace pbsync {

std::string_view to_string(Protocol p) {
  return p == Protocol::Pure1588 ? "pure" : "hybrid";
}

std::string_view to_string(DriftMode m) {
  switch (m) {
    case DriftMode::Uniform: return "uniform";
    case DriftMode::Tiered: return "tiered";
    case DriftMode::Fixed: return "fixed";
    case DriftMode::Zero: return "zero";
  }
  return "unknown";
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& field, const std::string& raw) {
  const std::string v = trim(raw);
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(field, "expected a number, got '" + v + "'");
  }
  return out;
}

std::int64_t to_int(const std::string& field, const std::string& raw) {
  const std::string v = trim(raw);
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError(field, "expected an integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_uint(const std::string& field, const std::string& raw) {
  const std::string v = trim(raw);
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError(field, "expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

std::uint32_t to_u32(const std::string& field, const std::string& raw) {
  const std::uint64_t v = to_uint(field, raw);
  if (v > 0xffffffffULL) throw ConfigError(field, "value too large");
  return static_cast<std::uint32_t>(v);
}

bool to_bool(const std::string& field, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(field, "expected true or false, got '" + v + "'");
}

Protocol to_protocol(const std::string& field, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "pure") return Protocol::Pure1588;
  if (v == "hybrid") return Protocol::Hybrid1588Pbs;
  throw ConfigError(field, "expected pure or hybrid, got '" + v + "'");
}

DriftMode to_drift_mode(const std::string& field, const std::string& raw) {
  const std::string v = trim(raw);
  for (DriftMode m : {DriftMode::Uniform, DriftMode::Tiered, DriftMode::Fixed, DriftMode::Zero}) {
    if (to_string(m) == v) return m;
  }
  throw ConfigError(field, "expected uniform, tiered, fixed or zero, got '" + v + "'");
}

CostMode to_cost_mode(const std::string& field, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "per_message") return CostMode::PerMessage;
  if (v == "power_duration") return CostMode::PowerTimesDuration;
  throw ConfigError(field, "expected per_message or power_duration, got '" + v + "'");
}

std::set<MessageKind> to_kinds(const std::string& field, const std::string& raw) {
  std::set<MessageKind> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string k = trim(item);
    if (k.empty()) continue;
    auto kind = parse_message_kind(k);
    if (!kind) throw ConfigError(field, "unknown message kind '" + k + "'");
    out.insert(*kind);
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

using Setter = std::function<void(const std::string& field, const std::string& value)>;

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()), e.message());
  }

  ScenarioConfig c;
  auto& t = c.topology;
  auto& p = c.protocol;
  auto& k = c.clock;
  auto& m = c.medium;
  auto& e = c.energy;
  auto& x = c.metrics;

  const std::map<std::string, std::map<std::string, Setter>> fixed{
      {"run",
       {{"seed", [&](auto& f, auto& v) { c.seed = to_uint(f, v); }},
        {"end_s", [&](auto& f, auto& v) { c.end_s = to_double(f, v); }}}},
      {"topology",
       {{"routers", [&](auto& f, auto& v) { t.routers = to_u32(f, v); }},
        {"leaves_per_router", [&](auto& f, auto& v) { t.leaves_per_router = to_u32(f, v); }},
        {"router_distance_m", [&](auto& f, auto& v) { t.router_distance_m = to_double(f, v); }},
        {"leaf_distance_m", [&](auto& f, auto& v) { t.leaf_distance_m = to_double(f, v); }},
        {"radio_range_m", [&](auto& f, auto& v) { t.radio_range_m = to_double(f, v); }},
        {"placement_jitter_m", [&](auto& f, auto& v) { t.placement_jitter_m = to_double(f, v); }}}},
      {"protocol",
       {{"level1", [&](auto& f, auto& v) { p.level1 = to_protocol(f, v); }},
        {"level2", [&](auto& f, auto& v) { p.level2 = to_protocol(f, v); }},
        {"cycle_s", [&](auto& f, auto& v) { p.cycle_s = to_double(f, v); }},
        {"rounds_per_cycle", [&](auto& f, auto& v) { p.rounds_per_cycle = to_u32(f, v); }},
        {"level1_start_s", [&](auto& f, auto& v) { p.level1_start_s = to_double(f, v); }},
        {"level2_start_s", [&](auto& f, auto& v) { p.level2_start_s = to_double(f, v); }},
        {"response_delay_us", [&](auto& f, auto& v) { p.response_delay_us = to_double(f, v); }}}},
      {"clock",
       {{"drift_mode", [&](auto& f, auto& v) { k.drift_mode = to_drift_mode(f, v); }},
        {"drift_ppm", [&](auto& f, auto& v) { k.drift_ppm = to_double(f, v); }},
        {"router_drift_ppm", [&](auto& f, auto& v) { k.router_drift_ppm = to_double(f, v); }},
        {"leaf_drift_ppm", [&](auto& f, auto& v) { k.leaf_drift_ppm = to_double(f, v); }},
        {"initial_offset_max_us", [&](auto& f, auto& v) { k.initial_offset_max_us = to_double(f, v); }},
        {"timestamp_noise_ns", [&](auto& f, auto& v) { k.timestamp_noise_ns = to_double(f, v); }}}},
      {"medium",
       {{"slot_us", [&](auto& f, auto& v) { m.slot_us = to_double(f, v); }},
        {"message_spacing_us", [&](auto& f, auto& v) { m.message_spacing_us = to_double(f, v); }},
        {"spatial_reuse", [&](auto& f, auto& v) { m.spatial_reuse = to_bool(f, v); }},
        {"signal_speed_m_per_ns", [&](auto& f, auto& v) { m.signal_speed_m_per_ns = to_double(f, v); }},
        {"jitter_cr_ns", [&](auto& f, auto& v) { m.jitter_cr_ns = to_double(f, v); }},
        {"jitter_rn_ns", [&](auto& f, auto& v) { m.jitter_rn_ns = to_double(f, v); }},
        {"loss_probability", [&](auto& f, auto& v) { m.loss_probability = to_double(f, v); }},
        {"listener_skew_min_ns", [&](auto& f, auto& v) { m.listener_skew_min_ns = to_double(f, v); }},
        {"listener_skew_max_ns", [&](auto& f, auto& v) { m.listener_skew_max_ns = to_double(f, v); }}}},
      {"energy",
       {{"budget_j", [&](auto& f, auto& v) { e.budget_j = to_double(f, v); }},
        {"mode", [&](auto& f, auto& v) { e.model.mode = to_cost_mode(f, v); }},
        {"tx_cost_mj", [&](auto& f, auto& v) { e.model.tx_cost = Energy::from_millijoules(to_double(f, v)); }},
        {"rx_cost_mj", [&](auto& f, auto& v) { e.model.rx_cost = Energy::from_millijoules(to_double(f, v)); }},
        {"tx_power_mw", [&](auto& f, auto& v) { e.model.tx_power_mw = to_double(f, v); }},
        {"rx_power_mw", [&](auto& f, auto& v) { e.model.rx_power_mw = to_double(f, v); }},
        {"bitrate_kbps", [&](auto& f, auto& v) { e.model.bitrate_kbps = to_double(f, v); }},
        {"idle_power_mw", [&](auto& f, auto& v) { e.model.idle_power_mw = to_double(f, v); }}}},
      {"metrics",
       {{"sampling", [&](auto& f, auto& v) { x.sampling = to_bool(f, v); }},
        {"sample_interval_ms", [&](auto& f, auto& v) { x.sample_interval_ms = to_double(f, v); }},
        {"router_bound_ns", [&](auto& f, auto& v) { x.router_bound_ns = to_double(f, v); }},
        {"leaf_bound_ns", [&](auto& f, auto& v) { x.leaf_bound_ns = to_double(f, v); }},
        {"counted_kinds", [&](auto& f, auto& v) { x.counted_kinds = to_kinds(f, v); }}}},
  };

  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) {
      throw ConfigError(section, "key outside of any section");
    }
    for (const auto& [key, node] : body) {
      const std::string field = section + "." + key;
      const std::string value = node.data();
      if (auto s = fixed.find(section); s != fixed.end()) {
        auto setter = s->second.find(key);
        if (setter == s->second.end()) throw ConfigError(field, "unknown key");
        setter->second(field, value);
      } else if (section == "slaves") {
        p.slaves[static_cast<NodeId>(to_u32(field, key))] = to_u32(field, value);
      } else if (section == "drift_ppm") {
        k.drift_ppm_of[static_cast<NodeId>(to_u32(field, key))] = to_double(field, value);
      } else if (section == "offset_ns") {
        k.offset_ns_of[static_cast<NodeId>(to_u32(field, key))] = to_int(field, value);
      } else if (section == "links") {
        const auto arrow = key.find("->");
        if (arrow == std::string::npos) throw ConfigError(field, "expected '<from>-><to>'");
        const NodeId from = to_u32(field, key.substr(0, arrow));
        const NodeId to = to_u32(field, key.substr(arrow + 2));
        m.link_delay_ns[{from, to}] = to_int(field, value);
      } else {
        throw ConfigError(section, "unknown section");
      }
    }
  }
  t.seed = c.seed;
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Nanos ScenarioConfig::exchange_period() const {
  return static_cast<Nanos>(std::llround(protocol.cycle_s * 1e9)) /
         static_cast<Nanos>(std::max<std::uint32_t>(protocol.rounds_per_cycle, 1));
}

void ScenarioConfig::validate() const {
  auto require = [](bool ok, const char* field, const std::string& what) {
    if (!ok) throw ConfigError(field, what);
  };
  require(end_s > 0.0, "run.end_s", "must be positive");
  require(topology.routers >= 1, "topology.routers", "must be at least 1");
  require(topology.leaves_per_router >= 1, "topology.leaves_per_router", "must be at least 1");
  require(topology.router_distance_m > 0.0, "topology.router_distance_m", "must be positive");
  require(topology.leaf_distance_m > 0.0, "topology.leaf_distance_m", "must be positive");
  require(topology.radio_range_m > 0.0, "topology.radio_range_m", "must be positive");
  require(topology.placement_jitter_m >= 0.0, "topology.placement_jitter_m", "must be >= 0");

  require(protocol.cycle_s > 0.0, "protocol.cycle_s", "must be positive");
  require(protocol.rounds_per_cycle >= 1, "protocol.rounds_per_cycle", "must be at least 1");
  require(protocol.level1_start_s >= 0.0, "protocol.level1_start_s", "must be >= 0");
  require(protocol.level2_start_s >= protocol.level1_start_s, "protocol.level2_start_s",
          "must be >= protocol.level1_start_s");
  require(protocol.response_delay_us >= 0.0, "protocol.response_delay_us", "must be >= 0");

  require(clock.drift_ppm >= 0.0 && clock.drift_ppm <= kMaxDrift * 1e6, "clock.drift_ppm",
          "must be in [0, 1000]");
  require(std::abs(clock.router_drift_ppm) <= kMaxDrift * 1e6, "clock.router_drift_ppm",
          "must be in [-1000, 1000]");
  require(std::abs(clock.leaf_drift_ppm) <= kMaxDrift * 1e6, "clock.leaf_drift_ppm",
          "must be in [-1000, 1000]");
  require(clock.initial_offset_max_us >= 0.0, "clock.initial_offset_max_us", "must be >= 0");
  require(clock.timestamp_noise_ns >= 0.0, "clock.timestamp_noise_ns", "must be >= 0");

  require(medium.slot_us > 0.0, "medium.slot_us", "must be positive");
  require(medium.message_spacing_us > 0.0, "medium.message_spacing_us", "must be positive");
  require(medium.signal_speed_m_per_ns > 0.0, "medium.signal_speed_m_per_ns", "must be positive");
  require(medium.jitter_cr_ns >= 0.0, "medium.jitter_cr_ns", "must be >= 0");
  require(medium.jitter_rn_ns >= 0.0, "medium.jitter_rn_ns", "must be >= 0");
  require(medium.loss_probability >= 0.0 && medium.loss_probability <= 1.0,
          "medium.loss_probability", "must be in [0, 1]");
  require(medium.listener_skew_min_ns >= 0.0, "medium.listener_skew_min_ns", "must be >= 0");
  require(medium.listener_skew_max_ns >= medium.listener_skew_min_ns, "medium.listener_skew_max_ns",
          "must be >= medium.listener_skew_min_ns");

  require(energy.budget_j > 0.0, "energy.budget_j", "must be positive");
  require(energy.model.tx_cost.nj >= 0, "energy.tx_cost_mj", "must be >= 0");
  require(energy.model.rx_cost.nj >= 0, "energy.rx_cost_mj", "must be >= 0");
  require(energy.model.tx_power_mw >= 0.0, "energy.tx_power_mw", "must be >= 0");
  require(energy.model.rx_power_mw >= 0.0, "energy.rx_power_mw", "must be >= 0");
  require(energy.model.bitrate_kbps > 0.0, "energy.bitrate_kbps", "must be positive");
  require(energy.model.idle_power_mw >= 0.0, "energy.idle_power_mw", "must be >= 0");

  require(metrics.sample_interval_ms > 0.0, "metrics.sample_interval_ms", "must be positive");
  require(metrics.router_bound_ns > 0.0, "metrics.router_bound_ns", "must be positive");
  require(metrics.leaf_bound_ns > 0.0, "metrics.leaf_bound_ns", "must be positive");
  require(!metrics.counted_kinds.empty(), "metrics.counted_kinds", "must name at least one kind");

  const std::uint64_t routers = topology.routers;
  const std::uint64_t leaves = topology.leaves_per_router;
  const std::uint64_t node_count = 1 + routers * (1 + leaves);

  // TDMA frame = one exchange period, one slot per node.
  const auto slot = static_cast<Nanos>(std::llround(medium.slot_us * 1e3));
  const Nanos period = exchange_period();
  require(slot > 0, "medium.slot_us", "must be at least 1 ns");
  require(period % slot == 0, "protocol.cycle_s",
          "exchange period (cycle / rounds) of " + std::to_string(period) +
              " ns is not a whole number of " + std::to_string(slot) + " ns slots");
  require(static_cast<std::uint64_t>(period / slot) >= node_count, "protocol.cycle_s",
          "exchange period holds " + std::to_string(period / slot) + " slots but the topology has " +
              std::to_string(node_count) + " nodes");

  // Busiest slot: a master sends DelayResponse, Sync and FollowUp per 1588
  // child; a router also sends its own DelayRequest in the same slot.
  const std::uint64_t per_slave = 3;
  std::uint64_t busiest = 0;
  busiest = std::max(busiest, (protocol.level1 == Protocol::Pure1588 ? routers : 1) * per_slave);
  busiest = std::max(busiest, (protocol.level2 == Protocol::Pure1588 ? leaves : 1) * per_slave + 1);
  const auto spacing = static_cast<Nanos>(std::llround(medium.message_spacing_us * 1e3));
  require(spacing > 0 && static_cast<std::uint64_t>(spacing) * busiest <= static_cast<std::uint64_t>(slot),
          "medium.message_spacing_us",
          std::to_string(busiest) + " messages at this spacing do not fit in one slot");

  auto is_child = [&](NodeId master, NodeId child) {
    if (master == 0) return child >= 1 && child <= routers;
    if (master > routers) return false;
    const std::uint64_t first = 1 + routers + (master - 1) * leaves;
    return child >= first && child < first + leaves;
  };
  for (const auto& [master, slave] : protocol.slaves) {
    const std::string field = "slaves." + std::to_string(master);
    require(master <= routers, field.c_str(), "not a concentrator or router id");
    require(is_child(master, slave), field.c_str(),
            "node " + std::to_string(slave) + " is not a child of " + std::to_string(master));
  }
  for (const auto& [node, ppm] : clock.drift_ppm_of) {
    const std::string field = "drift_ppm." + std::to_string(node);
    require(node < node_count, field.c_str(), "no such node");
    require(std::abs(ppm) <= kMaxDrift * 1e6, field.c_str(), "drift beyond 1000 ppm");
  }
  for (const auto& [node, off] : clock.offset_ns_of) {
    require(node < node_count, ("offset_ns." + std::to_string(node)).c_str(), "no such node");
  }
  for (const auto& [link, delay] : medium.link_delay_ns) {
    const std::string field = "links." + std::to_string(link.first) + "->" + std::to_string(link.second);
    require(link.first < node_count && link.second < node_count, field.c_str(), "no such node");
    require(delay >= 0, field.c_str(), "delay must be >= 0");
  }
}

std::string to_text(const ScenarioConfig& c) {
  std::ostringstream o;
  o << "[run]\nseed = " << c.seed << "\nend_s = " << fmt(c.end_s) << "\n\n";
  const auto& t = c.topology;
  o << "[topology]\nrouters = " << t.routers << "\nleaves_per_router = " << t.leaves_per_router
    << "\nrouter_distance_m = " << fmt(t.router_distance_m)
    << "\nleaf_distance_m = " << fmt(t.leaf_distance_m)
    << "\nradio_range_m = " << fmt(t.radio_range_m)
    << "\nplacement_jitter_m = " << fmt(t.placement_jitter_m) << "\n\n";
  const auto& p = c.protocol;
  o << "[protocol]\nlevel1 = " << to_string(p.level1) << "\nlevel2 = " << to_string(p.level2)
    << "\ncycle_s = " << fmt(p.cycle_s) << "\nrounds_per_cycle = " << p.rounds_per_cycle
    << "\nlevel1_start_s = " << fmt(p.level1_start_s)
    << "\nlevel2_start_s = " << fmt(p.level2_start_s)
    << "\nresponse_delay_us = " << fmt(p.response_delay_us) << "\n\n";
  if (!p.slaves.empty()) {
    o << "[slaves]\n";
    for (const auto& [m, s] : p.slaves) o << m << " = " << s << "\n";
    o << "\n";
  }
  const auto& k = c.clock;
  o << "[clock]\ndrift_mode = " << to_string(k.drift_mode) << "\ndrift_ppm = " << fmt(k.drift_ppm)
    << "\nrouter_drift_ppm = " << fmt(k.router_drift_ppm)
    << "\nleaf_drift_ppm = " << fmt(k.leaf_drift_ppm)
    << "\ninitial_offset_max_us = " << fmt(k.initial_offset_max_us)
    << "\ntimestamp_noise_ns = " << fmt(k.timestamp_noise_ns) << "\n\n";
  if (!k.drift_ppm_of.empty()) {
    o << "[drift_ppm]\n";
    for (const auto& [n, v] : k.drift_ppm_of) o << n << " = " << fmt(v) << "\n";
    o << "\n";
  }
  if (!k.offset_ns_of.empty()) {
    o << "[offset_ns]\n";
    for (const auto& [n, v] : k.offset_ns_of) o << n << " = " << v << "\n";
    o << "\n";
  }
  const auto& m = c.medium;
  o << "[medium]\nslot_us = " << fmt(m.slot_us) << "\nmessage_spacing_us = " << fmt(m.message_spacing_us)
    << "\nspatial_reuse = " << (m.spatial_reuse ? "true" : "false")
    << "\nsignal_speed_m_per_ns = " << fmt(m.signal_speed_m_per_ns)
    << "\njitter_cr_ns = " << fmt(m.jitter_cr_ns) << "\njitter_rn_ns = " << fmt(m.jitter_rn_ns)
    << "\nloss_probability = " << fmt(m.loss_probability)
    << "\nlistener_skew_min_ns = " << fmt(m.listener_skew_min_ns)
    << "\nlistener_skew_max_ns = " << fmt(m.listener_skew_max_ns) << "\n\n";
  if (!m.link_delay_ns.empty()) {
    o << "[links]\n";
    for (const auto& [l, d] : m.link_delay_ns) o << l.first << "->" << l.second << " = " << d << "\n";
    o << "\n";
  }
  const auto& e = c.energy;
  o << "[energy]\nbudget_j = " << fmt(e.budget_j)
    << "\nmode = " << (e.model.mode == CostMode::PerMessage ? "per_message" : "power_duration")
    << "\ntx_cost_mj = " << fmt(static_cast<double>(e.model.tx_cost.nj) * 1e-6)
    << "\nrx_cost_mj = " << fmt(static_cast<double>(e.model.rx_cost.nj) * 1e-6)
    << "\ntx_power_mw = " << fmt(e.model.tx_power_mw) << "\nrx_power_mw = " << fmt(e.model.rx_power_mw)
    << "\nbitrate_kbps = " << fmt(e.model.bitrate_kbps)
    << "\nidle_power_mw = " << fmt(e.model.idle_power_mw) << "\n\n";
  const auto& x = c.metrics;
  o << "[metrics]\nsampling = " << (x.sampling ? "true" : "false")
    << "\nsample_interval_ms = " << fmt(x.sample_interval_ms)
    << "\nrouter_bound_ns = " << fmt(x.router_bound_ns) << "\nleaf_bound_ns = " << fmt(x.leaf_bound_ns)
    << "\ncounted_kinds = ";
  bool first = true;
  for (MessageKind kind : x.counted_kinds) {
    o << (first ? "" : ",") << to_string(kind);
    first = false;
  }
  o << "\n";
  return o.str();
}

}  // namespace pbsync
