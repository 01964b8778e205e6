#pragma once

// Sectioned key = value configuration files.
//
//   # comment
//   [scenario]
//   beta = 5
//   sf_set = 7, 8, 9
//
// Keys are addressed as "section.key". Unknown sections or keys are errors,
// reported with the line they appear on.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "uavec/analysis.hpp"
#include "uavec/energy.hpp"
#include "uavec/scenario.hpp"

namespace uavec::config {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

class Document {
 public:
  struct Entry {
    std::string value;
    int line = 0;  // 0 for command-line overrides
  };

  static Document parse(std::string_view text, std::string source = "<config>") {
    Document doc;
    doc.source_ = std::move(source);
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++line_no;
      if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
      const auto line = detail::trim(raw);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') doc.fail(line_no, "unterminated section header");
        section = std::string(detail::trim(line.substr(1, line.size() - 2)));
        if (!known_sections().count(section)) doc.fail(line_no, "unknown section [" + section + "]");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) doc.fail(line_no, "expected 'key = value'");
      if (section.empty()) doc.fail(line_no, "key outside of any [section]");
      const auto key = std::string(detail::trim(line.substr(0, eq)));
      if (key.empty()) doc.fail(line_no, "empty key");
      const auto full = section + "." + key;
      if (doc.entries_.count(full)) doc.fail(line_no, "duplicate key '" + full + "'");
      doc.entries_[full] = {std::string(detail::trim(line.substr(eq + 1))), line_no};
    }
    return doc;
  }

  static Document load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
  }

  /// Applies "section.key=value" on top of the file contents.
  void set_override(std::string_view assignment) {
    const auto eq = assignment.find('=');
    const auto key = std::string(detail::trim(assignment.substr(0, eq)));
    if (eq == std::string_view::npos || key.find('.') == std::string::npos) {
      throw ConfigError("override '" + std::string(assignment) + "': expected section.key=value");
    }
    if (!known_sections().count(key.substr(0, key.find('.')))) {
      throw ConfigError("override '" + std::string(assignment) + "': unknown section");
    }
    entries_[key] = {std::string(detail::trim(assignment.substr(eq + 1))), 0};
  }

  const Entry* find(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  bool has(const std::string& key) const { return find(key) != nullptr; }
  bool has_section(const std::string& section) const {
    const auto prefix = section + ".";
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const auto& kv) { return kv.first.rfind(prefix, 0) == 0; });
  }

  std::vector<std::string> keys_in(const std::string& section) const {
    std::vector<std::string> out;
    const auto prefix = section + ".";
    for (const auto& [k, e] : entries_)
      if (k.rfind(prefix, 0) == 0) out.push_back(k);
    return out;
  }

  [[noreturn]] void fail(int line, const std::string& what) const {
    if (line > 0) throw ConfigError(source_ + ":" + std::to_string(line) + ": " + what);
    throw ConfigError(source_ + ": " + what);
  }

  [[noreturn]] void fail_at(const std::string& key, const std::string& what) const {
    const auto* e = find(key);
    if (e && e->line == 0) throw ConfigError("override " + key + ": " + what);
    fail(e ? e->line : 0, key + ": " + what);
  }

  const std::string& source() const { return source_; }

  static const std::set<std::string>& known_sections() {
    static const std::set<std::string> s{"scenario", "geometry", "fading", "capture",
                                         "run",      "analysis", "sweep",  "energy"};
    return s;
  }

 private:
  std::string source_;
  std::map<std::string, Entry> entries_;
};

// ---------------------------------------------------------------------------
// Typed access

class Reader {
 public:
  explicit Reader(const Document& doc) : doc_(doc) {}

  template <typename T>
  std::optional<T> get(const std::string& key) {
    used_.insert(key);
    const auto* e = doc_.find(key);
    if (!e) return std::nullopt;
    return parse<T>(key, e->value);
  }

  template <typename T>
  T require(const std::string& key) {
    auto v = get<T>(key);
    if (!v) {
      const auto dot = key.find('.');
      doc_.fail(0, "missing required field '" + key.substr(dot + 1) + "' in [" + key.substr(0, dot) + "]");
    }
    return *v;
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) {
    auto v = get<T>(key);
    return v ? *v : fallback;
  }

  std::optional<std::vector<double>> list(const std::string& key) {
    used_.insert(key);
    const auto* e = doc_.find(key);
    if (!e) return std::nullopt;
    std::vector<double> out;
    for (const auto& item : split(e->value)) out.push_back(parse<double>(key, item));
    return out;
  }

  std::optional<std::vector<std::string>> words(const std::string& key) {
    used_.insert(key);
    const auto* e = doc_.find(key);
    if (!e) return std::nullopt;
    return split(e->value);
  }

  void mark_used(const std::string& key) { used_.insert(key); }

  /// Every key of `section` must have been read.
  void reject_unknown(const std::string& section) const {
    for (const auto& k : doc_.keys_in(section))
      if (!used_.count(k)) doc_.fail_at(k, "unknown key");
  }

  const Document& doc() const { return doc_; }

 private:
  static std::vector<std::string> split(std::string_view s) {
    s = detail::trim(s);
    if (!s.empty() && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
      const auto comma = s.find(',', pos);
      const auto item = detail::trim(s.substr(pos, comma == std::string_view::npos ? s.size() - pos : comma - pos));
      if (!item.empty()) out.emplace_back(item);
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    return out;
  }

  template <typename T>
  T parse(const std::string& key, std::string_view text) const {
    if constexpr (std::is_same_v<T, std::string>) {
      return std::string(text);
    } else if constexpr (std::is_same_v<T, bool>) {
      if (text == "true" || text == "yes" || text == "1" || text == "on") return true;
      if (text == "false" || text == "no" || text == "0" || text == "off") return false;
      doc_.fail_at(key, "expected a boolean, got '" + std::string(text) + "'");
    } else if constexpr (std::is_floating_point_v<T>) {
      // from_chars for double is unavailable on older libstdc++.
      std::string buf(text);
      char* end = nullptr;
      const double v = std::strtod(buf.c_str(), &end);
      if (buf.empty() || end != buf.c_str() + buf.size()) {
        doc_.fail_at(key, "expected a number, got '" + buf + "'");
      }
      return static_cast<T>(v);
    } else {
      T v{};
      const auto* b = text.data();
      const auto* e = text.data() + text.size();
      const auto r = std::from_chars(b, e, v);
      if (r.ec != std::errc{} || r.ptr != e) {
        doc_.fail_at(key, "expected an integer, got '" + std::string(text) + "'");
      }
      return v;
    }
  }

  const Document& doc_;
  std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// Experiments

inline constexpr std::string_view kSweepAxes[] = {"p_b", "n_s", "n", "epsilon"};

struct SweepSpec {
  std::string axis;
  std::vector<double> values;
  std::string series_axis;  // empty when there is a single series
  std::vector<double> series_values;
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  std::vector<Scheme> schemes{std::begin(kAllSchemes), std::end(kAllSchemes)};
  analysis::QuadratureOptions quad;
  analysis::ReplicationMode replication_mode = analysis::ReplicationMode::Corrected;
  std::optional<SweepSpec> sweep;

  analysis::AnalysisInputs analysis_inputs() const { return {scenario, quad, replication_mode}; }
};

inline bool is_sweep_axis(std::string_view a) {
  return std::find(std::begin(kSweepAxes), std::end(kSweepAxes), a) != std::end(kSweepAxes);
}

/// Sets one sweep axis on a scenario.
inline void apply_axis(ScenarioConfig& cfg, std::string_view axis, double value) {
  auto as_int = [&](std::string_view name) {
    if (value != std::floor(value)) throw ConfigError(std::string(name) + " must be an integer");
    return static_cast<int>(value);
  };
  if (axis == "p_b") cfg.p_b = value;
  else if (axis == "n_s") cfg.n_s = as_int(axis);
  else if (axis == "n") cfg.n = as_int(axis);
  else if (axis == "epsilon") cfg.epsilon = as_int(axis);
  else throw ConfigError("unknown sweep axis '" + std::string(axis) + "'");
}

inline energy::EnergyProfile read_energy(Reader& r) {
  energy::EnergyProfile p;
  p.battery_mah = r.require<double>("energy.battery_mah");
  p.lifetime_days = r.require<double>("energy.lifetime_days");
  p.visits_per_day = r.require<double>("energy.visits_per_day");
  p.compute_s_per_day = r.require<double>("energy.compute_s_per_day");
  p.tx_current_ma = r.require<double>("energy.tx_current_ma");
  p.compute_current_ma = r.require<double>("energy.compute_current_ma");
  p.payload_bytes = r.require<int>("energy.payload_bytes");
  if (auto sfs = r.list("energy.sf_set")) {
    p.sf_set.clear();
    for (double v : *sfs) p.sf_set.push_back(static_cast<int>(v));
  } else {
    r.doc().fail(0, "missing required field 'sf_set' in [energy]");
  }
  p.bandwidth_hz = r.get_or<double>("energy.bandwidth_hz", p.bandwidth_hz);
  p.coding_rate = r.get_or<int>("energy.coding_rate", p.coding_rate);
  p.preamble_symbols = r.get_or<int>("energy.preamble_symbols", p.preamble_symbols);
  p.explicit_header = r.get_or<bool>("energy.explicit_header", p.explicit_header);
  p.crc = r.get_or<bool>("energy.crc", p.crc);
  p.airtime_s = r.get<double>("energy.airtime_s");
  if (auto ldro = r.get<std::string>("energy.low_data_rate")) {
    if (*ldro == "auto") p.low_data_rate = energy::LowDataRate::Auto;
    else if (*ldro == "on") p.low_data_rate = energy::LowDataRate::On;
    else if (*ldro == "off") p.low_data_rate = energy::LowDataRate::Off;
    else r.doc().fail_at("energy.low_data_rate", "expected auto, on or off");
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    r.doc().fail(0, e.what());
  }
  return p;
}

inline energy::EnergyProfile to_energy_profile(const Document& doc) {
  Reader r(doc);
  auto p = read_energy(r);
  r.reject_unknown("energy");
  return p;
}

inline void read_capture(Reader& r, channel::CaptureMatrix& cap) {
  const auto co = r.get<double>("capture.co_sf");
  const auto inter = r.get<double>("capture.inter_sf");
  const auto co_db = r.get<double>("capture.co_sf_db");
  const auto inter_db = r.get<double>("capture.inter_sf_db");
  if (co && co_db) r.doc().fail_at("capture.co_sf_db", "give co_sf or co_sf_db, not both");
  if (inter && inter_db) r.doc().fail_at("capture.inter_sf_db", "give inter_sf or inter_sf_db, not both");
  const double co_lin = co ? *co : co_db ? channel::CaptureMatrix::db_to_linear(*co_db) : 4.0;
  const double inter_lin = inter ? *inter : inter_db ? channel::CaptureMatrix::db_to_linear(*inter_db)
                                                     : std::pow(10.0, -1.6);
  if (!(co_lin > 0) || !(inter_lin > 0)) r.doc().fail(0, "capture thresholds must be > 0");
  cap = channel::CaptureMatrix(co_lin, inter_lin);
  // pair_K_J (linear) or pair_db_K_J override single entries.
  for (const auto& key : r.doc().keys_in("capture")) {
    const auto name = key.substr(std::string("capture.").size());
    const bool db = name.rfind("pair_db_", 0) == 0;
    if (!db && name.rfind("pair_", 0) != 0) continue;
    const auto rest = name.substr(db ? 8 : 5);
    int k = 0, j = 0;
    char tail = 0;
    if (std::sscanf(rest.c_str(), "%d_%d%c", &k, &j, &tail) != 2 || k < 7 || k > 12 || j < 7 || j > 12) {
      r.doc().fail_at(key, "expected pair_<sf>_<sf> or pair_db_<sf>_<sf> with SFs in 7..12");
    }
    const double v = *r.get<double>(key);
    const double lin = db ? channel::CaptureMatrix::db_to_linear(v) : v;
    if (!(lin > 0)) r.doc().fail_at(key, "threshold must be > 0");
    cap.set(k, j, lin);
  }
}

inline ExperimentConfig to_experiment(const Document& doc) {
  Reader r(doc);
  ExperimentConfig x;
  auto& s = x.scenario;

  s.n = r.require<int>("scenario.n");
  s.beta = r.require<int>("scenario.beta");
  s.epsilon = r.require<int>("scenario.epsilon");
  s.n_s = r.require<int>("scenario.n_s");
  s.n_f = r.require<int>("scenario.n_f");
  s.p_b = r.require<double>("scenario.p_b");
  if (auto sfs = r.list("scenario.sf_set")) {
    s.sf_set.clear();
    for (double v : *sfs) s.sf_set.push_back(static_cast<int>(v));
  } else {
    doc.fail(0, "missing required field 'sf_set' in [scenario]");
  }
  s.slot_len_s = r.get_or<double>("scenario.slot_len_s", s.slot_len_s);
  s.q = r.get_or<int>("scenario.q", s.q);
  if (auto nm = r.get<std::string>("scenario.n_max")) {
    if (*nm == "auto") {
      s.n_max = static_cast<int>(energy::n_max(read_energy(r)).n_max);
    } else {
      s.n_max = r.get<int>("scenario.n_max");
    }
  }
  if (auto names = r.words("scenario.schemes")) {
    x.schemes.clear();
    for (const auto& w : *names) {
      auto sc = parse_scheme(w);
      if (!sc) doc.fail_at("scenario.schemes", "unknown scheme '" + w + "'");
      x.schemes.push_back(*sc);
    }
    if (x.schemes.empty()) doc.fail_at("scenario.schemes", "no schemes listed");
  }
  s.scheme = x.schemes.front();

  s.geometry.radius_m = r.get_or<double>("geometry.radius_m", s.geometry.radius_m);
  s.geometry.altitude_m = r.get_or<double>("geometry.altitude_m", s.geometry.altitude_m);
  s.geometry.path_loss_exp = r.get_or<double>("geometry.path_loss_exp", s.geometry.path_loss_exp);
  s.fading.m_shape = r.get_or<double>("fading.m", s.fading.m_shape);
  s.fading.omega = r.get_or<double>("fading.omega", s.fading.omega);
  read_capture(r, s.capture);

  s.runs = r.get_or<long>("run.runs", s.runs);
  s.seed = r.get_or<std::uint64_t>("run.seed", s.seed);
  s.threads = r.get_or<unsigned>("run.threads", s.threads);
  s.payload_bytes = r.get_or<std::size_t>("run.payload_bytes", s.payload_bytes);

  x.quad.nodes = r.get_or<int>("analysis.nodes", x.quad.nodes);
  x.quad.max_nodes = r.get_or<int>("analysis.max_nodes", x.quad.max_nodes);
  x.quad.rel_tol = r.get_or<double>("analysis.rel_tol", x.quad.rel_tol);
  if (auto mode = r.get<std::string>("analysis.replication_mode")) {
    if (*mode == "corrected") x.replication_mode = analysis::ReplicationMode::Corrected;
    else if (*mode == "printed") x.replication_mode = analysis::ReplicationMode::Printed;
    else doc.fail_at("analysis.replication_mode", "expected corrected or printed");
  }

  if (doc.has_section("sweep")) {
    SweepSpec sw;
    sw.axis = r.require<std::string>("sweep.axis");
    if (!is_sweep_axis(sw.axis)) doc.fail_at("sweep.axis", "expected one of p_b, n_s, n, epsilon");
    auto vals = r.list("sweep.values");
    if (!vals || vals->empty()) doc.fail(0, "missing required field 'values' in [sweep]");
    sw.values = *vals;
    if (!std::is_sorted(sw.values.begin(), sw.values.end(), std::less_equal<>{}) ||
        std::adjacent_find(sw.values.begin(), sw.values.end()) != sw.values.end()) {
      doc.fail_at("sweep.values", "grid must be strictly increasing");
    }
    if (auto sa = r.get<std::string>("sweep.series_axis")) {
      if (!is_sweep_axis(*sa) || *sa == sw.axis) doc.fail_at("sweep.series_axis", "must be another sweep axis");
      sw.series_axis = *sa;
      auto sv = r.list("sweep.series_values");
      if (!sv || sv->empty()) doc.fail(0, "missing required field 'series_values' in [sweep]");
      sw.series_values = *sv;
    }
    x.sweep = sw;
  }

  for (const auto& sec : Document::known_sections())
    if (sec != "energy") r.reject_unknown(sec);
  // [energy] is only read for n_max = auto; otherwise ignore it.
  for (const auto& k : doc.keys_in("energy")) r.mark_used(k);

  try {
    s.validate();
    if (x.sweep) {
      for (double v : x.sweep->values) {
        ScenarioConfig probe = s;
        apply_axis(probe, x.sweep->axis, v);
        for (double sv : x.sweep->series_values) apply_axis(probe, x.sweep->series_axis, sv);
        probe.validate();
      }
    }
  } catch (const std::exception& e) {
    doc.fail(0, e.what());
  }
  return x;
}

// ---------------------------------------------------------------------------
// Replay identity

inline std::string canonical(const ScenarioConfig& s) {
  std::ostringstream o;
  o.precision(17);
  o << "n=" << s.n << ";beta=" << s.beta << ";epsilon=" << s.epsilon << ";n_s=" << s.n_s
    << ";slot_len_s=" << s.slot_len_s << ";n_f=" << s.n_f << ";sf_set=";
  for (int sf : s.sf_set) o << sf << ',';
  o << ";p_b=" << s.p_b << ";scheme=" << to_string(s.scheme) << ";q=" << s.q
    << ";radius=" << s.geometry.radius_m << ";altitude=" << s.geometry.altitude_m
    << ";alpha=" << s.geometry.path_loss_exp << ";m=" << s.fading.m_shape << ";omega=" << s.fading.omega
    << ";n_max=" << (s.n_max ? std::to_string(*s.n_max) : "none") << ";runs=" << s.runs
    << ";seed=" << s.seed << ";payload=" << s.payload_bytes << ";xi=";
  for (int k : s.sf_set)
    for (int j : s.sf_set) o << s.capture(k, j) << ',';
  return o.str();
}

/// FNV-1a over the canonical form.
inline std::uint64_t config_hash(const ScenarioConfig& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical(s)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace uavec::config
