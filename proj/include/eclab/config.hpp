#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "eclab/control.hpp"
#include "eclab/covariance.hpp"
#include "eclab/error_probability.hpp"
#include "eclab/errors.hpp"
#include "eclab/scenario.hpp"

namespace eclab {

/// Flat key-value configuration with [section] headers, '#'/';' comments and
/// whitespace- or comma-separated list values. Keys are addressed as
/// "section.key".
class KeyValueFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
    mutable bool used = false;
  };

  static KeyValueFile parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
  }

  static KeyValueFile parse_text(const std::string& text, const std::string& name = "<config>") {
    KeyValueFile kv;
    kv.name_ = name;
    std::stringstream ss(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(ss, line)) {
      ++lineno;
      const auto comment = line.find_first_of("#;");
      if (comment != std::string::npos) line.erase(comment);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError(name + ":" + std::to_string(lineno) + ": unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty())
          throw ConfigError(name + ":" + std::to_string(lineno) + ": empty section name");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(name + ":" + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty())
        throw ConfigError(name + ":" + std::to_string(lineno) + ": empty key");
      const std::string full = section.empty() ? key : section + "." + key;
      if (kv.entries_.count(full))
        throw ConfigError(name + ":" + std::to_string(lineno) + ": duplicate key '" + full + "'");
      kv.entries_[full] = Entry{value, lineno, false};
    }
    return kv;
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::optional<std::string> get_string(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    it->second.used = true;
    return it->second.value;
  }

  std::optional<double> get_number(const std::string& key) const {
    auto s = get_string(key);
    if (!s) return std::nullopt;
    try {
      std::size_t used = 0;
      const double v = std::stod(*s, &used);
      if (used != s->size()) throw std::invalid_argument(*s);
      return v;
    } catch (const std::exception&) {
      fail(key, "expected a number, got '" + *s + "'");
    }
  }

  std::optional<std::int64_t> get_integer(const std::string& key) const {
    auto s = get_string(key);
    if (!s) return std::nullopt;
    try {
      std::size_t used = 0;
      const long long v = std::stoll(*s, &used);
      if (used != s->size()) throw std::invalid_argument(*s);
      return v;
    } catch (const std::exception&) {
      fail(key, "expected an integer, got '" + *s + "'");
    }
  }

  std::optional<bool> get_bool(const std::string& key) const {
    auto s = get_string(key);
    if (!s) return std::nullopt;
    if (*s == "true" || *s == "1" || *s == "yes") return true;
    if (*s == "false" || *s == "0" || *s == "no") return false;
    fail(key, "expected true/false, got '" + *s + "'");
  }

  std::optional<std::vector<double>> get_number_list(const std::string& key) const {
    auto s = get_string(key);
    if (!s) return std::nullopt;
    std::vector<double> values;
    std::string item;
    std::stringstream ss(normalize_list(*s));
    while (ss >> item) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        fail(key, "expected a list of numbers, got '" + item + "'");
      }
    }
    return values;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    auto it = entries_.find(key);
    const int line = it == entries_.end() ? 0 : it->second.line;
    throw ConfigError(name_ + ":" + std::to_string(line) + ": " + key + ": " + message);
  }

  /// Keys present in the file but never read; flags typos.
  std::vector<std::string> unused_keys() const {
    std::vector<std::string> keys;
    for (const auto& [key, entry] : entries_)
      if (!entry.used) keys.push_back(key);
    return keys;
  }

  const std::string& name() const { return name_; }

 private:
  static std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
  }

  static std::string normalize_list(const std::string& s) {
    std::string out = s;
    for (char& c : out)
      if (c == ',') c = ' ';
    return out;
  }

  std::string name_;
  std::map<std::string, Entry> entries_;
};

enum class ExperimentKind { theory_curves, mc_curves, simulate, classify_stream };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::theory_curves: return "theory_curves";
    case ExperimentKind::mc_curves: return "mc_curves";
    case ExperimentKind::simulate: return "simulate";
    case ExperimentKind::classify_stream: return "classify_stream";
  }
  return "?";
}

struct Diagnostic {
  std::string field;
  std::string message;
};

/// Everything one experiment run needs. Populated from a config file; the
/// validate() pass reports all invariant violations without executing.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::theory_curves;
  NoisePowers noise{0.001, 1.0};

  // Test channel pair / scenario channel set.
  double channel_gain_db = -10.0;
  int channel_length = 1024;
  double channel_decay = 0.95;
  std::vector<int> channel_delays{0, 10};
  double rho = 0.5;

  // Sweeps.
  std::vector<double> cx2_grid;
  std::vector<int> p_list;
  McMode mc_mode = McMode::iid_pairs;
  std::int64_t mc_runs = 100000;
  std::optional<std::uint64_t> seed;
  double quad_tol = 1e-6;

  // Synthetic scenario.
  double input_variance = 1.0;
  std::vector<std::int64_t> segment_ends{20000, 80000, 100000, 120000, 140000};
  std::vector<int> segment_channels{0, 1, 1, 2, 2};
  std::vector<int> segment_dt{0, 0, 1, 1, 0};
  bool write_signals = false;

  // External signals (simulate): CSV with x,y[,n0] columns or a PCM pair.
  std::string signals_csv;
  std::string x_pcm, y_pcm;
  double pcm_sample_rate = 8000.0;

  ControlConfig control;

  // classify_stream input.
  std::string classify_input;
  int classify_p = 32;
  double tie_epsilon = 0.0;

  std::string config_text;  // verbatim echo for the run manifest
  std::string config_name;

  bool uses_generated_scenario() const {
    return signals_csv.empty() && x_pcm.empty() && y_pcm.empty();
  }

  bool is_stochastic() const {
    return kind == ExperimentKind::mc_curves ||
           (kind == ExperimentKind::simulate && uses_generated_scenario());
  }
};

inline ExperimentKind parse_kind(const std::string& text, const KeyValueFile& kv) {
  if (text == "theory_curves") return ExperimentKind::theory_curves;
  if (text == "mc_curves") return ExperimentKind::mc_curves;
  if (text == "simulate") return ExperimentKind::simulate;
  if (text == "classify_stream") return ExperimentKind::classify_stream;
  kv.fail("experiment.kind", "unknown experiment kind '" + text + "'");
}

inline ExperimentConfig parse_experiment_config(const KeyValueFile& kv,
                                                const std::string& text_echo) {
  ExperimentConfig cfg;
  cfg.config_text = text_echo;
  cfg.config_name = kv.name();

  const auto kind = kv.get_string("experiment.kind");
  if (!kind) throw ConfigError(kv.name() + ": missing required key experiment.kind");
  cfg.kind = parse_kind(*kind, kv);

  if (auto v = kv.get_number("noise.sigma0_sq")) cfg.noise.sigma0_sq = *v;
  if (auto v = kv.get_number("noise.sigma1_sq")) cfg.noise.sigma1_sq = *v;

  if (auto v = kv.get_number("channels.gain_db")) cfg.channel_gain_db = *v;
  if (auto v = kv.get_integer("channels.length")) cfg.channel_length = static_cast<int>(*v);
  if (auto v = kv.get_number("channels.decay")) cfg.channel_decay = *v;
  if (auto v = kv.get_number_list("channels.delays")) {
    cfg.channel_delays.clear();
    for (double d : *v) cfg.channel_delays.push_back(static_cast<int>(d));
  }
  if (auto v = kv.get_number("input.rho")) cfg.rho = *v;
  if (auto v = kv.get_number("input.variance")) cfg.input_variance = *v;

  if (auto v = kv.get_number_list("sweep.cx2_grid")) cfg.cx2_grid = *v;
  if (auto v = kv.get_number_list("sweep.p_list")) {
    cfg.p_list.clear();
    for (double p : *v) cfg.p_list.push_back(static_cast<int>(p));
  }
  if (auto v = kv.get_string("sweep.mc_mode")) {
    if (*v == "iid_pairs")
      cfg.mc_mode = McMode::iid_pairs;
    else if (*v == "correlated")
      cfg.mc_mode = McMode::correlated;
    else
      kv.fail("sweep.mc_mode", "expected iid_pairs or correlated");
  }
  if (auto v = kv.get_integer("sweep.runs")) cfg.mc_runs = *v;
  if (auto v = kv.get_number("sweep.quad_tol")) cfg.quad_tol = *v;
  if (auto v = kv.get_integer("sweep.seed")) cfg.seed = static_cast<std::uint64_t>(*v);
  if (auto v = kv.get_integer("experiment.seed")) cfg.seed = static_cast<std::uint64_t>(*v);

  if (auto v = kv.get_number_list("scenario.segment_ends")) {
    cfg.segment_ends.clear();
    for (double e : *v) cfg.segment_ends.push_back(static_cast<std::int64_t>(e));
  }
  if (auto v = kv.get_number_list("scenario.segment_channels")) {
    cfg.segment_channels.clear();
    for (double c : *v) cfg.segment_channels.push_back(static_cast<int>(c));
  }
  if (auto v = kv.get_number_list("scenario.segment_dt")) {
    cfg.segment_dt.clear();
    for (double d : *v) cfg.segment_dt.push_back(static_cast<int>(d));
  }
  if (auto v = kv.get_number("scenario.input_variance")) cfg.input_variance = *v;
  if (auto v = kv.get_bool("scenario.write_signals")) cfg.write_signals = *v;

  if (auto v = kv.get_string("signals.csv")) cfg.signals_csv = *v;
  if (auto v = kv.get_string("signals.x_pcm")) cfg.x_pcm = *v;
  if (auto v = kv.get_string("signals.y_pcm")) cfg.y_pcm = *v;
  if (auto v = kv.get_number("signals.pcm_sample_rate")) cfg.pcm_sample_rate = *v;

  if (auto v = kv.get_number("control.mu0")) cfg.control.mu[0] = *v;
  if (auto v = kv.get_number("control.mu1")) cfg.control.mu[1] = *v;
  if (auto v = kv.get_number("control.mu2")) cfg.control.mu[2] = *v;
  if (auto v = kv.get_number("control.mu3")) cfg.control.mu[3] = *v;
  if (auto v = kv.get_integer("control.test_interval"))
    cfg.control.test_interval = static_cast<int>(*v);
  if (auto v = kv.get_integer("control.copy_delay"))
    cfg.control.copy_delay = static_cast<int>(*v);
  if (auto v = kv.get_number("control.guard_epsilon")) cfg.control.guard_epsilon = *v;
  if (auto v = kv.get_string("control.guard_mode")) {
    if (*v == "hysteresis")
      cfg.control.guard_mode = GuardMode::hysteresis;
    else if (*v == "literal")
      cfg.control.guard_mode = GuardMode::literal;
    else
      kv.fail("control.guard_mode", "expected hysteresis or literal");
  }
  if (auto v = kv.get_integer("control.window")) cfg.control.window = static_cast<int>(*v);
  if (auto v = kv.get_number("control.threshold_override"))
    cfg.control.threshold_override = *v;
  if (auto v = kv.get_number("control.tie_epsilon")) cfg.control.tie_epsilon = *v;

  if (auto v = kv.get_string("classify.input")) cfg.classify_input = *v;
  if (auto v = kv.get_integer("classify.p")) cfg.classify_p = static_cast<int>(*v);
  if (auto v = kv.get_number("classify.tie_epsilon")) cfg.tie_epsilon = *v;

  const auto unused = kv.unused_keys();
  if (!unused.empty())
    throw ConfigError(kv.name() + ": unknown key '" + unused.front() + "'");
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  return parse_experiment_config(KeyValueFile::parse_text(text, path), text);
}

/// All invariant violations, without executing anything. Empty iff run()
/// would accept the configuration.
inline std::vector<Diagnostic> validate(const ExperimentConfig& cfg) {
  std::vector<Diagnostic> out;
  auto check = [&](bool ok, const std::string& field, const std::string& message) {
    if (!ok) out.push_back(Diagnostic{field, message});
  };

  check(cfg.noise.sigma0_sq > 0.0, "noise.sigma0_sq", "must be > 0");
  check(cfg.noise.sigma1_sq > 0.0 ||
            (cfg.kind == ExperimentKind::simulate && cfg.noise.sigma1_sq == 0.0 &&
             cfg.control.threshold_override.has_value()),
        "noise.sigma1_sq",
        "must be > 0 (or 0 in simulate with an explicit control.threshold_override)");
  check(cfg.rho >= 0.0 && cfg.rho < 1.0, "input.rho", "must lie in [0, 1)");
  check(cfg.channel_decay > 0.0 && cfg.channel_decay < 1.0, "channels.decay",
        "must lie in (0, 1)");
  check(cfg.channel_length >= 1, "channels.length", "must be >= 1");
  for (int d : cfg.channel_delays)
    check(d >= 0 && d < cfg.channel_length, "channels.delays",
          "each delay must satisfy 0 <= delay < length");

  const bool sweep_kind = cfg.kind == ExperimentKind::theory_curves ||
                          cfg.kind == ExperimentKind::mc_curves;
  if (sweep_kind) {
    check(!cfg.cx2_grid.empty(), "sweep.cx2_grid", "must be nonempty");
    check(!cfg.p_list.empty(), "sweep.p_list", "must be nonempty");
    for (double c : cfg.cx2_grid)
      check(c >= 0.0, "sweep.cx2_grid", "c_x^2 values must be >= 0");
    for (int p : cfg.p_list) check(p >= 1, "sweep.p_list", "p values must be >= 1");
    check(cfg.quad_tol > 0.0, "sweep.quad_tol", "must be > 0");
  }
  if (cfg.kind == ExperimentKind::mc_curves) {
    check(cfg.mc_runs >= 1, "sweep.runs", "must be >= 1");
    if (cfg.mc_mode == McMode::correlated)
      check(cfg.channel_delays.size() >= 2, "channels.delays",
            "correlated MC needs the two-channel pair");
  }
  if (cfg.is_stochastic())
    check(cfg.seed.has_value(), "experiment.seed",
          "a seed is mandatory for stochastic experiment kinds");

  if (cfg.kind == ExperimentKind::simulate) {
    // Control-loop invariants: 0 < mu_i < 2, 0 < N_c < N_t, 1 <= p <= N_t.
    for (std::size_t i = 0; i < 4; ++i)
      check(cfg.control.mu[i] > 0.0 && cfg.control.mu[i] < 2.0,
            "control.mu" + std::to_string(i), "NLMS step size must lie in (0, 2)");
    check(cfg.control.test_interval >= 1, "control.test_interval", "must be >= 1");
    check(cfg.control.copy_delay >= 1 &&
              cfg.control.copy_delay < cfg.control.test_interval,
          "control.copy_delay", "the copy delay must satisfy 0 < N_c < N_t");
    check(cfg.control.window >= 1 && cfg.control.window <= cfg.control.test_interval,
          "control.window", "must satisfy 1 <= p <= N_t");
    check(cfg.control.guard_epsilon >= 0.0 && cfg.control.guard_epsilon < 1.0,
          "control.guard_epsilon", "must lie in [0, 1)");
    check(cfg.control.tie_epsilon >= 0.0, "control.tie_epsilon", "must be >= 0");
    if (cfg.control.threshold_override)
      check(*cfg.control.threshold_override > 0.0, "control.threshold_override",
            "must be > 0");
    if (cfg.uses_generated_scenario()) {
      check(cfg.input_variance > 0.0, "scenario.input_variance", "must be > 0");
      check(!cfg.segment_ends.empty(), "scenario.segment_ends", "must be nonempty");
      check(cfg.segment_channels.size() == cfg.segment_ends.size(),
            "scenario.segment_channels", "must list one channel per segment");
      check(cfg.segment_dt.size() == cfg.segment_ends.size(), "scenario.segment_dt",
            "must list one flag per segment");
      std::int64_t prev = 0;
      for (std::int64_t e : cfg.segment_ends) {
        check(e > prev, "scenario.segment_ends", "must be strictly increasing");
        prev = e;
      }
      for (int c : cfg.segment_channels)
        check(c >= 0 && c < static_cast<int>(cfg.channel_delays.size()),
              "scenario.segment_channels", "channel index out of range");
    } else {
      check(cfg.signals_csv.empty() != (cfg.x_pcm.empty() && cfg.y_pcm.empty()),
            "signals", "provide either signals.csv or the x_pcm/y_pcm pair");
      if (!cfg.x_pcm.empty() || !cfg.y_pcm.empty())
        check(!cfg.x_pcm.empty() && !cfg.y_pcm.empty(), "signals",
              "PCM input needs both x_pcm and y_pcm");
    }
  }

  if (cfg.kind == ExperimentKind::classify_stream) {
    check(!cfg.classify_input.empty(), "classify.input", "must name an input CSV");
    check(cfg.classify_p >= 1, "classify.p", "must be >= 1");
    check(cfg.tie_epsilon >= 0.0, "classify.tie_epsilon", "must be >= 0");
  }
  return out;
}

}  // namespace eclab
