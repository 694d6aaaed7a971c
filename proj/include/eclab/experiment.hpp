#pragma once

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "eclab/config.hpp"
#include "eclab/control.hpp"
#include "eclab/csv.hpp"
#include "eclab/error_probability.hpp"
#include "eclab/scenario.hpp"

namespace eclab {

struct RunOptions {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed_override;
  int jobs = 1;
};

struct RunOutcome {
  std::vector<std::string> files;  // written outputs, manifest last
};

namespace detail {

inline void write_manifest(const ExperimentConfig& cfg, const RunOptions& opt,
                           std::uint64_t seed, bool seeded,
                           const std::vector<std::string>& outputs,
                           const std::string& path) {
  nlohmann::ordered_json manifest;
  manifest["tool"] = "eclab";
#ifdef ECLAB_VERSION_STRING
  manifest["version"] = ECLAB_VERSION_STRING;
#else
  manifest["version"] = "unknown";
#endif
  manifest["kind"] = to_string(cfg.kind);
  manifest["config_file"] = cfg.config_name;
  manifest["config"] = cfg.config_text;
  if (seeded)
    manifest["seed"] = seed;
  else
    manifest["seed"] = nullptr;
  manifest["jobs"] = opt.jobs;
  manifest["outputs"] = outputs;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << manifest.dump(2) << '\n';
}

inline std::vector<Channel> build_channels(const ExperimentConfig& cfg) {
  std::vector<Channel> channels;
  for (int delay : cfg.channel_delays)
    channels.push_back(make_exponential_channel(cfg.channel_gain_db, delay,
                                                cfg.channel_length, cfg.channel_decay));
  return channels;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  CsvWriter csv(path);
  csv.write_row({"cx2", "p", "sigma0_sq", "sigma1_sq", "source", "i", "j", "value",
                 "stderr"});
  for (const SweepRow& row : rows) {
    csv.write_row({format_number(row.cx2), std::to_string(row.p),
                   format_number(row.sigma0_sq), format_number(row.sigma1_sq),
                   row.source, std::to_string(row.i), std::to_string(row.j),
                   format_number(row.value),
                   row.standard_error ? format_number(*row.standard_error) : ""});
  }
  csv.close();
}

inline void run_curves(const ExperimentConfig& cfg, const RunOptions& opt,
                       std::uint64_t seed, RunOutcome& outcome) {
  SweepOptions sweep;
  sweep.with_theory = true;
  sweep.with_mc = cfg.kind == ExperimentKind::mc_curves;
  sweep.mc_mode = cfg.mc_mode;
  sweep.mc_runs = cfg.mc_runs;
  sweep.seed = seed;
  sweep.jobs = opt.jobs;
  sweep.quad.abs_tol = cfg.quad_tol;
  sweep.rho = cfg.rho;
  if (sweep.with_mc && cfg.mc_mode == McMode::correlated) {
    const auto channels = build_channels(cfg);
    if (channels.size() < 2)
      throw ConfigError("correlated MC needs two channel delays");
    sweep.channels = std::make_pair(channels[0], channels[1]);
  }
  const auto rows = curve_sweep(cfg.noise, cfg.cx2_grid, cfg.p_list, sweep);
  const std::string path = opt.out_dir + "/curves.csv";
  write_sweep_csv(rows, path);
  outcome.files.push_back(path);
}

inline void write_trace_csv(const CancelerResult& result, const std::string& path) {
  // Squared errors are smoothed with a 1024-sample moving average and floored
  // at 1e-12 before the dB conversion.
  std::vector<double> se0(result.trace.size()), se1(result.trace.size());
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    se0[i] = result.trace[i].se0;
    se1[i] = result.trace[i].se1;
  }
  const auto ma0 = moving_average(se0, 1024);
  const auto ma1 = moving_average(se1, 1024);
  CsvWriter csv(path);
  csv.write_row({"n", "class", "mu", "se0_db", "se1_db", "copied"});
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    const TraceRecord& r = result.trace[i];
    csv.write_row({std::to_string(r.n), std::to_string(index_of(r.cls)),
                   format_number(r.mu),
                   result.se_available ? format_number(to_db_floored(ma0[i])) : "",
                   result.se_available ? format_number(to_db_floored(ma1[i])) : "",
                   r.copied ? "1" : "0"});
  }
  csv.close();
}

inline void write_signals_csv(const SignalBundle& bundle, const std::string& path) {
  CsvWriter csv(path);
  csv.write_row({"n", "x", "y", "n0", "true_class"});
  for (std::size_t n = 0; n < bundle.x.size(); ++n)
    csv.write_row({std::to_string(n), format_number(bundle.x[n]),
                   format_number(bundle.y[n]), format_number(bundle.n0[n]),
                   std::to_string(static_cast<int>(bundle.truth.true_class[n]))});
  csv.close();
}

inline ScenarioConfig scenario_from(const ExperimentConfig& cfg) {
  ScenarioConfig scenario;
  scenario.input_variance = cfg.input_variance;
  scenario.rho = cfg.rho;
  scenario.noise = cfg.noise;
  scenario.channels = build_channels(cfg);
  for (std::size_t s = 0; s < cfg.segment_ends.size(); ++s)
    scenario.segments.push_back(ScenarioSegment{cfg.segment_ends[s],
                                                cfg.segment_channels[s],
                                                cfg.segment_dt[s] != 0});
  return scenario;
}

inline void run_simulate(const ExperimentConfig& cfg, const RunOptions& opt,
                         std::uint64_t seed, RunOutcome& outcome) {
  CancelerResult result;
  if (cfg.uses_generated_scenario()) {
    const ScenarioConfig scenario = scenario_from(cfg);
    const SignalBundle bundle = generate_scenario(scenario, seed);
    result = run_canceler(bundle, cfg.control, cfg.noise, cfg.channel_length);
    if (cfg.write_signals) {
      const std::string signals_path = opt.out_dir + "/signals.csv";
      write_signals_csv(bundle, signals_path);
      outcome.files.push_back(signals_path);
    }
  } else {
    std::vector<double> x, y, n0;
    if (!cfg.signals_csv.empty()) {
      const CsvTable table = read_csv(cfg.signals_csv);
      const int xc = table.column("x"), yc = table.column("y"), nc = table.column("n0");
      if (xc < 0 || yc < 0)
        throw ConfigError(cfg.signals_csv + ": needs 'x' and 'y' columns");
      for (const auto& row : table.rows) {
        x.push_back(row.at(static_cast<std::size_t>(xc)));
        y.push_back(row.at(static_cast<std::size_t>(yc)));
        if (nc >= 0) n0.push_back(row.at(static_cast<std::size_t>(nc)));
      }
    } else {
      x = read_pcm16(cfg.x_pcm);
      y = read_pcm16(cfg.y_pcm);
      if (x.size() != y.size())
        throw ConfigError("PCM inputs must have the same length");
    }
    result = run_canceler(x, y, n0, {}, cfg.control, cfg.noise, cfg.channel_length);
  }
  const std::string path = opt.out_dir + "/trace.csv";
  write_trace_csv(result, path);
  outcome.files.push_back(path);
}

inline void run_classify(const ExperimentConfig& cfg, const RunOptions& opt,
                         RunOutcome& outcome) {
  const CsvTable table = read_csv(cfg.classify_input);
  const int t0c = table.column("t0"), t1c = table.column("t1");
  if (t0c < 0 || t1c < 0)
    throw ConfigError(cfg.classify_input + ": needs 't0' and 't1' columns");
  const auto thr = cfg.control.threshold_override
                       ? threshold_from_scaled(*cfg.control.threshold_override,
                                               cfg.classify_p)
                       : threshold(cfg.noise, cfg.classify_p);
  const std::string path = opt.out_dir + "/classes.csv";
  CsvWriter csv(path);
  csv.write_row({"n", "t0", "t1", "class"});
  for (std::size_t n = 0; n < table.rows.size(); ++n) {
    SufficientStatistic stat;
    stat.t0 = table.rows[n].at(static_cast<std::size_t>(t0c));
    stat.t1 = table.rows[n].at(static_cast<std::size_t>(t1c));
    stat.samples = cfg.classify_p;
    const Hypothesis h = classify(stat, thr, cfg.tie_epsilon);
    csv.write_row({std::to_string(n), format_number(stat.t0), format_number(stat.t1),
                   std::to_string(index_of(h))});
  }
  csv.close();
  outcome.files.push_back(path);
}

}  // namespace detail

/// Validates and executes one experiment, writing its CSV outputs and a run
/// manifest (config echo + seed + version) into out_dir. Identical config and
/// seed produce byte-identical CSV outputs regardless of the job count.
inline RunOutcome run(const ExperimentConfig& config, const RunOptions& opt) {
  ExperimentConfig cfg = config;
  if (opt.seed_override) cfg.seed = opt.seed_override;

  const auto diagnostics = validate(cfg);
  if (!diagnostics.empty()) {
    std::string message = "invalid configuration:";
    for (const auto& d : diagnostics) message += "\n  " + d.field + ": " + d.message;
    throw ConfigError(message);
  }
  std::filesystem::create_directories(opt.out_dir);

  const bool seeded = cfg.seed.has_value();
  const std::uint64_t seed = cfg.seed.value_or(0);

  RunOutcome outcome;
  switch (cfg.kind) {
    case ExperimentKind::theory_curves:
    case ExperimentKind::mc_curves:
      detail::run_curves(cfg, opt, seed, outcome);
      break;
    case ExperimentKind::simulate:
      detail::run_simulate(cfg, opt, seed, outcome);
      break;
    case ExperimentKind::classify_stream:
      detail::run_classify(cfg, opt, outcome);
      break;
  }
  const std::string manifest_path = opt.out_dir + "/manifest.json";
  detail::write_manifest(cfg, opt, seed, seeded, outcome.files, manifest_path);
  outcome.files.push_back(manifest_path);
  return outcome;
}

}  // namespace eclab
