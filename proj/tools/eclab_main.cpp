// eclab - experiment front end for the four-state echo-canceler control
// framework: exact and Monte Carlo performance curves, synthetic canceler
// simulation, and batch classification of statistic streams.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>

#include "eclab/eclab.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  int jobs = 0;  // 0 = resolve from ECLAB_JOBS / hardware
  bool validate_only = false;
};

int resolve_jobs(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ECLAB_JOBS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  return eclab::default_jobs();
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config file")->required();
  cmd->add_option("--seed", args.seed, "seed override for stochastic runs");
  cmd->add_option("--out", args.out_dir, "output directory (default: .)");
  cmd->add_option("--jobs", args.jobs, "worker threads (default: ECLAB_JOBS or all cores)");
  cmd->add_flag("--validate-only", args.validate_only,
                "check the config and print diagnostics without running");
}

int execute(const CommonArgs& args, eclab::ExperimentKind kind) {
  auto cfg = eclab::load_experiment_config(args.config_path);
  if (cfg.kind != kind) {
    std::cerr << "error: config kind '" << eclab::to_string(cfg.kind)
              << "' does not match the subcommand\n";
    return kExitConfig;
  }
  if (args.seed) cfg.seed = args.seed;
  if (args.validate_only) {
    const auto diagnostics = eclab::validate(cfg);
    for (const auto& d : diagnostics)
      std::cout << d.field << ": " << d.message << "\n";
    return diagnostics.empty() ? kExitOk : kExitConfig;
  }
  eclab::RunOptions opt;
  opt.out_dir = args.out_dir;
  opt.jobs = resolve_jobs(args.jobs);
  const auto outcome = eclab::run(cfg, opt);
  for (const auto& file : outcome.files) std::cout << file << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"echo-canceler control experiments"};
  app.require_subcommand(1);

  CommonArgs theory_args, mc_args, sim_args, classify_args;
  auto* theory = app.add_subcommand("theory-curves",
                                    "exact confusion-probability curves over a (c_x^2, p) grid");
  add_common(theory, theory_args);
  auto* mc = app.add_subcommand("mc-curves",
                                "Monte Carlo confusion curves (iid-pair or correlated sampling)");
  add_common(mc, mc_args);
  auto* sim = app.add_subcommand("simulate",
                                 "run the shadow-filter canceler on synthetic or supplied signals");
  add_common(sim, sim_args);
  auto* classify = app.add_subcommand("classify",
                                      "classify (t0, t1) statistic pairs streamed from a CSV");
  add_common(classify, classify_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (theory->parsed()) return execute(theory_args, eclab::ExperimentKind::theory_curves);
    if (mc->parsed()) return execute(mc_args, eclab::ExperimentKind::mc_curves);
    if (sim->parsed()) return execute(sim_args, eclab::ExperimentKind::simulate);
    if (classify->parsed())
      return execute(classify_args, eclab::ExperimentKind::classify_stream);
  } catch (const eclab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const eclab::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
