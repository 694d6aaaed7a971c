#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "eclab/classifier.hpp"
#include "eclab/covariance.hpp"
#include "eclab/hypothesis.hpp"
#include "eclab/nlms.hpp"
#include "eclab/scenario.hpp"

namespace eclab {

/// Guard-band handling for transitions within {H0,H1} or {H2,H3} when the
/// window norms are close:
///   hysteresis - suppress the flip while the ratio sits inside the band
///                (keep the previous member of the pair);
///   literal    - allow the flip only while the ratio sits inside the band.
enum class GuardMode { hysteresis, literal };

struct ControlConfig {
  std::array<double, 4> mu{0.1, 1.0, 0.1, 0.3};  // per decided class
  int test_interval = 1024;                      // N_t
  int copy_delay = 512;                          // N_c < N_t
  double guard_epsilon = 0.25;
  GuardMode guard_mode = GuardMode::hysteresis;
  int window = 32;                               // p
  std::optional<double> threshold_override;      // fixes T_p directly
  double tie_epsilon = 0.0;
  Hypothesis initial_class = Hypothesis::H1;     // cold start counts as a CC
  double regularization_scale = 1e-8;            // delta = scale * N * input power

  void validate() const {
    for (double m : mu)
      if (!(m > 0.0) || !(m < 2.0))
        throw std::invalid_argument("step sizes must lie in (0, 2)");
    if (test_interval < 1) throw std::invalid_argument("test interval must be >= 1");
    if (copy_delay < 1 || copy_delay >= test_interval)
      throw std::invalid_argument("copy delay must satisfy 0 < N_c < N_t");
    if (!(guard_epsilon >= 0.0) || !(guard_epsilon < 1.0))
      throw std::invalid_argument("guard epsilon must lie in [0, 1)");
    if (window < 1 || window > test_interval)
      throw std::invalid_argument("statistic window must satisfy 1 <= p <= N_t");
    if (threshold_override && !(*threshold_override > 0.0))
      throw std::invalid_argument("threshold override must be positive");
    if (tie_epsilon < 0.0) throw std::invalid_argument("tie epsilon must be >= 0");
  }
};

/// Per-sample trace: decided class, step size in force, squared excess errors
/// (linear), and whether a filter copy executed at this sample.
struct TraceRecord {
  std::int64_t n = 0;
  Hypothesis cls = Hypothesis::H1;
  double mu = 0.0;
  double se0 = 0.0;
  double se1 = 0.0;
  bool copied = false;
};

/// Outcome of one test instant.
struct TestDecision {
  std::int64_t n = 0;
  double t0 = 0.0;
  double t1 = 0.0;
  Hypothesis raw = Hypothesis::H0;      // classifier output
  Hypothesis applied = Hypothesis::H0;  // after the guard band
  bool copy_scheduled = false;
};

struct CancelerResult {
  std::vector<TraceRecord> trace;
  std::vector<TestDecision> decisions;
  std::vector<std::int64_t> copy_events;
  bool se_available = false;
};

/// Shadow/main filter pair with the periodic-test control loop. The shadow
/// filter adapts at every sample no matter the decided class; the main filter
/// changes only when the shadow is copied onto it. Tests run every N_t
/// samples on the last p error samples; a copy triggered by an H0/H1 decision
/// with ||z0||^2 < ||z1||^2 executes N_c samples later and re-checks that
/// condition on the windows current at execution time.
class EchoCanceler {
 public:
  EchoCanceler(int taps, const ControlConfig& config, const NoisePowers& noise)
      : config_((config.validate(), config)),
        threshold_(config.threshold_override
                       ? threshold_from_scaled(*config.threshold_override, config.window)
                       : threshold(noise, config.window)),
        shadow_(taps, config.mu[static_cast<std::size_t>(index_of(config.initial_class))],
                1e-20),
        main_(taps, 1.0, 1e-20),
        current_class_(config.initial_class),
        ring_(static_cast<std::size_t>(2 * taps), 0.0),
        ring_pos_(0),
        z0_window_(static_cast<std::size_t>(config.window), 0.0),
        z1_window_(static_cast<std::size_t>(config.window), 0.0) {}

  /// Feeds input samples from before n = 0 (oldest first). Does not advance
  /// the sample clock.
  void preload_input(std::span<const double> history) {
    for (double v : history) push_input(v);
  }

  Hypothesis current_class() const { return current_class_; }
  double current_mu() const {
    return config_.mu[static_cast<std::size_t>(index_of(current_class_))];
  }
  const DecisionThreshold& decision_threshold() const { return threshold_; }
  std::span<const double> shadow_taps() const { return shadow_.coefficients(); }
  std::span<const double> main_taps() const { return main_.coefficients(); }
  std::optional<std::int64_t> pending_copy() const { return pending_copy_; }
  const std::vector<TestDecision>& decisions() const { return decisions_; }
  const std::vector<std::int64_t>& copy_events() const { return copy_events_; }

  void set_filters(std::span<const double> shadow, std::span<const double> main) {
    shadow_.set_coefficients(shadow);
    main_.set_coefficients(main);
  }

  /// Advances one sample and returns the canceled-echo output z1(n).
  /// Squared excess errors are filled only when the channel noise sample is
  /// supplied.
  double process_sample(double x, double y, std::optional<double> n0,
                        TraceRecord& record) {
    push_input(x);
    const auto window = input_window();

    const double pred0 = shadow_.predict(window);
    const double pred1 = main_.predict(window);
    const double z0 = y - pred0;
    const double z1 = y - pred1;

    record.n = n_;
    record.se0 = 0.0;
    record.se1 = 0.0;
    if (n0) {
      const double e0 = z0 - *n0;
      const double e1 = z1 - *n0;
      record.se0 = e0 * e0;
      record.se1 = e1 * e1;
    }

    // Shadow adapts every sample; the regularization tracks the input power.
    power_estimate_ +=
        (x * x - power_estimate_) / static_cast<double>(config_.test_interval);
    const double delta = std::max(
        config_.regularization_scale * static_cast<double>(taps()) * power_estimate_,
        1e-20);
    shadow_.set_regularization(delta);
    shadow_.adapt(window, z0, energy_);

    z_pos_ = (z_pos_ + 1) % static_cast<std::size_t>(config_.window);
    z0_window_[z_pos_] = z0;
    z1_window_[z_pos_] = z1;

    record.copied = false;
    if (pending_copy_ && n_ >= *pending_copy_) {
      const auto stat = window_statistic();
      if (stat.t0 < stat.t1) {
        main_.set_coefficients(shadow_.coefficients());
        copy_events_.push_back(n_);
        record.copied = true;
      }
      pending_copy_.reset();
    }

    if ((n_ + 1) % config_.test_interval == 0) {
      const auto stat = window_statistic();
      const Hypothesis raw = classify(stat, threshold_, config_.tie_epsilon);
      const Hypothesis applied = apply_guard(raw, stat);
      TestDecision decision{n_, stat.t0, stat.t1, raw, applied, false};
      current_class_ = applied;
      shadow_.set_step_size(current_mu());
      if (!has_double_talk(applied) && stat.t0 < stat.t1) {
        pending_copy_ = n_ + config_.copy_delay;
        decision.copy_scheduled = true;
      }
      decisions_.push_back(decision);
    }

    record.cls = current_class_;
    record.mu = current_mu();
    ++n_;
    return z1;
  }

 private:
  int taps() const { return shadow_.taps(); }

  void push_input(double v) {
    const std::size_t n = static_cast<std::size_t>(taps());
    ring_pos_ = (ring_pos_ == 0) ? n - 1 : ring_pos_ - 1;
    const double evicted = ring_[ring_pos_ + n];
    ring_[ring_pos_] = v;
    ring_[ring_pos_ + n] = v;
    energy_ += v * v - evicted * evicted;
    if (++energy_refresh_ >= taps()) {
      energy_ = 0.0;
      for (std::size_t k = ring_pos_; k < ring_pos_ + n; ++k)
        energy_ += ring_[k] * ring_[k];
      energy_refresh_ = 0;
    }
  }

  std::span<const double> input_window() const {
    return std::span<const double>(ring_.data() + ring_pos_,
                                   static_cast<std::size_t>(taps()));
  }

  SufficientStatistic window_statistic() const {
    return compute_statistic(z0_window_, z1_window_);
  }

  Hypothesis apply_guard(Hypothesis raw, const SufficientStatistic& stat) const {
    if (raw == current_class_) return raw;
    if (!same_double_talk_pair(raw, current_class_)) return raw;
    const double ratio = stat.t0 / stat.t1;
    const bool in_band = ratio >= 1.0 - config_.guard_epsilon &&
                         ratio <= 1.0 + config_.guard_epsilon;
    if (config_.guard_mode == GuardMode::hysteresis)
      return in_band ? current_class_ : raw;
    return in_band ? raw : current_class_;
  }

  ControlConfig config_;
  DecisionThreshold threshold_;
  AdaptiveFilter shadow_;
  AdaptiveFilter main_;
  Hypothesis current_class_;
  std::vector<double> ring_;
  std::size_t ring_pos_;
  std::vector<double> z0_window_;
  std::vector<double> z1_window_;
  std::size_t z_pos_ = 0;
  std::optional<std::int64_t> pending_copy_;
  std::vector<TestDecision> decisions_;
  std::vector<std::int64_t> copy_events_;
  double power_estimate_ = 0.0;
  double energy_ = 0.0;
  int energy_refresh_ = 0;
  std::int64_t n_ = 0;
};

/// Full-pass simulation over explicit signal arrays. n0 may be empty, which
/// disables the squared-excess-error columns.
inline CancelerResult run_canceler(std::span<const double> x, std::span<const double> y,
                                   std::span<const double> n0,
                                   std::span<const double> x_prehistory,
                                   const ControlConfig& config, const NoisePowers& noise,
                                   int taps) {
  if (x.size() != y.size()) throw std::invalid_argument("x and y lengths differ");
  if (!n0.empty() && n0.size() != x.size())
    throw std::invalid_argument("n0 length must match the signals");
  EchoCanceler canceler(taps, config, noise);
  canceler.preload_input(x_prehistory);
  CancelerResult result;
  result.se_available = !n0.empty();
  result.trace.resize(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    std::optional<double> noise_sample;
    if (!n0.empty()) noise_sample = n0[n];
    canceler.process_sample(x[n], y[n], noise_sample, result.trace[n]);
  }
  result.decisions = canceler.decisions();
  result.copy_events = canceler.copy_events();
  return result;
}

inline CancelerResult run_canceler(const SignalBundle& bundle, const ControlConfig& config,
                                   const NoisePowers& noise, int taps) {
  return run_canceler(bundle.x, bundle.y, bundle.n0, bundle.x_prehistory, config, noise,
                      taps);
}

/// Trailing moving average with a growing window over the first `window`
/// samples; used to smooth squared errors for dB reporting.
inline std::vector<double> moving_average(std::span<const double> values, int window) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  std::vector<double> out(values.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    acc += values[i];
    if (i >= static_cast<std::size_t>(window)) acc -= values[i - static_cast<std::size_t>(window)];
    const double count = std::min<double>(static_cast<double>(window),
                                          static_cast<double>(i + 1));
    out[i] = acc / count;
  }
  return out;
}

inline double to_db_floored(double value) {
  return 10.0 * std::log10(std::max(value, 1e-12));
}

}  // namespace eclab
