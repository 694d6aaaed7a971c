#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "eclab/channel.hpp"
#include "eclab/covariance.hpp"
#include "eclab/hypothesis.hpp"
#include "eclab/rng.hpp"

namespace eclab {

/// One segment of the synthetic timeline: samples [previous end, end) use
/// channels[channel] as the true echo path, with double talk if requested.
struct ScenarioSegment {
  std::int64_t end = 0;  // exclusive, 0-indexed
  int channel = 0;
  bool double_talk = false;
};

struct ScenarioConfig {
  double input_variance = 1.0;  // sigma_x^2
  double rho = 0.5;
  NoisePowers noise{0.001, 1.0};
  std::vector<Channel> channels;
  std::vector<ScenarioSegment> segments;

  /// Five-segment synthetic timeline: a channel change at sample 20,000 and
  /// another at 100,000 (0-indexed onsets), double talk on [80,000, 120,000),
  /// 140,000 samples total. Channels are one-sided exponentials at the given
  /// gain with relative delays 0 / 10 / 20.
  static ScenarioConfig default_synthetic(double gain_db = -10.0, int taps = 1024,
                                          double decay = 0.95) {
    ScenarioConfig cfg;
    cfg.channels = {make_exponential_channel(gain_db, 0, taps, decay),
                    make_exponential_channel(gain_db, 10, taps, decay),
                    make_exponential_channel(gain_db, 20, taps, decay)};
    cfg.segments = {{20000, 0, false},
                    {80000, 1, false},
                    {100000, 1, true},
                    {120000, 2, true},
                    {140000, 2, false}};
    return cfg;
  }

  std::int64_t total_samples() const {
    return segments.empty() ? 0 : segments.back().end;
  }

  void validate() const {
    // sigma1_sq = 0 is allowed here: it turns the double-talk flags off.
    if (!(noise.sigma0_sq > 0.0) || noise.sigma1_sq < 0.0)
      throw std::invalid_argument("scenario noise powers must be >= 0 (sigma0 > 0)");
    if (!(input_variance > 0.0))
      throw std::invalid_argument("input variance must be positive");
    if (!(rho >= 0.0) || !(rho < 1.0))
      throw std::invalid_argument("rho must lie in [0, 1)");
    if (channels.empty() || segments.empty())
      throw std::invalid_argument("scenario needs channels and segments");
    const int taps = channels.front().length();
    for (const Channel& ch : channels)
      if (ch.length() != taps)
        throw std::invalid_argument("scenario channels must share one length");
    std::int64_t prev = 0;
    for (const ScenarioSegment& seg : segments) {
      if (seg.end <= prev)
        throw std::invalid_argument("segment boundaries must be increasing");
      if (seg.channel < 0 || seg.channel >= static_cast<int>(channels.size()))
        throw std::invalid_argument("segment references an unknown channel");
      prev = seg.end;
    }
  }
};

/// Ground truth attached to a generated scenario. true_class holds, per
/// sample, the hypothesis index with the double-talk component from the
/// segment flags and the channel-change component set for segments whose
/// channel differs from the previous segment's.
struct TruthTimeline {
  std::vector<std::int64_t> channel_changes;                    // onset samples
  std::vector<std::pair<std::int64_t, std::int64_t>> dt_intervals;  // [start, end)
  std::vector<std::uint8_t> true_class;

  bool double_talk_at(std::int64_t n) const {
    for (const auto& [start, end] : dt_intervals)
      if (n >= start && n < end) return true;
    return false;
  }
};

/// Generated signals. x_prehistory carries the taps-1 input samples before
/// n = 0 so the true channels' outputs can be reproduced exactly from the
/// first sample.
struct SignalBundle {
  std::vector<double> x_prehistory;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> n0;
  TruthTimeline truth;
};

/// Synthesizes the scenario: stationary AR-1 input (x(0) drawn at full
/// variance, so the finite-sample covariance is exact), the segment-wise true
/// channel outputs, ever-present channel noise and double-talk noise on the
/// flagged segments only. Deterministic given the seed.
inline SignalBundle generate_scenario(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const int taps = cfg.channels.front().length();
  const std::int64_t total = cfg.total_samples();
  const std::int64_t pre = taps - 1;

  SignalBundle bundle;
  bundle.x_prehistory.resize(static_cast<std::size_t>(pre));
  bundle.x.resize(static_cast<std::size_t>(total));
  bundle.y.resize(static_cast<std::size_t>(total));
  bundle.n0.resize(static_cast<std::size_t>(total));
  bundle.truth.true_class.resize(static_cast<std::size_t>(total));

  Rng input_rng(Rng::derive(seed, 0x01));
  Rng noise_rng(Rng::derive(seed, 0x02));
  Rng dt_rng(Rng::derive(seed, 0x03));

  // AR-1 path over prehistory + main range.
  const double sigma_x = std::sqrt(cfg.input_variance);
  const double drive = sigma_x * std::sqrt(1.0 - cfg.rho * cfg.rho);
  std::vector<double> extended(static_cast<std::size_t>(pre + total));
  double state = sigma_x * input_rng.normal();
  for (std::int64_t k = 0; k < pre + total; ++k) {
    if (k > 0) state = cfg.rho * state + drive * input_rng.normal();
    extended[static_cast<std::size_t>(k)] = state;
  }
  for (std::int64_t k = 0; k < pre; ++k)
    bundle.x_prehistory[static_cast<std::size_t>(k)] = extended[static_cast<std::size_t>(k)];
  for (std::int64_t n = 0; n < total; ++n)
    bundle.x[static_cast<std::size_t>(n)] = extended[static_cast<std::size_t>(pre + n)];

  const double sigma0 = std::sqrt(cfg.noise.sigma0_sq);
  const double sigma1 = std::sqrt(cfg.noise.sigma1_sq);
  const bool dt_possible = cfg.noise.sigma1_sq > 0.0;

  std::int64_t seg_start = 0;
  int previous_channel = cfg.segments.front().channel;
  for (std::size_t s = 0; s < cfg.segments.size(); ++s) {
    const ScenarioSegment& seg = cfg.segments[s];
    const bool changed = s > 0 && seg.channel != previous_channel;
    if (changed) bundle.truth.channel_changes.push_back(seg_start);
    const bool dt = seg.double_talk && dt_possible;
    if (dt) {
      if (!bundle.truth.dt_intervals.empty() &&
          bundle.truth.dt_intervals.back().second == seg_start)
        bundle.truth.dt_intervals.back().second = seg.end;
      else
        bundle.truth.dt_intervals.emplace_back(seg_start, seg.end);
    }
    const Channel& g = cfg.channels[static_cast<std::size_t>(seg.channel)];
    const int cls = (dt ? 2 : 0) + (changed ? 1 : 0);
    for (std::int64_t n = seg_start; n < seg.end; ++n) {
      double echo = 0.0;
      const double* xs = extended.data() + (pre + n);
      for (int k = g.delay; k < taps; ++k) echo += g.taps[static_cast<std::size_t>(k)] * xs[-k];
      const double noise0 = sigma0 * noise_rng.normal();
      double sample = echo + noise0;
      if (dt) sample += sigma1 * dt_rng.normal();
      bundle.n0[static_cast<std::size_t>(n)] = noise0;
      bundle.y[static_cast<std::size_t>(n)] = sample;
      bundle.truth.true_class[static_cast<std::size_t>(n)] = static_cast<std::uint8_t>(cls);
    }
    previous_channel = seg.channel;
    seg_start = seg.end;
  }
  return bundle;
}

}  // namespace eclab
