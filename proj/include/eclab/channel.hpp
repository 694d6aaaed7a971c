#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace eclab {

/// Echo-path impulse response. taps[k] = 0 for k < delay, and the tap energy
/// h'h equals the linear gain 10^(gain_db/10).
struct Channel {
  std::vector<double> taps;
  int delay = 0;
  double gain_db = 0.0;

  int length() const { return static_cast<int>(taps.size()); }

  double energy() const {
    return std::inner_product(taps.begin(), taps.end(), taps.begin(), 0.0);
  }
};

/// One-sided exponential channel: taps[k] = c * decay^(k-delay) for
/// k >= delay, zero before. The scale c is solved in closed form so that the
/// tap energy matches the requested gain exactly:
///   c^2 * sum_{j=0}^{length-delay-1} decay^(2j) = 10^(gain_db/10).
inline Channel make_exponential_channel(double gain_db, int delay, int length,
                                        double decay = 0.95) {
  if (length <= 0) throw std::invalid_argument("channel length must be positive");
  if (delay < 0 || delay >= length)
    throw std::invalid_argument("channel delay must satisfy 0 <= delay < length");
  if (!(decay > 0.0) || !(decay < 1.0))
    throw std::invalid_argument("channel decay must lie in (0, 1)");

  const double gain = std::pow(10.0, gain_db / 10.0);
  const int active = length - delay;
  const double r = decay * decay;
  const double geometric_sum = (1.0 - std::pow(r, active)) / (1.0 - r);
  const double c = std::sqrt(gain / geometric_sum);

  Channel ch;
  ch.taps.assign(static_cast<std::size_t>(length), 0.0);
  ch.delay = delay;
  ch.gain_db = gain_db;
  double tap = c;
  for (int k = delay; k < length; ++k) {
    ch.taps[static_cast<std::size_t>(k)] = tap;
    tap *= decay;
  }
  return ch;
}

/// Wraps raw taps as a Channel, deriving delay (leading zero count) and
/// gain_db from the data. Zero vectors are rejected (gain undefined).
inline Channel channel_from_taps(std::vector<double> taps) {
  if (taps.empty()) throw std::invalid_argument("channel taps must be nonempty");
  Channel ch;
  ch.taps = std::move(taps);
  int delay = 0;
  while (delay < ch.length() && ch.taps[static_cast<std::size_t>(delay)] == 0.0)
    ++delay;
  if (delay == ch.length())
    throw std::invalid_argument("all-zero channel has undefined gain");
  ch.delay = delay;
  ch.gain_db = 10.0 * std::log10(ch.energy());
  return ch;
}

}  // namespace eclab
