#pragma once

#include <stdexcept>
#include <string>

namespace eclab {

/// The four operating states of the canceler:
///   H0 = no double talk, no channel change
///   H1 = no double talk, channel change
///   H2 = double talk, no channel change
///   H3 = double talk, channel change
enum class Hypothesis : int { H0 = 0, H1 = 1, H2 = 2, H3 = 3 };

constexpr int index_of(Hypothesis h) { return static_cast<int>(h); }

constexpr Hypothesis hypothesis_from_index(int i) {
  return static_cast<Hypothesis>(i);
}

constexpr bool has_double_talk(Hypothesis h) {
  return h == Hypothesis::H2 || h == Hypothesis::H3;
}

constexpr bool has_channel_change(Hypothesis h) {
  return h == Hypothesis::H1 || h == Hypothesis::H3;
}

/// H0 <-> H1, H2 <-> H3 (the exchange induced by swapping the two filters).
constexpr Hypothesis swap_pair(Hypothesis h) {
  switch (h) {
    case Hypothesis::H0: return Hypothesis::H1;
    case Hypothesis::H1: return Hypothesis::H0;
    case Hypothesis::H2: return Hypothesis::H3;
    case Hypothesis::H3: return Hypothesis::H2;
  }
  return Hypothesis::H0;
}

/// True when a and b differ only in the channel-change component
/// ({H0,H1} or {H2,H3}); these are the transitions the guard band filters.
constexpr bool same_double_talk_pair(Hypothesis a, Hypothesis b) {
  return has_double_talk(a) == has_double_talk(b);
}

inline const char* to_string(Hypothesis h) {
  switch (h) {
    case Hypothesis::H0: return "H0";
    case Hypothesis::H1: return "H1";
    case Hypothesis::H2: return "H2";
    case Hypothesis::H3: return "H3";
  }
  return "?";
}

}  // namespace eclab
