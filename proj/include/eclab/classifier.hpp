#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <span>
#include <stdexcept>

#include "eclab/covariance.hpp"
#include "eclab/errors.hpp"
#include "eclab/hypothesis.hpp"

namespace eclab {

/// Windowed squared error norms: t_i = sum of the last p samples of z_i^2.
struct SufficientStatistic {
  double t0 = 0.0;
  double t1 = 0.0;
  int samples = 1;  // p
};

struct DecisionThreshold {
  double base = 0.0;    // T
  double scaled = 0.0;  // T_p = p * T
  int samples = 1;
};

/// Closed-form decision threshold
///   T = v0 (v0 + v1) / v1 * ln(1 + v1 / v0),
/// scaled by the window length. log1p keeps the small-v1 limit (T -> v0)
/// accurate.
inline DecisionThreshold threshold(const NoisePowers& noise, int samples) {
  noise.validate();
  if (samples < 1) throw std::invalid_argument("sample count must be >= 1");
  const double v0 = noise.sigma0_sq;
  const double v1 = noise.sigma1_sq;
  const double base = v0 * (v0 + v1) / v1 * std::log1p(v1 / v0);
  return DecisionThreshold{base, static_cast<double>(samples) * base, samples};
}

/// Threshold fixed directly at the window level (empirical T_p), bypassing
/// the closed form.
inline DecisionThreshold threshold_from_scaled(double scaled, int samples) {
  if (!(scaled > 0.0)) throw std::invalid_argument("threshold must be positive");
  if (samples < 1) throw std::invalid_argument("sample count must be >= 1");
  return DecisionThreshold{scaled / static_cast<double>(samples), scaled, samples};
}

inline SufficientStatistic compute_statistic(std::span<const double> z0_window,
                                             std::span<const double> z1_window) {
  if (z0_window.empty() || z1_window.size() != z0_window.size())
    throw std::invalid_argument("windows must be nonempty and of equal length");
  SufficientStatistic stat;
  stat.samples = static_cast<int>(z0_window.size());
  for (double v : z0_window) stat.t0 += v * v;
  for (double v : z1_window) stat.t1 += v * v;
  return stat;
}

/// Minimum-error four-way rule on (t0, t1):
///   H0 if t1 < t0 and t1 < T_p      H2 if t1 < t0 and t1 > T_p
///   H1 if t1 > t0 and t0 < T_p      H3 if t1 > t0 and t0 > T_p
/// Boundaries are resolved toward the calmer action: a norm tie (within
/// tie_epsilon relative) goes to the no-change side {H0, H2}, and a norm
/// exactly at T_p goes to the no-double-talk member.
inline Hypothesis classify(const SufficientStatistic& stat,
                           const DecisionThreshold& thr, double tie_epsilon = 0.0) {
  if (stat.samples != thr.samples)
    throw std::invalid_argument("statistic and threshold window lengths differ");
  if (tie_epsilon < 0.0) throw std::invalid_argument("tie_epsilon must be >= 0");
  const double slack = tie_epsilon * std::max(stat.t0, stat.t1);
  const bool change_side = stat.t1 > stat.t0 + slack;
  const double gate = change_side ? stat.t0 : stat.t1;
  const bool double_talk = gate > thr.scaled;
  if (change_side)
    return double_talk ? Hypothesis::H3 : Hypothesis::H1;
  return double_talk ? Hypothesis::H2 : Hypothesis::H0;
}

/// Exact Gaussian log-density argmax over the four hypothesis covariances.
/// Reference oracle for classify(); the two agree whenever hx is nonsingular.
/// Ties in the scores resolve toward the lower hypothesis index.
inline Hypothesis classify_loglik(const Eigen::VectorXd& z,
                                  const std::array<CovarianceModel, 4>& models) {
  const int p = models[0].samples;
  if (z.size() != 2 * p) throw std::invalid_argument("vector dimension must be 2p");
  double best_score = 0.0;
  int best = -1;
  for (int i = 0; i < 4; ++i) {
    if (models[static_cast<std::size_t>(i)].samples != p)
      throw std::invalid_argument("models must share the window length");
    Eigen::MatrixXd sigma = models[static_cast<std::size_t>(i)].matrix;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
    if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any()) {
      sigma.diagonal().array() += 1e-12;
      ldlt.compute(sigma);
      if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any())
        throw NumericalError("singular hypothesis covariance");
    }
    const double quad = z.dot(ldlt.solve(z));
    const double logdet = ldlt.vectorD().array().log().sum();
    const double score = -0.5 * (quad + logdet);
    if (best < 0 || score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return hypothesis_from_index(best);
}

}  // namespace eclab
