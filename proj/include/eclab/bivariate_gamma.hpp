#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "eclab/covariance.hpp"
#include "eclab/special_functions.hpp"

namespace eclab {

/// Bivariate gamma law of the sufficient statistic (t0, t1) = window energies.
/// Defined by the Laplace transform
///   L(s1, s2) = (1 + p1 s1 + p2 s2 + p12 s1 s2)^(-q),
/// with shape q = p/2. Marginals are Gamma(q, p1) and Gamma(q, p2); the
/// correlation is 1 - p12/(p1 p2) >= 0.
struct BivariateGammaParams {
  double q = 0.5;
  double p1 = 1.0;
  double p2 = 1.0;
  double p12 = 1.0;

  /// Series coupling constant c = (p1 p2 - p12) / p12^2 >= 0; zero iff the
  /// two coordinates are independent.
  double coupling() const { return (p1 * p2 - p12) / (p12 * p12); }

  void validate() const {
    if (!(q > 0.0)) throw std::invalid_argument("shape q must be positive");
    if (!(p1 > 0.0) || !(p2 > 0.0) || !(p12 > 0.0))
      throw std::invalid_argument("scale parameters must be positive");
    if (p12 > p1 * p2 * (1.0 + 1e-12))
      throw std::invalid_argument("p12 must not exceed p1*p2 (negative correlation)");
  }
};

/// Parameters of the law of (||z0||^2, ||z1||^2) from a stacked-error
/// covariance model: q = p/2 and
///   p1 = 2 S(1,1), p2 = 2 S(2,2), p12 = 4 [S(1,1) S(2,2) - S(1,2)^2]
/// where S is the per-pair 2x2 covariance of [z0(n), z1(n)]. A singular pair
/// covariance (c_x^2 = 0) makes p12 = 0 and the law degenerate; rejected.
inline BivariateGammaParams params_from_covariance(const CovarianceModel& model) {
  const int p = model.samples;
  const double s11 = model.matrix(0, 0);
  const double s22 = model.matrix(p, p);
  const double s12 = model.matrix(0, p);
  BivariateGammaParams params;
  params.q = 0.5 * static_cast<double>(p);
  params.p1 = 2.0 * s11;
  params.p2 = 2.0 * s22;
  params.p12 = 4.0 * (s11 * s22 - s12 * s12);
  if (!(params.p12 > 0.0))
    throw std::invalid_argument("degenerate statistic law: p12 <= 0 (c_x^2 = 0?)");
  params.validate();
  return params;
}

inline BivariateGammaParams params_from_pair_covariance(const Eigen::Matrix2d& pair,
                                                        int samples) {
  CovarianceModel model;
  model.samples = 1;
  model.matrix = pair;
  BivariateGammaParams params = params_from_covariance(model);
  params.q = 0.5 * static_cast<double>(samples);
  return params;
}

/// log density
///   log f(t0,t1) = -(p2 t0 + p1 t1)/p12 + (q-1) log(t0 t1)
///                  - q log p12 - lgamma(q) + log f_q(c t0 t1).
/// On the axes the density is 0 for q > 1, finite for q = 1 and +inf for
/// q < 1 (integrable singularity).
inline double log_density(const BivariateGammaParams& params, double t0, double t1) {
  params.validate();
  if (t0 < 0.0 || t1 < 0.0)
    throw std::invalid_argument("density arguments must be >= 0");
  if (t0 == 0.0 || t1 == 0.0) {
    if (params.q > 1.0) return -std::numeric_limits<double>::infinity();
    if (params.q < 1.0) return std::numeric_limits<double>::infinity();
    return -(params.p2 * t0 + params.p1 * t1) / params.p12 - std::log(params.p12);
  }
  const double c = std::max(params.coupling(), 0.0);
  return -(params.p2 * t0 + params.p1 * t1) / params.p12 +
         (params.q - 1.0) * (std::log(t0) + std::log(t1)) -
         params.q * std::log(params.p12) - std::lgamma(params.q) +
         log_fq_series(params.q, c * t0 * t1);
}

inline double density(const BivariateGammaParams& params, double t0, double t1) {
  return std::exp(log_density(params, t0, t1));
}

}  // namespace eclab
