#pragma once

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>

#include "eclab/errors.hpp"

namespace eclab {

/// log of f_q(z) = sum_{k>=0} z^k / (k! Gamma(q+k)), z >= 0.
///
/// Identically z^(-(q-1)/2) I_{q-1}(2 sqrt z). Two regimes:
///   - direct series with a streaming running-maximum rescale, so that the
///     e^(2 sqrt z) growth never leaves the log domain; term recurrence
///     t_{k+1}/t_k = z/((k+1)(q+k)), stop once a post-peak term drops below
///     1e-18 of the running sum (the peak sits near k ~ sqrt z);
///   - for 2 sqrt z well past (q-1)^2, the standard large-argument
///     asymptotic of I_nu, where the series would need ~sqrt z terms.
inline double log_fq_series(double q, double z) {
  if (!(q > 0.0)) throw std::invalid_argument("shape q must be positive");
  if (z < 0.0) throw std::invalid_argument("series argument must be >= 0");
  const double lgq = std::lgamma(q);
  if (z == 0.0) return -lgq;

  const double nu = q - 1.0;
  const double x = 2.0 * std::sqrt(z);
  if (x >= 40.0 * (nu * nu + 1.0)) {
    // I_nu(x) ~ e^x / sqrt(2 pi x) * sum_k (-1)^k a_k(nu) / x^k
    const double mu = 4.0 * nu * nu;
    double s = 1.0, term = 1.0;
    for (int k = 1; k <= 30; ++k) {
      const double odd = 2.0 * k - 1.0;
      term *= -(mu - odd * odd) / (8.0 * x * static_cast<double>(k));
      s += term;
      if (std::abs(term) < 1e-17 * std::abs(s)) break;
    }
    const double log_bessel =
        x - 0.5 * std::log(2.0 * 3.141592653589793238462643383279502884 * x) +
        std::log(s);
    return log_bessel - 0.5 * nu * std::log(z);
  }

  constexpr int kMaxTerms = 200000;
  const double log_z = std::log(z);
  const double peak = std::sqrt(z);
  double log_term = -lgq;  // k = 0
  double max_log = log_term;
  double sum = 1.0;  // value = exp(max_log) * sum
  for (int k = 1; k <= kMaxTerms; ++k) {
    log_term += log_z - std::log(static_cast<double>(k)) - std::log(q + k - 1.0);
    if (log_term <= max_log) {
      const double w = std::exp(log_term - max_log);
      sum += w;
      if (k > peak && w < 1e-18 * sum) return max_log + std::log(sum);
    } else {
      sum = sum * std::exp(max_log - log_term) + 1.0;
      max_log = log_term;
    }
  }
  throw NumericalError("f_q series failed to converge");
}

/// Regularized lower incomplete gamma CDF of Gamma(shape, scale) at x.
inline double gamma_cdf(double shape, double scale, double x) {
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(shape, x / scale);
}

/// Quantile x with upper tail probability `tail`: P(X > x) = tail for
/// X ~ Gamma(shape, scale).
inline double gamma_upper_quantile(double shape, double scale, double tail) {
  return scale * boost::math::gamma_q_inv(shape, tail);
}

}  // namespace eclab
