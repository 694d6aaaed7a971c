#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "eclab/channel.hpp"

namespace eclab {

/// Stationary AR-1 input process x(n) = rho*x(n-1) + w(n). The length is the
/// regression-vector dimension N: x(n) = [x(n),...,x(n-N+1)]'. Lagged
/// covariance matrices have entries variance * rho^|i-j-lag|.
struct Ar1Input {
  double variance = 1.0;  // sigma_x^2
  double rho = 0.0;
  int length = 1;

  void validate() const {
    if (!(variance > 0.0)) throw std::invalid_argument("AR-1 variance must be positive");
    if (!(rho >= 0.0) || !(rho < 1.0))
      throw std::invalid_argument("AR-1 rho must lie in [0, 1)");
    if (length < 1) throw std::invalid_argument("AR-1 length must be >= 1");
  }
};

/// E[x(n) x'(n-lag)]; entry (i,j) = variance * rho^|i-j-lag|. lag 0 is the
/// input covariance matrix itself.
inline Eigen::MatrixXd ar1_cross_covariance(const Ar1Input& input, int lag) {
  input.validate();
  const int n = input.length;
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int e = std::abs(i - j - lag);
      m(i, j) = input.variance * (e == 0 ? 1.0 : std::pow(input.rho, e));
    }
  return m;
}

namespace detail {

/// Deterministic autocorrelation s(u) = sum_j d(j) d(j+u) for u = 0..N-1.
inline std::vector<double> tap_autocorrelation(const std::vector<double>& d) {
  const int n = static_cast<int>(d.size());
  std::vector<double> s(static_cast<std::size_t>(n), 0.0);
  for (int u = 0; u < n; ++u) {
    double acc = 0.0;
    for (int j = 0; j + u < n; ++j) acc += d[static_cast<std::size_t>(j)] * d[static_cast<std::size_t>(j + u)];
    s[static_cast<std::size_t>(u)] = acc;
  }
  return s;
}

/// Autocovariance at the given lag of the process d' x(n), where x is AR-1:
/// r(m) = d' R_{m,x} d = variance * sum_u s(|u|) rho^|u-m|. O(N) per lag once
/// s has been computed.
inline double filtered_autocovariance(const std::vector<double>& s, double variance,
                                      double rho, int lag) {
  const int n = static_cast<int>(s.size());
  double acc = 0.0;
  for (int u = -(n - 1); u <= n - 1; ++u) {
    const int e = std::abs(u - lag);
    const double w = (e == 0) ? 1.0 : std::pow(rho, e);
    acc += s[static_cast<std::size_t>(std::abs(u))] * w;
  }
  return variance * acc;
}

inline std::vector<double> tap_difference(const Channel& h0, const Channel& h1) {
  if (h0.length() != h1.length())
    throw std::invalid_argument("channel lengths must match");
  std::vector<double> d(h0.taps.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = h0.taps[k] - h1.taps[k];
  return d;
}

}  // namespace detail

/// Power at the output of the difference filter h0 - h1 driven by the input:
/// c_x^2 = (h0-h1)' Sigma_x (h0-h1).
inline double difference_power(const Channel& h0, const Channel& h1,
                               const Ar1Input& input) {
  input.validate();
  if (h0.length() != static_cast<int>(input.length) || h1.length() != input.length)
    throw std::invalid_argument("channel length must equal the input dimension");
  const auto d = detail::tap_difference(h0, h1);
  const auto s = detail::tap_autocorrelation(d);
  return detail::filtered_autocovariance(s, input.variance, input.rho, 0);
}

/// Solves for the input variance that produces the requested difference-filter
/// output power. Exact by linearity of the quadratic form in sigma_x^2.
inline double solve_input_variance(double target_cx2, double rho,
                                   const Channel& h0, const Channel& h1) {
  if (target_cx2 < 0.0) throw std::invalid_argument("target c_x^2 must be >= 0");
  Ar1Input unit{1.0, rho, h0.length()};
  const double unit_power = difference_power(h0, h1, unit);
  if (unit_power <= 0.0)
    throw std::invalid_argument("identical channels: difference power is zero");
  return target_cx2 / unit_power;
}

/// p x p covariance of the stacked difference-filter outputs
/// [v(n), v(n-1), ..., v(n-p+1)], v(n) = (h0-h1)' x(n). Entry (k,l) is the
/// autocovariance at lag l-k; every diagonal entry equals c_x^2.
inline Eigen::MatrixXd build_hx(const Channel& h0, const Channel& h1,
                                const Ar1Input& input, int samples) {
  input.validate();
  if (samples < 1) throw std::invalid_argument("sample count must be >= 1");
  if (h0.length() != input.length || h1.length() != input.length)
    throw std::invalid_argument("channel length must equal the input dimension");
  const auto d = detail::tap_difference(h0, h1);
  const auto s = detail::tap_autocorrelation(d);
  std::vector<double> r(static_cast<std::size_t>(samples));
  for (int m = 0; m < samples; ++m)
    r[static_cast<std::size_t>(m)] =
        detail::filtered_autocovariance(s, input.variance, input.rho, m);
  Eigen::MatrixXd hx(samples, samples);
  for (int k = 0; k < samples; ++k)
    for (int l = 0; l < samples; ++l) hx(k, l) = r[static_cast<std::size_t>(std::abs(l - k))];
  return hx;
}

}  // namespace eclab
