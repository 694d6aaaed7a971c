#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <vector>

namespace eclab {

/// Normalized LMS filter. The update is
///   h += mu * error * x / (x'x + delta),
/// stable for mu in (0, 2); the regularization delta guards zero-energy
/// input windows.
class AdaptiveFilter {
 public:
  AdaptiveFilter(int taps, double step_size, double regularization)
      : coefficients_(static_cast<std::size_t>(taps), 0.0),
        step_size_(step_size),
        regularization_(regularization) {
    if (taps < 1) throw std::invalid_argument("filter must have at least one tap");
    set_step_size(step_size);
    if (!(regularization > 0.0))
      throw std::invalid_argument("regularization must be positive");
  }

  int taps() const { return static_cast<int>(coefficients_.size()); }
  double step_size() const { return step_size_; }
  double regularization() const { return regularization_; }
  std::span<const double> coefficients() const { return coefficients_; }

  void set_step_size(double mu) {
    if (!(mu > 0.0) || !(mu < 2.0))
      throw std::invalid_argument("NLMS step size must lie in (0, 2)");
    step_size_ = mu;
  }

  void set_regularization(double delta) {
    if (!(delta > 0.0))
      throw std::invalid_argument("regularization must be positive");
    regularization_ = delta;
  }

  void set_coefficients(std::span<const double> taps) {
    if (taps.size() != coefficients_.size())
      throw std::invalid_argument("coefficient length mismatch");
    std::copy(taps.begin(), taps.end(), coefficients_.begin());
  }

  /// h' x over the window [x(n), ..., x(n-N+1)].
  double predict(std::span<const double> x_window) const {
    check_window(x_window);
    double acc = 0.0;
    const double* h = coefficients_.data();
    const double* x = x_window.data();
    for (std::size_t k = 0; k < coefficients_.size(); ++k) acc += h[k] * x[k];
    return acc;
  }

  /// In-place NLMS step with the window energy precomputed by the caller.
  void adapt(std::span<const double> x_window, double error, double window_energy) {
    check_window(x_window);
    const double gain = step_size_ * error / (window_energy + regularization_);
    double* h = coefficients_.data();
    const double* x = x_window.data();
    for (std::size_t k = 0; k < coefficients_.size(); ++k) h[k] += gain * x[k];
  }

  void adapt(std::span<const double> x_window, double error) {
    double energy = 0.0;
    for (double v : x_window) energy += v * v;
    adapt(x_window, error, energy);
  }

 private:
  void check_window(std::span<const double> x_window) const {
    if (x_window.size() != coefficients_.size())
      throw std::invalid_argument("window length must equal the filter length");
  }

  std::vector<double> coefficients_;
  double step_size_;
  double regularization_;
};

/// Pure NLMS step: returns the updated filter, leaving the input untouched.
inline AdaptiveFilter nlms_step(const AdaptiveFilter& filter,
                                std::span<const double> x_window, double error) {
  AdaptiveFilter updated = filter;
  updated.adapt(x_window, error);
  return updated;
}

}  // namespace eclab
