#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "eclab/errors.hpp"

namespace eclab {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int segments = 0;
  bool converged = false;
};

namespace detail {

// 15-point Kronrod extension of 7-point Gauss (QUADPACK QK15 constants).
inline constexpr double kGk15Nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kGk15WeightsK[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGk15WeightsG[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b;
  double value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
Segment evaluate_segment(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double fv[15];
  double resk = 0.0, resg = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double dx = half * kGk15Nodes[i];
    const double f1 = f(center - dx);
    const double f2 = (i == 7) ? f1 : f(center + dx);
    if (!std::isfinite(f1) || !std::isfinite(f2))
      throw NumericalError("non-finite integrand value");
    fv[i] = f1;
    if (i != 7) fv[14 - i] = f2;
    const double pair = (i == 7) ? f1 : f1 + f2;
    resk += kGk15WeightsK[i] * pair;
    if (i % 2 == 1) resg += kGk15WeightsG[i / 2] * pair;
  }
  // QUADPACK-style error estimate based on the deviation from the mean.
  const double mean = 0.5 * resk;
  double resasc = kGk15WeightsK[7] * std::abs(fv[7] - mean);
  for (int i = 0; i < 7; ++i)
    resasc += kGk15WeightsK[i] * (std::abs(fv[i] - mean) + std::abs(fv[14 - i] - mean));
  resasc *= half;
  double err = std::abs(resk - resg) * half;
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  return Segment{a, b, resk * half, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over [a, b]. Keeps a
/// worst-segment-first queue and bisects until the summed error estimate
/// drops below abs_tol or the segment budget runs out.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double abs_tol,
                           int max_segments = 2000) {
  QuadratureResult result;
  if (!(b > a)) {
    result.converged = true;
    return result;
  }
  if (!(abs_tol > 0.0)) throw std::invalid_argument("abs_tol must be positive");

  std::priority_queue<detail::Segment> queue;
  // A few initial panels: peaked integrands are easy to miss with one panel.
  constexpr int kInitial = 8;
  double total_value = 0.0, total_error = 0.0;
  for (int i = 0; i < kInitial; ++i) {
    const double sa = a + (b - a) * static_cast<double>(i) / kInitial;
    const double sb = a + (b - a) * static_cast<double>(i + 1) / kInitial;
    auto seg = detail::evaluate_segment(f, sa, sb);
    total_value += seg.value;
    total_error += seg.error;
    queue.push(seg);
  }
  int segments = kInitial;
  while (total_error > abs_tol && segments < max_segments) {
    const detail::Segment worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // Interval at machine resolution; keep its contribution as is.
      total_error -= worst.error;
      continue;
    }
    auto left = detail::evaluate_segment(f, worst.a, mid);
    auto right = detail::evaluate_segment(f, mid, worst.b);
    total_value += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++segments;
  }
  result.value = total_value;
  result.error = total_error;
  result.segments = segments;
  result.converged = total_error <= abs_tol;
  return result;
}

/// Integration with an optional t = u^2 change of variable, which removes
/// integrable t^(q-1) endpoint singularities at t = 0 and concentrates nodes
/// near the lower endpoint.
template <class F>
QuadratureResult integrate_mapped(F&& f, double a, double b, bool sqrt_map,
                                  double abs_tol, int max_segments = 2000) {
  if (!sqrt_map) return integrate(f, a, b, abs_tol, max_segments);
  if (a < 0.0) throw std::invalid_argument("sqrt map requires a >= 0");
  auto mapped = [&f](double u) { return 2.0 * u * f(u * u); };
  return integrate(mapped, std::sqrt(a), std::sqrt(std::max(a, b)), abs_tol,
                   max_segments);
}

struct Axis {
  double lower = 0.0;
  double upper = 1.0;
  bool sqrt_map = false;
};

/// Iterated 2-D integration: value = int_outer int_inner f(outer, inner).
/// The inner tolerance is budgeted so that pointwise inner errors cannot
/// push the total past abs_tol.
template <class F2>
QuadratureResult integrate_2d(F2&& f, const Axis& outer, const Axis& inner,
                              double abs_tol, int max_segments = 2000) {
  if (!(outer.upper > outer.lower)) return QuadratureResult{0.0, 0.0, 0, true};
  const double outer_len = outer.upper - outer.lower;
  const double inner_tol = std::max(0.5 * abs_tol / outer_len, 1e-300);
  bool inner_ok = true;
  auto g = [&](double t_outer) {
    auto slice = [&](double t_inner) { return f(t_outer, t_inner); };
    auto r = integrate_mapped(slice, inner.lower, inner.upper, inner.sqrt_map,
                              inner_tol, max_segments);
    if (!r.converged && r.error > 4.0 * inner_tol) inner_ok = false;
    return r.value;
  };
  auto result =
      integrate_mapped(g, outer.lower, outer.upper, outer.sqrt_map,
                       0.5 * abs_tol, max_segments);
  result.error += 0.5 * abs_tol;  // inner budget
  result.converged = result.converged && inner_ok;
  return result;
}

}  // namespace eclab
