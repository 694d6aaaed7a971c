#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eclab/ar1.hpp"
#include "eclab/bivariate_gamma.hpp"
#include "eclab/classifier.hpp"
#include "eclab/covariance.hpp"
#include "eclab/parallel.hpp"
#include "eclab/quadrature.hpp"

namespace eclab {

struct QuadOptions {
  double abs_tol = 1e-6;
  int max_segments = 4000;
};

/// P(decide H_i | truth has law `params`), as a wedge/strip integral of the
/// bivariate gamma density over the decision region of H_i:
///   H0: t1 in [0,T),  t0 > t1        H2: t1 in (T,inf), t0 > t1
///   H1: t0 in [0,T),  t1 > t0        H3: t0 in (T,inf), t1 > t0
/// Each region is shifted to a [0,inf) range via t_far = t_near + s and the
/// infinite limits are truncated at the 1 - 1e-10 marginal gamma quantiles.
inline double error_probability(Hypothesis decided, const BivariateGammaParams& params,
                                double scaled_threshold, const QuadOptions& opt = {}) {
  params.validate();
  if (!(scaled_threshold > 0.0))
    throw std::invalid_argument("threshold must be positive");
  const double tp = scaled_threshold;
  const double u0 = gamma_upper_quantile(params.q, params.p1, 1e-10);
  const double u1 = gamma_upper_quantile(params.q, params.p2, 1e-10);
  const bool map_low = params.q < 1.0;  // axis singularity only for q < 1

  Axis outer, inner;
  std::function<double(double, double)> integrand;
  switch (decided) {
    case Hypothesis::H0:
      // int_0^T dt1 int_0^inf ds f(t1 + s, t1); the region has t1 < t0, so
      // t1 is also capped by the t0 marginal horizon.
      outer = Axis{0.0, std::min(tp, std::min(u0, u1)), map_low};
      inner = Axis{0.0, u0, map_low};
      integrand = [&params](double t1, double s) {
        return density(params, t1 + s, t1);
      };
      break;
    case Hypothesis::H2:
      // int_T^inf dt1 int_0^inf ds f(t1 + s, t1), t1 capped as in H0.
      outer = Axis{tp, std::max(tp, std::min(u0, u1)), false};
      inner = Axis{0.0, u0, map_low};
      integrand = [&params](double t1, double s) {
        return density(params, t1 + s, t1);
      };
      break;
    case Hypothesis::H1:
      // int_0^inf ds int_0^T dt0 f(t0, t0 + s); the region has t0 < t1, so
      // t0 is also capped by the t1 marginal horizon.
      outer = Axis{0.0, u1, map_low};
      inner = Axis{0.0, std::min(tp, std::min(u0, u1)), map_low};
      integrand = [&params](double s, double t0) {
        return density(params, t0, t0 + s);
      };
      break;
    case Hypothesis::H3:
      // int_0^inf ds int_T^inf dt0 f(t0, t0 + s), with t0 < t1 capping t0 as
      // in the H1 case.
      outer = Axis{0.0, u1, map_low};
      inner = Axis{tp, std::max(tp, std::min(u0, u1)), false};
      integrand = [&params](double s, double t0) {
        return density(params, t0, t0 + s);
      };
      break;
  }
  if (outer.upper <= outer.lower || inner.upper <= inner.lower) return 0.0;
  auto result = integrate_2d(integrand, outer, inner, opt.abs_tol, opt.max_segments);
  if (result.error > 100.0 * opt.abs_tol)
    throw NumericalError("error-probability quadrature failed to reach tolerance (" +
                         std::to_string(result.error) + ")");
  return std::clamp(result.value, 0.0, 1.0);
}

/// entries(i, j) = P(decide H_i | H_j true). Columns are probability
/// distributions. `degenerate` flags the c_x^2 = 0 sentinel where the
/// statistic law collapses onto the t0 = t1 line and entries are NaN.
struct ConfusionMatrix {
  enum class Source { theory, monte_carlo };
  Eigen::Matrix4d entries = Eigen::Matrix4d::Zero();
  Source source = Source::theory;
  std::optional<Eigen::Matrix4d> standard_errors;
  bool degenerate = false;
};

inline ConfusionMatrix degenerate_confusion(ConfusionMatrix::Source source) {
  ConfusionMatrix m;
  m.source = source;
  m.entries.setConstant(std::numeric_limits<double>::quiet_NaN());
  m.degenerate = true;
  return m;
}

/// Exact confusion matrix from the per-hypothesis bivariate gamma laws and
/// the closed-form threshold.
inline ConfusionMatrix confusion_theory(const NoisePowers& noise, double cx2, int p,
                                        const QuadOptions& opt = {}) {
  noise.validate();
  if (!(cx2 > 0.0)) {
    if (cx2 == 0.0) return degenerate_confusion(ConfusionMatrix::Source::theory);
    throw std::invalid_argument("c_x^2 must be >= 0");
  }
  const double tp = threshold(noise, p).scaled;
  ConfusionMatrix m;
  m.source = ConfusionMatrix::Source::theory;
  for (int j = 0; j < 4; ++j) {
    const auto params = params_from_pair_covariance(
        one_sample_covariance(hypothesis_from_index(j), noise, cx2), p);
    for (int i = 0; i < 4; ++i)
      m.entries(i, j) =
          error_probability(hypothesis_from_index(i), params, tp, opt);
  }
  return m;
}

namespace detail {

inline ConfusionMatrix tally_confusion(
    const std::array<std::array<std::int64_t, 4>, 4>& counts, std::int64_t runs) {
  ConfusionMatrix m;
  m.source = ConfusionMatrix::Source::monte_carlo;
  Eigen::Matrix4d se;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) {
      const double freq = static_cast<double>(counts[static_cast<std::size_t>(j)]
                                                    [static_cast<std::size_t>(i)]) /
                          static_cast<double>(runs);
      m.entries(i, j) = freq;
      se(i, j) = std::sqrt(freq * (1.0 - freq) / static_cast<double>(runs));
    }
  m.standard_errors = se;
  return m;
}

}  // namespace detail

/// Monte Carlo confusion matrix with p independent per-sample pairs drawn
/// from the 2x2 one-sample covariance (the independence regime the theory
/// assumes). Deterministic given the seed.
inline ConfusionMatrix confusion_mc_iid(const NoisePowers& noise, double cx2, int p,
                                        std::int64_t runs, std::uint64_t seed) {
  noise.validate();
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (p < 1) throw std::invalid_argument("p must be >= 1");
  if (cx2 == 0.0) return degenerate_confusion(ConfusionMatrix::Source::monte_carlo);
  const auto thr = threshold(noise, p);
  std::array<std::array<std::int64_t, 4>, 4> counts{};
  for (int j = 0; j < 4; ++j) {
    GaussianSampler sampler(
        one_sample_covariance(hypothesis_from_index(j), noise, cx2));
    Rng rng(Rng::derive(seed, 0x69, j));
    for (std::int64_t r = 0; r < runs; ++r) {
      SufficientStatistic stat;
      stat.samples = p;
      for (int k = 0; k < p; ++k) {
        const Eigen::VectorXd z = sampler.draw(rng);
        stat.t0 += z(0) * z(0);
        stat.t1 += z(1) * z(1);
      }
      const auto decided = classify(stat, thr);
      ++counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(index_of(decided))];
    }
  }
  return detail::tally_confusion(counts, runs);
}

/// Monte Carlo confusion matrix drawing the full stacked error vector from
/// the 2p x 2p covariance with the lag-correlated hx block, i.e. without the
/// independence approximation.
inline ConfusionMatrix confusion_mc_correlated(const NoisePowers& noise,
                                               const Eigen::MatrixXd& hx,
                                               std::int64_t runs, std::uint64_t seed) {
  noise.validate();
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  const int p = static_cast<int>(hx.rows());
  const auto thr = threshold(noise, p);
  std::array<std::array<std::int64_t, 4>, 4> counts{};
  for (int j = 0; j < 4; ++j) {
    const auto model =
        build_covariance(hypothesis_from_index(j), hx, noise, p);
    GaussianSampler sampler(model.matrix);
    Rng rng(Rng::derive(seed, 0xC0, j));
    for (std::int64_t r = 0; r < runs; ++r) {
      const Eigen::VectorXd z = sampler.draw(rng);
      SufficientStatistic stat;
      stat.samples = p;
      stat.t0 = z.head(p).squaredNorm();
      stat.t1 = z.tail(p).squaredNorm();
      const auto decided = classify(stat, thr);
      ++counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(index_of(decided))];
    }
  }
  return detail::tally_confusion(counts, runs);
}

enum class McMode { iid_pairs, correlated };

/// One (c_x^2, p) sweep cell: confusion entry with provenance.
struct SweepRow {
  double cx2 = 0.0;
  int p = 1;
  double sigma0_sq = 0.0;
  double sigma1_sq = 0.0;
  std::string source;  // "theory" or "mc"
  int i = 0;
  int j = 0;
  double value = 0.0;
  std::optional<double> standard_error;
};

struct SweepOptions {
  bool with_theory = true;
  bool with_mc = false;
  McMode mc_mode = McMode::iid_pairs;
  std::int64_t mc_runs = 100000;
  std::uint64_t seed = 0;
  int jobs = 1;
  QuadOptions quad;
  // Channel pair + input correlation; required for correlated MC where the
  // lag structure of the difference-filter output matters.
  std::optional<std::pair<Channel, Channel>> channels;
  double rho = 0.5;
};

/// Confusion entries over a (c_x^2, p) grid; the data behind the performance
/// curve figures. Grid cells are independent and evaluated in parallel;
/// output order and MC sub-seeds are fixed by the grid, not the schedule.
inline std::vector<SweepRow> curve_sweep(const NoisePowers& noise,
                                         const std::vector<double>& cx2_grid,
                                         const std::vector<int>& p_list,
                                         const SweepOptions& opt) {
  noise.validate();
  if (cx2_grid.empty() || p_list.empty())
    throw std::invalid_argument("sweep grids must be nonempty");
  if (opt.with_mc && opt.mc_mode == McMode::correlated && !opt.channels)
    throw std::invalid_argument("correlated MC sweep needs a channel pair");

  struct Cell {
    double cx2;
    int p;
    std::optional<ConfusionMatrix> theory;
    std::optional<ConfusionMatrix> mc;
  };
  std::vector<Cell> cells;
  for (double cx2 : cx2_grid)
    for (int p : p_list) cells.push_back(Cell{cx2, p, {}, {}});

  parallel_for(cells.size(), opt.jobs, [&](std::size_t idx) {
    Cell& cell = cells[idx];
    if (opt.with_theory)
      cell.theory = confusion_theory(noise, cell.cx2, cell.p, opt.quad);
    if (opt.with_mc) {
      const std::uint64_t cell_seed = Rng::derive(opt.seed, 0x5EED, idx);
      if (opt.mc_mode == McMode::iid_pairs) {
        cell.mc = confusion_mc_iid(noise, cell.cx2, cell.p, opt.mc_runs, cell_seed);
      } else {
        const auto& [h0, h1] = *opt.channels;
        if (cell.cx2 == 0.0) {
          cell.mc = degenerate_confusion(ConfusionMatrix::Source::monte_carlo);
        } else {
          const double sx2 = solve_input_variance(cell.cx2, opt.rho, h0, h1);
          const Ar1Input input{sx2, opt.rho, h0.length()};
          const Eigen::MatrixXd hx = build_hx(h0, h1, input, cell.p);
          cell.mc = confusion_mc_correlated(noise, hx, opt.mc_runs, cell_seed);
        }
      }
    }
  });

  std::vector<SweepRow> rows;
  for (const Cell& cell : cells) {
    auto emit = [&](const ConfusionMatrix& m, const char* source) {
      for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) {
          SweepRow row;
          row.cx2 = cell.cx2;
          row.p = cell.p;
          row.sigma0_sq = noise.sigma0_sq;
          row.sigma1_sq = noise.sigma1_sq;
          row.source = source;
          row.i = i;
          row.j = j;
          row.value = m.entries(i, j);
          if (m.standard_errors) row.standard_error = (*m.standard_errors)(i, j);
          rows.push_back(row);
        }
    };
    if (cell.theory) emit(*cell.theory, "theory");
    if (cell.mc) emit(*cell.mc, "mc");
  }
  return rows;
}

}  // namespace eclab
