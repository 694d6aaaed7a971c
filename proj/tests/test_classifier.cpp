#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <vector>

#include "eclab/ar1.hpp"
#include "eclab/classifier.hpp"
#include "eclab/covariance.hpp"
#include "eclab/rng.hpp"

using namespace eclab;
using Catch::Approx;

TEST_CASE("threshold closed form") {
  CHECK(threshold(NoisePowers{1.0, 1.0}, 1).base ==
        Approx(1.3862943611198906).epsilon(1e-12));
  const auto t = threshold(NoisePowers{0.001, 1.0}, 1);
  CHECK(t.base == Approx(0.0069156635340945358).epsilon(1e-12));
  const auto t32 = threshold(NoisePowers{0.001, 1.0}, 32);
  CHECK(t32.scaled == Approx(0.22130123309102515).epsilon(1e-12));
  CHECK(t32.scaled == 32.0 * t32.base);

  // vanishing double-talk power: T -> sigma0^2
  CHECK(threshold(NoisePowers{1.0, 1e-12}, 1).base == Approx(1.0).epsilon(1e-6));

  CHECK_THROWS_AS(threshold(NoisePowers{0.0, 1.0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(threshold(NoisePowers{1.0, -1.0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(threshold(NoisePowers{1.0, 1.0}, 0), std::invalid_argument);
}

TEST_CASE("threshold monotonicity") {
  const NoisePowers noise{0.01, 1.0};
  double prev = 0.0;
  for (int p = 1; p <= 64; p *= 2) {
    const double tp = threshold(noise, p).scaled;
    CHECK(tp > prev);
    prev = tp;
  }
  // T = v0 * (1+u) ln(1+u) / u with u = v1/v0 is strictly increasing in u
  // (d/du = (u - ln(1+u))/u^2 > 0), with the u -> 0 limit equal to v0. The
  // threshold grows only logarithmically in the double-talk power while the
  // double-talk energies grow linearly, which is what keeps detection easy.
  double prev_t = threshold(NoisePowers{0.5, 0.5}, 1).base;
  for (double s1 : {0.7, 1.0, 2.0, 5.0, 20.0}) {
    const double t = threshold(NoisePowers{0.5, s1}, 1).base;
    CHECK(t > prev_t);
    CHECK(t < 0.5 * (1.0 + std::log1p(s1 / 0.5)) + 1e-12);  // log growth bound
    prev_t = t;
  }
}

TEST_CASE("compute_statistic") {
  const std::vector<double> a{1.0}, b{2.0};
  const auto s = compute_statistic(a, b);
  CHECK(s.t0 == 1.0);
  CHECK(s.t1 == 4.0);
  CHECK(s.samples == 1);

  const std::vector<double> c{3.0, 4.0}, d{0.0, 0.0};
  const auto s2 = compute_statistic(c, d);
  CHECK(s2.t0 == 25.0);
  CHECK(s2.t1 == 0.0);

  const std::vector<double> e{4.0, 3.0}, f{0.0, 0.0};
  CHECK(compute_statistic(e, f).t0 == s2.t0);  // reorder invariant

  CHECK_THROWS_AS(compute_statistic(std::vector<double>{}, std::vector<double>{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(compute_statistic(a, c), std::invalid_argument);
}

namespace {

SufficientStatistic stat_of(double t0, double t1, int p = 1) {
  SufficientStatistic s;
  s.t0 = t0;
  s.t1 = t1;
  s.samples = p;
  return s;
}

}  // namespace

TEST_CASE("classify quadrants") {
  const auto thr = threshold(NoisePowers{1.0, 1.0}, 1);  // T ~ 1.386
  CHECK(classify(stat_of(2.0, 0.5), thr) == Hypothesis::H0);
  CHECK(classify(stat_of(0.5, 2.0), thr) == Hypothesis::H1);
  CHECK(classify(stat_of(3.0, 2.0), thr) == Hypothesis::H2);
  CHECK(classify(stat_of(2.0, 3.0), thr) == Hypothesis::H3);

  SECTION("boundary ties resolve to the calm side") {
    const double tp = thr.scaled;
    CHECK(classify(stat_of(tp / 2, tp / 2), thr) == Hypothesis::H0);
    CHECK(classify(stat_of(tp, tp), thr) == Hypothesis::H0);      // both at T_p
    CHECK(classify(stat_of(2 * tp, tp), thr) == Hypothesis::H0);  // t1 == T_p
    CHECK(classify(stat_of(tp, 2 * tp), thr) == Hypothesis::H1);  // t0 == T_p
  }

  SECTION("relative tie band") {
    CHECK(classify(stat_of(1.00, 1.04), thr, 0.05) == Hypothesis::H0);
    CHECK(classify(stat_of(1.00, 1.10), thr, 0.05) == Hypothesis::H1);
  }

  SECTION("mismatched window lengths are rejected") {
    CHECK_THROWS_AS(classify(stat_of(1.0, 2.0, 4), thr), std::invalid_argument);
  }
}

TEST_CASE("classify partitions the quadrant") {
  Rng rng(2024);
  const auto thr = threshold(NoisePowers{0.3, 2.0}, 3);
  for (int i = 0; i < 20000; ++i) {
    const double t0 = 5.0 * rng.uniform();
    const double t1 = 5.0 * rng.uniform();
    if (t0 == t1 || t0 == thr.scaled || t1 == thr.scaled) continue;
    const auto h = classify(stat_of(t0, t1, 3), thr);
    const bool r0 = t1 < t0 && t1 < thr.scaled;
    const bool r1 = t1 > t0 && t0 < thr.scaled;
    const bool r2 = t1 < t0 && t1 > thr.scaled;
    const bool r3 = t1 > t0 && t0 > thr.scaled;
    CHECK(static_cast<int>(r0) + static_cast<int>(r1) + static_cast<int>(r2) +
              static_cast<int>(r3) ==
          1);
    const std::array<bool, 4> regions{r0, r1, r2, r3};
    CHECK(regions[static_cast<std::size_t>(index_of(h))]);
  }
}

TEST_CASE("classify swap and scale symmetries") {
  Rng rng(99);
  for (int i = 0; i < 5000; ++i) {
    const double s0 = 0.01 + rng.uniform();
    const double s1 = 0.01 + 3.0 * rng.uniform();
    const int p = 1 + static_cast<int>(rng.uniform() * 8);
    const auto thr = threshold(NoisePowers{s0, s1}, p);
    const double t0 = 4.0 * p * rng.uniform();
    const double t1 = 4.0 * p * rng.uniform();
    if (t0 == t1 || t0 == thr.scaled || t1 == thr.scaled) continue;

    const auto h = classify(stat_of(t0, t1, p), thr);
    const auto swapped = classify(stat_of(t1, t0, p), thr);
    CHECK(swapped == swap_pair(h));

    const double lambda = 0.25 + 4.0 * rng.uniform();
    const auto thr_scaled = threshold(NoisePowers{lambda * s0, lambda * s1}, p);
    const auto h_scaled = classify(stat_of(lambda * t0, lambda * t1, p), thr_scaled);
    CHECK(h_scaled == h);
  }
}

namespace {

std::array<CovarianceModel, 4> models_for(const NoisePowers& noise,
                                          const Eigen::MatrixXd& hx, int p) {
  return {build_covariance(Hypothesis::H0, hx, noise, p),
          build_covariance(Hypothesis::H1, hx, noise, p),
          build_covariance(Hypothesis::H2, hx, noise, p),
          build_covariance(Hypothesis::H3, hx, noise, p)};
}

Eigen::MatrixXd toeplitz_hx(double cx2, double rho_h, int p) {
  Eigen::MatrixXd hx(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) hx(i, j) = cx2 * std::pow(rho_h, std::abs(i - j));
  return hx;
}

}  // namespace

TEST_CASE("classify agrees with the exact log-likelihood argmax") {
  Rng rng(31337);
  for (int setting = 0; setting < 12; ++setting) {
    const double s0 = std::pow(10.0, -3.0 * rng.uniform());
    const double s1 = std::pow(10.0, 2.0 * rng.uniform() - 1.0);
    const double cx2 = std::pow(10.0, 2.0 * rng.uniform() - 1.0);
    const int p = (setting % 3 == 0) ? 1 : 1 + static_cast<int>(rng.uniform() * 4);
    const NoisePowers noise{s0, s1};
    const auto hx = toeplitz_hx(cx2, 0.9 * rng.uniform(), p);
    const auto models = models_for(noise, hx, p);
    const auto thr = threshold(noise, p);

    std::array<GaussianSampler, 4> samplers{
        GaussianSampler(models[0].matrix), GaussianSampler(models[1].matrix),
        GaussianSampler(models[2].matrix), GaussianSampler(models[3].matrix)};

    for (int i = 0; i < 1000; ++i) {
      const int j = i % 4;
      const Eigen::VectorXd z = samplers[static_cast<std::size_t>(j)].draw(rng);
      SufficientStatistic stat;
      stat.samples = p;
      stat.t0 = z.head(p).squaredNorm();
      stat.t1 = z.tail(p).squaredNorm();
      const auto fast = classify(stat, thr);
      const auto oracle = classify_loglik(z, models);
      CHECK(fast == oracle);
    }
  }
}

TEST_CASE("classify_loglik at the origin prefers the smallest determinant") {
  const NoisePowers noise{0.5, 2.0};
  const auto models = models_for(noise, toeplitz_hx(1.5, 0.0, 1), 1);
  // Zero quadratic forms: the score orders by -logdet; H0 and H1 tie at the
  // smaller determinant and the tie resolves to H0.
  CHECK(classify_loglik(Eigen::VectorXd::Zero(2), models) == Hypothesis::H0);
}

TEST_CASE("classify_loglik input checking") {
  const NoisePowers noise{0.5, 2.0};
  const auto models = models_for(noise, toeplitz_hx(1.0, 0.0, 2), 2);
  CHECK_THROWS_AS(classify_loglik(Eigen::VectorXd::Zero(3), models),
                  std::invalid_argument);
}
