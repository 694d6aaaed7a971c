#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>

#include "eclab/errors.hpp"
#include "eclab/hypothesis.hpp"
#include "eclab/rng.hpp"

namespace eclab {

struct NoisePowers {
  double sigma0_sq = 1.0;  // channel noise power
  double sigma1_sq = 1.0;  // double-talk power

  void validate() const {
    if (!(sigma0_sq > 0.0) || !(sigma1_sq > 0.0))
      throw std::invalid_argument("noise powers must be strictly positive");
  }
};

/// Covariance of the stacked error vector [z0(n)..z0(n-p+1), z1(n)..z1(n-p+1)]
/// under one hypothesis. The p x p block hx is the difference-filter output
/// covariance; for p = 1 it holds the scalar c_x^2.
struct CovarianceModel {
  Hypothesis hypothesis = Hypothesis::H0;
  int samples = 1;        // p
  Eigen::MatrixXd matrix; // 2p x 2p
  Eigen::MatrixXd hx;     // p x p
};

/// Per-pair 2x2 covariance of [z0(n), z1(n)]:
///   H0: [[v0+cx2, v0], [v0, v0]]          H1: diagonal blocks swapped
///   H2/H3: v0 replaced by v0+v1 in all white-noise terms.
inline Eigen::Matrix2d one_sample_covariance(Hypothesis h, const NoisePowers& noise,
                                             double cx2) {
  noise.validate();
  if (cx2 < 0.0) throw std::invalid_argument("c_x^2 must be >= 0");
  const double white = has_double_talk(h) ? noise.sigma0_sq + noise.sigma1_sq
                                          : noise.sigma0_sq;
  Eigen::Matrix2d m;
  m << white, white, white, white;
  if (has_channel_change(h))
    m(1, 1) += cx2;
  else
    m(0, 0) += cx2;
  return m;
}

/// Assembles the 2p x 2p block covariance from a p x p hx block. The z0 block
/// comes first. hx must be symmetric positive semidefinite.
inline CovarianceModel build_covariance(Hypothesis h, const Eigen::MatrixXd& hx,
                                        const NoisePowers& noise, int samples) {
  noise.validate();
  if (samples < 1) throw std::invalid_argument("sample count must be >= 1");
  if (hx.rows() != samples || hx.cols() != samples)
    throw std::invalid_argument("hx must be p x p");
  const double asym = (hx - hx.transpose()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, hx.cwiseAbs().maxCoeff());
  if (asym > 1e-12 * scale) throw std::invalid_argument("hx must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hx);
  if (eig.eigenvalues().minCoeff() < -1e-9 * scale)
    throw std::invalid_argument("hx must be positive semidefinite");

  const double white = has_double_talk(h) ? noise.sigma0_sq + noise.sigma1_sq
                                          : noise.sigma0_sq;
  const int p = samples;
  CovarianceModel model;
  model.hypothesis = h;
  model.samples = p;
  model.hx = hx;
  model.matrix = Eigen::MatrixXd::Constant(2 * p, 2 * p, 0.0);
  const Eigen::MatrixXd w = white * Eigen::MatrixXd::Identity(p, p);
  model.matrix.topLeftCorner(p, p) = w;
  model.matrix.topRightCorner(p, p) = w;
  model.matrix.bottomLeftCorner(p, p) = w;
  model.matrix.bottomRightCorner(p, p) = w;
  if (has_channel_change(h))
    model.matrix.bottomRightCorner(p, p) += hx;
  else
    model.matrix.topLeftCorner(p, p) += hx;
  return model;
}

/// Repeated exact sampler for N(0, Sigma). Factorization is done once; a
/// semidefinite Sigma gets one diagonal jitter retry of 1e-12 * trace / dim
/// before failing.
class GaussianSampler {
 public:
  explicit GaussianSampler(const Eigen::MatrixXd& sigma) {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) {
      const double jitter = 1e-12 * sigma.trace() / static_cast<double>(sigma.rows());
      Eigen::MatrixXd adjusted = sigma;
      adjusted.diagonal().array() += jitter;
      llt.compute(adjusted);
      if (llt.info() != Eigen::Success)
        throw NumericalError("covariance factorization failed after jitter");
    }
    factor_ = llt.matrixL();
  }

  int dimension() const { return static_cast<int>(factor_.rows()); }

  Eigen::VectorXd draw(Rng& rng) const {
    Eigen::VectorXd z(factor_.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    return factor_ * z;
  }

 private:
  Eigen::MatrixXd factor_;
};

/// One draw of the stacked error vector from N(0, model.matrix).
/// Deterministic given the seed.
inline Eigen::VectorXd sample_error_vector(const CovarianceModel& model,
                                           std::uint64_t seed) {
  GaussianSampler sampler(model.matrix);
  Rng rng(seed);
  return sampler.draw(rng);
}

}  // namespace eclab
