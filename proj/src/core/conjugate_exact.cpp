#include "core/conjugate_exact.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "core/error.hpp"

namespace vbvar {

void check_conformable(const ConjugatePrior& prior, const DesignData& data) {
  prior.validate();
  if (prior.p() != data.p() || prior.M() != data.M()) {
    throw Error(ErrorCode::kDimensionMismatch, "prior dimensions (M = " + std::to_string(prior.M()) +
                                                   ", p = " + std::to_string(prior.p()) +
                                                   ") do not match the data (M = " + std::to_string(data.M()) +
                                                   ", p = " + std::to_string(data.p()) + ")");
  }
}

ConjugateExactPosterior fit_exact(const ConjugatePrior& prior, const DesignData& data) {
  check_conformable(prior, data);
  const Cholesky prior_chol = linalg::cholesky(prior.row_cov, "prior row covariance");
  const Matrix prior_prec = linalg::inverse(prior_chol);

  const Matrix post_prec = prior_prec + data.X.transpose() * data.X;
  Cholesky post_chol(post_prec);
  if (post_chol.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularSystem, "normal equations V̲⁻¹ + X'X are not positive definite");
  }

  ConjugateExactPosterior post;
  post.row_cov = linalg::inverse(post_chol);
  post.mean = post_chol.solve(prior_prec * prior.mean + data.X.transpose() * data.Y);
  const Matrix resid = data.Y - data.X * post.mean;
  const Matrix shift = post.mean - prior.mean;
  post.scale =
      linalg::symmetrize(resid.transpose() * resid + prior.scale + shift.transpose() * prior_chol.solve(shift));
  post.dof = static_cast<double>(data.T()) + prior.dof;
  return post;
}

MatricT marginal_coefficients(const ConjugateExactPosterior& post) {
  return MatricT(post.mean, post.scale, post.row_cov, post.dof);
}

WishartDist marginal_precision(const ConjugateExactPosterior& post) {
  return WishartDist(linalg::inverse_spd(post.scale, "posterior scale"), post.dof);
}

double log_marginal_likelihood(const ConjugatePrior& prior, const ConjugateExactPosterior& post,
                               const DesignData& data) {
  check_conformable(prior, data);
  const double M = static_cast<double>(data.M());
  const double T = static_cast<double>(data.T());
  const int m = static_cast<int>(data.M());
  const std::array<double, 7> terms = {
      -0.5 * M * T * std::log(std::numbers::pi),
      0.5 * M * linalg::log_det_spd(post.row_cov, "posterior row covariance"),
      -0.5 * M * linalg::log_det_spd(prior.row_cov, "prior row covariance"),
      -0.5 * post.dof * linalg::log_det_spd(post.scale, "posterior scale"),
      0.5 * prior.dof * linalg::log_det_spd(prior.scale, "prior scale"),
      mv_log_gamma(m, 0.5 * post.dof),
      -mv_log_gamma(m, 0.5 * prior.dof),
  };
  return linalg::compensated_sum(terms);
}

JointMode joint_mode(const ConjugateExactPosterior& post, Index p, double prior_dof, Index T) {
  const double factor = static_cast<double>(T + p) + prior_dof - static_cast<double>(post.M()) - 1.0;
  if (!(factor > 0.0)) throw Error(ErrorCode::kDomain, "joint mode needs T + p + prior dof > M + 1");
  return {post.mean, factor * linalg::inverse_spd(post.scale, "posterior scale")};
}

ExactPredictive predictive_exact(const ConjugateExactPosterior& post, const RowVector& x_next) {
  if (x_next.size() != post.p()) throw Error(ErrorCode::kDimensionMismatch, "x_next length must equal p");
  const double M = static_cast<double>(post.M());
  if (!(post.dof > M + 1.0)) {
    throw Error(ErrorCode::kUndefinedMoment, "predictive variance needs posterior dof > M + 1");
  }
  const double c = (x_next * post.row_cov * x_next.transpose())(0, 0);
  const double law_dof = post.dof - M + 1.0;
  const Vector mean = (x_next * post.mean).transpose();
  ExactPredictive out{MultivariateT(mean, (1.0 + c) * post.scale / law_dof, law_dof),
                      (1.0 + c) * post.scale / (post.dof - M - 1.0), (1.0 + c) * post.scale / (post.dof - 2.0), c};
  return out;
}

ConjugatePrior as_prior(const ConjugateExactPosterior& post) {
  return {post.mean, post.row_cov, post.scale, post.dof};
}

double log_joint_conjugate(const ConjugatePrior& prior, const DesignData& data, const Matrix& coefficients,
                           const Matrix& precision) {
  check_conformable(prior, data);
  const Index M = data.M();
  const Index T = data.T();
  const Cholesky lam = linalg::cholesky(precision, "precision");
  const double log_det_lam = linalg::log_det(lam);

  const Matrix resid = data.Y - data.X * coefficients;
  const double loglik = -0.5 * static_cast<double>(M * T) * std::log(2.0 * std::numbers::pi) +
                        0.5 * static_cast<double>(T) * log_det_lam -
                        0.5 * (precision * resid.transpose() * resid).trace();

  const MatricNormal coef_prior(prior.mean, linalg::inverse(lam), prior.row_cov);
  const WishartDist prec_prior(linalg::inverse_spd(prior.scale, "prior scale"), prior.dof);
  return loglik + coef_prior.log_pdf(coefficients) + prec_prior.log_pdf(precision);
}

}  // namespace vbvar
