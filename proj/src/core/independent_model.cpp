#include "core/independent_model.hpp"

#include <cmath>
#include <numbers>

#include "core/error.hpp"
#include "core/mvdist.hpp"

namespace vbvar {

SufficientStats::SufficientStats(const DesignData& data)
    : XtX(data.X.transpose() * data.X),
      XtY(data.X.transpose() * data.Y),
      T(data.T()),
      M(data.M()),
      p(data.p()) {}

Matrix stacked_gram(const Matrix& a, const Matrix& xtx) {
  const Index M = a.rows();
  const Index p = xtx.rows();
  Matrix out(M * p, M * p);
  for (Index j = 0; j < M; ++j) {
    for (Index i = 0; i < M; ++i) out.block(i * p, j * p, p, p) = a(i, j) * xtx;
  }
  return out;
}

Vector stacked_cross(const Matrix& a, const Matrix& xty) {
  return linalg::vec(xty * a);
}

Matrix stacked_quadratic(const Matrix& v, const Matrix& xtx, Index M) {
  const Index p = xtx.rows();
  if (v.rows() != M * p || v.cols() != M * p) {
    throw Error(ErrorCode::kDimensionMismatch, "stacked_quadratic: covariance must be Mp x Mp");
  }
  Matrix out(M, M);
  for (Index j = 0; j < M; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double t = v.block(i * p, j * p, p, p).cwiseProduct(xtx).sum();
      out(i, j) = t;
      out(j, i) = t;
    }
  }
  return out;
}

Matrix residual_cross(const DesignData& data, const Vector& beta) {
  const Matrix e = data.Y - data.X * linalg::unvec(beta, data.p(), data.M());
  return e.transpose() * e;
}

IndependentLogJoint::IndependentLogJoint(const IndependentPrior& prior, const DesignData& data)
    : data_(data),
      prior_mean_(prior.mean),
      prior_chol_(linalg::cholesky(prior.cov, "prior coefficient covariance")),
      prec_prior_(linalg::inverse_spd(prior.scale, "prior scale"), prior.dof) {
  if (prior.M() != data.M() || prior.p() != data.p()) {
    throw Error(ErrorCode::kDimensionMismatch, "independent prior dimensions do not match the data");
  }
  const double n_obs = static_cast<double>(data.M() * data.T());
  const double n_coef = static_cast<double>(prior.mean.size());
  constant_ = -0.5 * (n_obs + n_coef) * std::log(2.0 * std::numbers::pi) - 0.5 * linalg::log_det(prior_chol_);
}

double IndependentLogJoint::operator()(const Vector& beta, const Matrix& precision) const {
  const Cholesky lam = linalg::cholesky(precision, "precision");
  const Matrix ee = residual_cross(data_, beta);
  const Vector z = prior_chol_.matrixL().solve(beta - prior_mean_);
  return constant_ + 0.5 * static_cast<double>(data_.T()) * linalg::log_det(lam) -
         0.5 * precision.cwiseProduct(ee).sum() - 0.5 * z.squaredNorm() + prec_prior_.log_pdf(precision);
}

double log_joint_independent(const IndependentPrior& prior, const DesignData& data, const Vector& beta,
                             const Matrix& precision) {
  return IndependentLogJoint(prior, data)(beta, precision);
}

PriorPrecision::PriorPrecision(const IndependentPrior& prior) {
  const Cholesky chol = linalg::cholesky(prior.cov, "prior coefficient covariance");
  precision = linalg::inverse(chol);
  precision_mean = chol.solve(prior.mean);
  log_det_cov = linalg::log_det(chol);
}

GaussianStep coefficient_conditional(const PriorPrecision& prior, const SufficientStats& stats, const Matrix& a) {
  GaussianStep step;
  step.precision_chol =
      linalg::cholesky(prior.precision + stacked_gram(a, stats.XtX), "coefficient conditional precision");
  step.mean = step.precision_chol.solve(prior.precision_mean + stacked_cross(a, stats.XtY));
  return step;
}

}  // namespace vbvar
