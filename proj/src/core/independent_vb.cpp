#include "core/independent_vb.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "core/error.hpp"

namespace vbvar {
namespace {

void check_conformable(const IndependentPrior& prior, const DesignData& data) {
  prior.validate();
  if (prior.M() != data.M() || prior.p() != data.p()) {
    throw Error(ErrorCode::kDimensionMismatch, "prior dimensions (M = " + std::to_string(prior.M()) +
                                                   ", p = " + std::to_string(prior.p()) +
                                                   ") do not match the data (M = " + std::to_string(data.M()) +
                                                   ", p = " + std::to_string(data.p()) + ")");
  }
}

double relative_change(const Matrix& next, const Matrix& prev) {
  return (next - prev).cwiseAbs().maxCoeff() / std::max(1.0, prev.cwiseAbs().maxCoeff());
}

struct ElboInputs {
  const Vector& mean;
  const Matrix& cov;
  double log_det_cov;
  const Matrix& scale_q;
  double dof;
};

double elbo_from_parts(const IndependentPrior& prior, const PriorPrecision& pp, const SufficientStats& stats,
                       const DesignData& data, const ElboInputs& in, ElboConstant constant) {
  const double M = static_cast<double>(stats.M);
  const double T = static_cast<double>(stats.T);
  const double p = static_cast<double>(stats.p);
  const int m = static_cast<int>(stats.M);

  const Cholesky sq = linalg::cholesky(in.scale_q, "VB scale");
  const Matrix ee = residual_cross(data, in.mean);
  const Matrix omega = stacked_quadratic(in.cov, stats.XtX, stats.M);
  const Vector diff = in.mean - prior.mean;
  const double quad = diff.dot(pp.precision * diff) + pp.precision.cwiseProduct(in.cov).sum();
  const double fit = -0.5 * in.dof * sq.solve(prior.scale + ee + omega).trace() + 0.5 * in.dof * M;

  const std::array<double, 10> terms = {
      constant == ElboConstant::kFullDimension ? 0.5 * M * p : 0.5 * p,
      -0.5 * M * T * std::log(std::numbers::pi),
      mv_log_gamma(m, 0.5 * in.dof),
      -mv_log_gamma(m, 0.5 * prior.dof),
      0.5 * in.log_det_cov,
      -0.5 * pp.log_det_cov,
      -0.5 * in.dof * linalg::log_det(sq),
      0.5 * prior.dof * linalg::log_det_spd(prior.scale, "prior scale"),
      -0.5 * quad,
      fit,
  };
  return linalg::compensated_sum(terms);
}

}  // namespace

void VbConfig::validate(Index M) const {
  if (max_iters < 1) throw Error(ErrorCode::kInvalidArgument, "max_iters must be at least 1");
  if (!(elbo_rel_tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "ELBO tolerance must be positive");
  if (init_precision) {
    if (init_precision->rows() != M) {
      throw Error(ErrorCode::kDimensionMismatch, "initial precision must be M x M");
    }
    linalg::require_spd(*init_precision, "initial precision");
  }
}

IndependentVbPosterior fit_vb_independent(const IndependentPrior& prior, const DesignData& data,
                                          const VbConfig& cfg) {
  check_conformable(prior, data);
  cfg.validate(data.M());
  const PriorPrecision pp(prior);
  const SufficientStats stats(data);

  IndependentVbPosterior vb;
  vb.dof = static_cast<double>(data.T()) + prior.dof;
  vb.elbo_constant = cfg.elbo_constant;
  Matrix expected_precision =
      cfg.init_precision ? *cfg.init_precision
                         : Matrix(prior.dof * linalg::inverse_spd(prior.scale, "prior scale"));

  for (int it = 1; it <= cfg.max_iters; ++it) {
    const GaussianStep step = coefficient_conditional(pp, stats, expected_precision);
    vb.mean = step.mean;
    vb.cov = linalg::inverse(step.precision_chol);
    vb.scale_q = linalg::symmetrize(prior.scale + residual_cross(data, vb.mean) +
                                    stacked_quadratic(vb.cov, stats.XtX, stats.M));
    expected_precision = vb.dof * linalg::inverse_spd(vb.scale_q, "VB scale");
    vb.iterations = it;

    const double elbo = elbo_from_parts(prior, pp, stats, data,
                                        {vb.mean, vb.cov, -linalg::log_det(step.precision_chol), vb.scale_q, vb.dof},
                                        cfg.elbo_constant);
    vb.elbo_trace.push_back(elbo);
    if (it > 1) {
      const double increase = elbo - vb.elbo_trace[vb.elbo_trace.size() - 2];
      if (increase <= cfg.elbo_rel_tol * std::max(1.0, std::abs(elbo))) {
        vb.converged = true;
        break;
      }
    }
  }
  vb.expected_precision = expected_precision;
  return vb;
}

double elbo_independent(const IndependentPrior& prior, const IndependentVbPosterior& vb, const DesignData& data,
                        ElboConstant constant) {
  check_conformable(prior, data);
  const PriorPrecision pp(prior);
  const SufficientStats stats(data);
  const double log_det_cov = linalg::log_det_spd(vb.cov, "VB coefficient covariance");
  return elbo_from_parts(prior, pp, stats, data, {vb.mean, vb.cov, log_det_cov, vb.scale_q, vb.dof}, constant);
}

WishartDist vb_precision(const IndependentVbPosterior& vb) {
  return WishartDist(linalg::inverse_spd(vb.scale_q, "VB scale"), vb.dof);
}

McEstimate mc_elbo_independent(const IndependentPrior& prior, const IndependentVbPosterior& vb,
                               const DesignData& data, std::size_t n_draws, Rng& rng) {
  check_conformable(prior, data);
  if (n_draws < 1000) throw Error(ErrorCode::kTooFewDraws, "Monte-Carlo ELBO needs at least 1000 draws");
  const IndependentLogJoint log_joint(prior, data);
  const Cholesky cov_chol = linalg::cholesky(vb.cov, "VB coefficient covariance");
  const double n_coef = static_cast<double>(vb.mean.size());
  const double q_beta_const = -0.5 * n_coef * std::log(2.0 * std::numbers::pi) - 0.5 * linalg::log_det(cov_chol);
  const WishartDist q_prec = vb_precision(vb);

  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n_draws; ++i) {
    const Matrix lam = q_prec.sample(rng);
    const Vector z = rng.normal_vector(vb.mean.size());
    const Vector beta = vb.mean + cov_chol.matrixL() * z;
    const double v = log_joint(beta, lam) - (q_beta_const - 0.5 * z.squaredNorm()) - q_prec.log_pdf(lam);
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  const double n = static_cast<double>(n_draws);
  return {mean, std::sqrt(m2 / (n - 1.0) / n), n_draws};
}

IndependentVbPredictive predictive_vb_independent(const IndependentVbPosterior& vb, const RowVector& x_next) {
  const Index M = vb.M();
  if (x_next.size() != vb.p()) throw Error(ErrorCode::kDimensionMismatch, "x_next length must equal p");
  const double m = static_cast<double>(M);
  if (!(vb.dof > m + 1.0)) throw Error(ErrorCode::kUndefinedMoment, "VB predictive variance needs dof > M + 1");
  const Matrix z = z_block(x_next, M);
  const Vector mean = z * vb.mean;
  const Matrix normal_cov = linalg::symmetrize(z * vb.cov * z.transpose());
  MultivariateT noise = normal_wishart_mixture(Vector::Zero(M), vb_precision(vb));
  return {mean, normal_cov + vb.scale_q / (vb.dof - m - 1.0), normal_cov + vb.scale_q / (vb.dof - 2.0),
          NormalTSum(mean, normal_cov, std::move(noise))};
}

ModeResult modes_exact_iterative(const IndependentPrior& prior, const DesignData& data, double tol, int max_iters) {
  check_conformable(prior, data);
  const double k = static_cast<double>(data.T()) + prior.dof - static_cast<double>(data.M()) - 1.0;
  if (!(k > 0.0)) throw Error(ErrorCode::kDomain, "posterior mode needs T + prior dof > M + 1");
  if (!(tol > 0.0) || max_iters < 1) throw Error(ErrorCode::kInvalidArgument, "invalid mode iteration settings");
  const PriorPrecision pp(prior);
  const SufficientStats stats(data);
  const IndependentLogJoint log_post(prior, data);

  ModeResult r;
  r.precision = prior.dof * linalg::inverse_spd(prior.scale, "prior scale");
  r.coefficients = Vector::Zero(prior.mean.size());
  for (int it = 1; it <= max_iters; ++it) {
    const Vector beta = coefficient_conditional(pp, stats, r.precision).mean;
    const Matrix prec = k * linalg::inverse_spd(prior.scale + residual_cross(data, beta), "mode scale");
    const double change = std::max(relative_change(beta, r.coefficients), relative_change(prec, r.precision));
    r.coefficients = beta;
    r.precision = prec;
    r.iterations = it;
    r.log_posterior_trace.push_back(log_post(beta, prec));
    if (it > 1 && change < tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

double vb_mode_lambda(Index M, Index T, double prior_dof) {
  const double k = static_cast<double>(T) + prior_dof - static_cast<double>(M) - 1.0;
  if (!(k > 0.0)) throw Error(ErrorCode::kDomain, "lambda needs T + prior dof > M + 1");
  return 1.0 + static_cast<double>(M + 1) / k;
}

ModeResult modes_vb_iterative(const IndependentPrior& prior, const DesignData& data, double tol, int max_iters) {
  check_conformable(prior, data);
  const double lambda = vb_mode_lambda(data.M(), data.T(), prior.dof);
  const double k = static_cast<double>(data.T()) + prior.dof - static_cast<double>(data.M()) - 1.0;
  if (!(tol > 0.0) || max_iters < 1) throw Error(ErrorCode::kInvalidArgument, "invalid mode iteration settings");
  const PriorPrecision pp(prior);
  const SufficientStats stats(data);

  ModeResult r;
  r.precision = prior.dof * linalg::inverse_spd(prior.scale, "prior scale");
  r.coefficients = Vector::Zero(prior.mean.size());
  for (int it = 1; it <= max_iters; ++it) {
    const GaussianStep step = coefficient_conditional(pp, stats, lambda * r.precision);
    const Matrix cov = linalg::inverse(step.precision_chol);
    const Matrix prec = k * linalg::inverse_spd(prior.scale + residual_cross(data, step.mean) +
                                                    stacked_quadratic(cov, stats.XtX, stats.M),
                                                "VB mode scale");
    const double change =
        std::max(relative_change(step.mean, r.coefficients), relative_change(prec, r.precision));
    r.coefficients = step.mean;
    r.precision = prec;
    r.iterations = it;
    if (it > 1 && change < tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

}  // namespace vbvar
