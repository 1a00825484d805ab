#include "core/conjugate_vb.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace vbvar {
namespace {

constexpr double kLn2 = std::numbers::ln2;

void require_kl_domain(int M, int p, int T, double prior_dof) {
  if (M < 1 || p < 0 || T < 0) throw Error(ErrorCode::kDomain, "KL needs M >= 1, p >= 0, T >= 0");
  if (!(T + prior_dof > M - 1.0) || !std::isfinite(prior_dof)) {
    throw Error(ErrorCode::kDomain, "KL needs T + prior dof > M - 1");
  }
}

double x_log_x(double x) {
  return x * std::log(x);
}

// ln p(Y, Γ, Σ⁻¹) with the data-dependent pieces precomputed.
class ConjugateLogJoint {
 public:
  ConjugateLogJoint(const ConjugatePrior& prior, const DesignData& data)
      : data_(data),
        prior_mean_(prior.mean),
        prior_chol_(linalg::cholesky(prior.row_cov, "prior row covariance")),
        prec_prior_(linalg::inverse_spd(prior.scale, "prior scale"), prior.dof) {
    const double M = static_cast<double>(data.M());
    const double T = static_cast<double>(data.T());
    const double p = static_cast<double>(data.p());
    constant_ = -0.5 * M * (T + p) * std::log(2.0 * std::numbers::pi) - 0.5 * M * linalg::log_det(prior_chol_);
    ln_det_power_ = 0.5 * (T + p);
  }

  double operator()(const Matrix& coefficients, const Matrix& precision) const {
    const Cholesky lam = linalg::cholesky(precision, "precision draw");
    const Matrix resid = data_.Y - data_.X * coefficients;
    const Matrix shift = coefficients - prior_mean_;
    const Matrix quad = resid.transpose() * resid + shift.transpose() * prior_chol_.solve(shift);
    return constant_ + ln_det_power_ * linalg::log_det(lam) - 0.5 * (precision.cwiseProduct(quad)).sum() +
           prec_prior_.log_pdf(precision);
  }

 private:
  const DesignData& data_;
  Matrix prior_mean_;
  Cholesky prior_chol_;
  WishartDist prec_prior_;
  double constant_ = 0;
  double ln_det_power_ = 0;
};

}  // namespace

ConjugateVbPosterior vb_from_exact(const ConjugateExactPosterior& exact, Index p) {
  ConjugateVbPosterior vb;
  vb.mean = exact.mean;
  vb.row_cov = exact.row_cov;
  vb.dof = exact.dof;
  vb.dof_q = exact.dof + static_cast<double>(p);
  vb.scale_q = (vb.dof_q / vb.dof) * exact.scale;
  vb.expected_precision = vb.dof * linalg::inverse_spd(exact.scale, "posterior scale");
  vb.expected_covariance = exact.scale / vb.dof;
  return vb;
}

ConjugateVbPosterior fit_vb_conjugate(const ConjugatePrior& prior, const DesignData& data) {
  // The coordinate updates have a closed-form fixed point sharing Γ̄, V̄ with the exact posterior.
  return vb_from_exact(fit_exact(prior, data), data.p());
}

MatricNormal vb_coefficients(const ConjugateVbPosterior& vb) {
  return MatricNormal(vb.mean, vb.expected_covariance, vb.row_cov);
}

WishartDist vb_precision(const ConjugateVbPosterior& vb) {
  return WishartDist(linalg::inverse_spd(vb.scale_q, "VB scale"), vb.dof_q);
}

double elbo_conjugate(const ConjugatePrior& prior, const ConjugateVbPosterior& vb, const DesignData& data) {
  check_conformable(prior, data);
  const double M = static_cast<double>(data.M());
  const double T = static_cast<double>(data.T());
  const double p = static_cast<double>(data.p());
  const int m = static_cast<int>(data.M());
  const std::array<double, 10> terms = {
      -0.5 * M * T * std::log(std::numbers::pi),
      0.5 * M * linalg::log_det_spd(vb.row_cov, "posterior row covariance"),
      -0.5 * M * linalg::log_det_spd(prior.row_cov, "prior row covariance"),
      -0.5 * vb.dof * linalg::log_det_spd(vb.exact_scale(), "posterior scale"),
      0.5 * prior.dof * linalg::log_det_spd(prior.scale, "prior scale"),
      0.5 * M * p * (kLn2 + 1.0),
      0.5 * M * x_log_x(vb.dof),
      -0.5 * M * x_log_x(vb.dof_q),
      mv_log_gamma(m, 0.5 * vb.dof_q),
      -mv_log_gamma(m, 0.5 * prior.dof),
  };
  return linalg::compensated_sum(terms);
}

McEstimate mc_elbo_estimate(const ConjugatePrior& prior, const ConjugateVbPosterior& vb, const DesignData& data,
                            std::size_t n_draws, Rng& rng) {
  check_conformable(prior, data);
  if (n_draws < 1000) throw Error(ErrorCode::kTooFewDraws, "Monte-Carlo ELBO needs at least 1000 draws");
  const ConjugateLogJoint log_joint(prior, data);
  const MatricNormal q_coef = vb_coefficients(vb);
  const WishartDist q_prec = vb_precision(vb);

  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n_draws; ++i) {
    const Matrix lam = q_prec.sample(rng);
    const Matrix coef = q_coef.sample(rng);
    const double v = log_joint(coef, lam) - q_coef.log_pdf(coef) - q_prec.log_pdf(lam);
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  const double n = static_cast<double>(n_draws);
  return {mean, std::sqrt(m2 / (n - 1.0) / n), n_draws};
}

double kl_exact(int M, int p, int T, double prior_dof) {
  require_kl_domain(M, p, T, prior_dof);
  const double nu = T + prior_dof;
  const double nu_q = nu + p;
  const std::array<double, 5> terms = {
      -0.5 * M * p * (kLn2 + 1.0),
      0.5 * M * x_log_x(nu_q),
      -0.5 * M * x_log_x(nu),
      -mv_log_gamma(M, 0.5 * nu_q),
      mv_log_gamma(M, 0.5 * nu),
  };
  return linalg::compensated_sum(terms);
}

double kl_stirling(int M, int p, int T, double prior_dof) {
  require_kl_domain(M, p, T, prior_dof);
  const double nu = T + prior_dof;
  const double nu_q = nu + p;
  if (!(nu > M)) throw Error(ErrorCode::kDomain, "Stirling KL needs T + prior dof > M");
  std::vector<double> terms;
  terms.reserve(4 * static_cast<std::size_t>(M));
  for (int j = 1; j <= M; ++j) {
    terms.push_back(0.5 * (nu - j) * std::log(nu - j + 1.0));
    terms.push_back(0.5 * x_log_x(nu_q));
    terms.push_back(-0.5 * (nu_q - j) * std::log(nu_q - j + 1.0));
    terms.push_back(-0.5 * x_log_x(nu));
  }
  return linalg::compensated_sum(terms);
}

VbPredictive predictive_vb_conjugate(const ConjugateVbPosterior& vb, const RowVector& x_next) {
  if (x_next.size() != vb.p()) throw Error(ErrorCode::kDimensionMismatch, "x_next length must equal p");
  const double M = static_cast<double>(vb.M());
  if (!(vb.dof_q > M + 1.0)) throw Error(ErrorCode::kUndefinedMoment, "VB predictive variance needs dof_q > M + 1");
  const double c = (x_next * vb.row_cov * x_next.transpose())(0, 0);
  const Vector mean = (x_next * vb.mean).transpose();
  const Matrix normal_cov = c * vb.expected_covariance;
  MultivariateT noise = normal_wishart_mixture(Vector::Zero(vb.M()), vb_precision(vb));
  const Matrix variance = normal_cov + vb.scale_q / (vb.dof_q - M - 1.0);
  const Matrix table = (vb.dof_q / (vb.dof_q - 2.0) + c) * vb.expected_covariance;
  return {mean, variance, table, c, NormalTSum(mean, normal_cov, std::move(noise))};
}

JointMode vb_modes(const ConjugateVbPosterior& vb) {
  const double shift = vb.dof_q - static_cast<double>(vb.M()) - 1.0;
  if (!(shift > 0.0)) throw Error(ErrorCode::kDomain, "VB precision mode needs dof_q > M + 1");
  return {vb.mean, shift * linalg::inverse_spd(vb.scale_q, "VB scale")};
}

MomentRatios moment_ratios(int M, int p, int T, double prior_dof, double leverage) {
  require_kl_domain(M, p, T, prior_dof);
  if (!(leverage >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "leverage must be non-negative");
  MomentRatios r;
  r.dof = T + prior_dof;
  r.dof_q = r.dof + p;
  r.leverage = leverage;
  const double nu = r.dof;
  const double nu_q = r.dof_q;
  if (!(nu > M + 1.0)) throw Error(ErrorCode::kUndefinedMoment, "ratios need T + prior dof > M + 1");

  // Coefficient variance in units of S̄ ⊗ V̄.
  r.coef_var_vb = 1.0 / nu;
  r.coef_var_exact = 1.0 / (nu - M - 1.0);
  r.coef_var_ratio = r.coef_var_vb / r.coef_var_exact;

  // Var(σ*_ij) in units of (s*_ij² + s*_ii s*_jj), s* from S̄⁻¹.
  r.prec_var_exact = nu;
  r.prec_var_vb = nu * nu / nu_q;
  r.prec_var_ratio_table1 = r.prec_var_vb / r.prec_var_exact;
  r.prec_var_ratio_text = (nu - p - 1.0) / nu;

  // Σ⁻¹ mode in units of S̄⁻¹.
  r.mode_exact = nu + p - M - 1.0;
  r.mode_vb = (nu / nu_q) * (nu + p - M - 1.0);
  r.mode_ratio = r.mode_vb / r.mode_exact;

  // Predictive variance in units of S̄.
  r.pred_var_exact = (1.0 + leverage) / (nu - M - 1.0);
  r.pred_var_vb = leverage / nu + (nu_q / nu) / (nu_q - M - 1.0);
  r.pred_var_ratio = r.pred_var_vb / r.pred_var_exact;
  r.pred_var_exact_table = (1.0 + leverage) / (nu - 2.0);
  r.pred_var_vb_table = (nu_q / (nu_q - 2.0) + leverage) / nu;
  r.pred_var_ratio_table = r.pred_var_vb_table / r.pred_var_exact_table;
  return r;
}

PrecisionVarianceCheck adjudicate_precision_variance(int M, int p, int T, double prior_dof, std::size_t n_draws,
                                                     Rng& rng) {
  require_kl_domain(M, p, T, prior_dof);
  constexpr std::size_t kBatches = 20;
  if (n_draws < 10 * kBatches) throw Error(ErrorCode::kTooFewDraws, "precision-variance check needs >= 200 draws");
  const double nu = T + prior_dof;
  const double nu_q = nu + p;
  const Index m = M;
  // S̄ = I without loss of generality: both laws scale identically.
  const WishartDist exact(Matrix::Identity(m, m), nu);
  const WishartDist vb(Matrix::Identity(m, m) * (nu / nu_q), nu_q);
  Rng rng_exact = rng.child(1);
  Rng rng_vb = rng.child(2);

  const std::size_t per_batch = n_draws / kBatches;
  const std::size_t used = per_batch * kBatches;
  // Welford accumulators per diagonal entry, per batch and overall.
  struct Acc {
    Vector mean, m2;
    std::size_t n = 0;
    explicit Acc(Index k) : mean(Vector::Zero(k)), m2(Vector::Zero(k)) {}
    void add(const Vector& x) {
      ++n;
      const Vector delta = x - mean;
      mean += delta / static_cast<double>(n);
      m2 += delta.cwiseProduct(x - mean);
    }
    double pooled() const { return m2.mean() / static_cast<double>(n - 1); }
  };
  Acc all_exact(m), all_vb(m);
  std::vector<double> batch_ratio;
  for (std::size_t b = 0; b < kBatches; ++b) {
    Acc be(m), bv(m);
    for (std::size_t i = 0; i < per_batch; ++i) {
      const Vector de = exact.sample(rng_exact).diagonal();
      const Vector dv = vb.sample(rng_vb).diagonal();
      be.add(de);
      bv.add(dv);
      all_exact.add(de);
      all_vb.add(dv);
    }
    batch_ratio.push_back(bv.pooled() / be.pooled());
  }
  double bm = 0.0;
  for (double r : batch_ratio) bm += r;
  bm /= static_cast<double>(kBatches);
  double bv = 0.0;
  for (double r : batch_ratio) bv += (r - bm) * (r - bm);
  bv /= static_cast<double>(kBatches - 1);

  PrecisionVarianceCheck out;
  out.M = M;
  out.estimate = all_vb.pooled() / all_exact.pooled();
  out.std_error = std::sqrt(bv / static_cast<double>(kBatches));
  out.draws = used;
  out.table1 = nu / nu_q;
  out.text = (nu - p - 1.0) / nu;
  out.table1_consistent = std::abs(out.estimate - out.table1) <= 4.0 * out.std_error;
  out.text_consistent = std::abs(out.estimate - out.text) <= 4.0 * out.std_error;
  return out;
}

}  // namespace vbvar
