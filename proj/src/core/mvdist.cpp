#include "core/mvdist.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "core/error.hpp"

namespace vbvar {
namespace {

constexpr double kLogPi = 1.1447298858494002;       // ln π
constexpr double kLogTwoPi = 1.8378770664093453;    // ln 2π
constexpr double kLn2 = std::numbers::ln2;

void require_dims(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kDimensionMismatch, what);
}

void require_wishart_dof(double dof, Index dim, const char* what) {
  if (!(dof > static_cast<double>(dim) - 1.0) || !std::isfinite(dof)) {
    throw Error(ErrorCode::kDomain, std::string(what) + ": degrees of freedom must exceed dim - 1");
  }
}

// Lower-triangular Bartlett factor A with A Aᵀ ~ W(I, dof).
Matrix bartlett_factor(Index m, double dof, Rng& rng) {
  Matrix a = Matrix::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    a(i, i) = std::sqrt(rng.chi_square(dof - static_cast<double>(i)));
    for (Index j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  return a;
}

}  // namespace

double mv_log_gamma(int dim, double a) {
  if (dim < 1) throw Error(ErrorCode::kDomain, "mv_log_gamma: dimension must be at least 1");
  if (!(a > 0.5 * (dim - 1)) || !std::isfinite(a)) {
    throw Error(ErrorCode::kDomain, "mv_log_gamma: argument must exceed (dim - 1) / 2");
  }
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(dim) + 1);
  terms.push_back(0.25 * dim * (dim - 1) * kLogPi);
  for (int j = 1; j <= dim; ++j) terms.push_back(boost::math::lgamma(a + 0.5 * (1 - j)));
  return linalg::compensated_sum(terms);
}

double mv_digamma(int dim, double a) {
  if (dim < 1 || !(a > 0.5 * (dim - 1))) {
    throw Error(ErrorCode::kDomain, "mv_digamma: argument outside the domain");
  }
  double s = 0.0;
  for (int j = 1; j <= dim; ++j) s += boost::math::digamma(a + 0.5 * (1 - j));
  return s;
}

// ---------------------------------------------------------------- MatricNormal

MatricNormal::MatricNormal(Matrix mean, Matrix col_cov, Matrix row_cov)
    : mean_(std::move(mean)), col_cov_(std::move(col_cov)), row_cov_(std::move(row_cov)) {
  require_dims(col_cov_.rows() == mean_.cols() && row_cov_.rows() == mean_.rows(),
               "MatricNormal: covariance shapes do not match the mean");
  linalg::require_spd(col_cov_, "MatricNormal column covariance");
  linalg::require_spd(row_cov_, "MatricNormal row covariance");
  col_chol_ = linalg::cholesky(col_cov_, "MatricNormal column covariance");
  row_chol_ = linalg::cholesky(row_cov_, "MatricNormal row covariance");
}

Matrix MatricNormal::vec_covariance() const {
  return linalg::kron(col_cov_, row_cov_);
}

Matrix MatricNormal::sample(Rng& rng) const {
  const Matrix z = rng.normal_matrix(mean_.rows(), mean_.cols());
  return mean_ + row_chol_.matrixL() * z * Matrix(col_chol_.matrixL()).transpose();
}

double MatricNormal::log_pdf(const Matrix& x) const {
  require_dims(x.rows() == mean_.rows() && x.cols() == mean_.cols(),
               "MatricNormal::log_pdf: argument shape mismatch");
  const double p = static_cast<double>(mean_.rows());
  const double m = static_cast<double>(mean_.cols());
  // tr(Σ⁻¹ Dᵀ V⁻¹ D) = ||L_V⁻¹ D L_Σ⁻ᵀ||²_F
  Matrix w = row_chol_.matrixL().solve(x - mean_);
  Matrix u = col_chol_.matrixL().solve(w.transpose());
  return -0.5 * m * p * kLogTwoPi - 0.5 * p * linalg::log_det(col_chol_) -
         0.5 * m * linalg::log_det(row_chol_) - 0.5 * u.squaredNorm();
}

MatricNormal MatricNormal::left_multiply(const Matrix& a) const {
  require_dims(a.cols() == mean_.rows(), "MatricNormal::left_multiply: shape mismatch");
  return MatricNormal(a * mean_, col_cov_, linalg::symmetrize(a * row_cov_ * a.transpose()));
}

// ----------------------------------------------------------------- WishartDist

WishartDist::WishartDist(Matrix scale, double dof) : scale_(std::move(scale)), dof_(dof) {
  linalg::require_spd(scale_, "Wishart scale");
  require_wishart_dof(dof_, scale_.rows(), "WishartDist");
  chol_ = linalg::cholesky(scale_, "Wishart scale");
  log_det_scale_ = linalg::log_det(chol_);
}

Matrix WishartDist::mean() const {
  return dof_ * scale_;
}

std::optional<Matrix> WishartDist::mode() const {
  const double shift = dof_ - static_cast<double>(dim()) - 1.0;
  if (shift <= 0.0) return std::nullopt;
  return Matrix(shift * scale_);
}

Matrix WishartDist::elementwise_variance() const {
  const Vector d = scale_.diagonal();
  return dof_ * (scale_.cwiseAbs2() + d * d.transpose());
}

double WishartDist::expected_log_det() const {
  const int m = static_cast<int>(dim());
  return mv_digamma(m, 0.5 * dof_) + m * kLn2 + log_det_scale_;
}

double WishartDist::entropy() const {
  const double m = static_cast<double>(dim());
  const double log_normalizer = 0.5 * dof_ * m * kLn2 + 0.5 * dof_ * log_det_scale_ +
                                mv_log_gamma(static_cast<int>(dim()), 0.5 * dof_);
  return log_normalizer - 0.5 * (dof_ - m - 1.0) * expected_log_det() + 0.5 * dof_ * m;
}

double WishartDist::log_pdf(const Matrix& w) const {
  require_dims(w.rows() == dim() && w.cols() == dim(), "WishartDist::log_pdf: shape mismatch");
  const Cholesky w_chol(w);
  if (w_chol.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const double m = static_cast<double>(dim());
  const double trace_term = chol_.solve(w).trace();
  return 0.5 * (dof_ - m - 1.0) * linalg::log_det(w_chol) - 0.5 * trace_term -
         0.5 * dof_ * m * kLn2 - 0.5 * dof_ * log_det_scale_ -
         mv_log_gamma(static_cast<int>(dim()), 0.5 * dof_);
}

Matrix WishartDist::sample(Rng& rng) const {
  const Matrix la = chol_.matrixL() * bartlett_factor(dim(), dof_, rng);
  return la * la.transpose();
}

WishartStats wishart_stats(const WishartDist& w) {
  return {w.mean(), w.mode(), w.elementwise_variance(), w.entropy()};
}

Matrix wishart_sample(const WishartDist& w, Rng& rng) {
  return w.sample(rng);
}

Matrix wishart_sample_factor(const Matrix& factor, double dof, Rng& rng) {
  require_dims(factor.rows() == factor.cols(), "wishart_sample_factor: factor must be square");
  require_wishart_dof(dof, factor.rows(), "wishart_sample_factor");
  const Matrix fa = factor * bartlett_factor(factor.rows(), dof, rng);
  return fa * fa.transpose();
}

// --------------------------------------------------------------------- MatricT

MatricT::MatricT(Matrix mean, Matrix col_scale, Matrix row_scale, double dof)
    : mean_(std::move(mean)), col_scale_(std::move(col_scale)), row_scale_(std::move(row_scale)), dof_(dof) {
  require_dims(col_scale_.rows() == mean_.cols() && row_scale_.rows() == mean_.rows(),
               "MatricT: scale shapes do not match the mean");
  linalg::require_spd(col_scale_, "MatricT column scale");
  linalg::require_spd(row_scale_, "MatricT row scale");
  require_wishart_dof(dof_, col_scale_.rows(), "MatricT");
}

Matrix MatricT::vec_variance() const {
  const double q = static_cast<double>(mean_.cols());
  if (dof_ <= q + 1.0) {
    throw Error(ErrorCode::kUndefinedMoment, "MatricT variance requires dof > q + 1");
  }
  return linalg::kron(col_scale_, row_scale_) / (dof_ - q - 1.0);
}

double MatricT::log_pdf(const Matrix& x) const {
  require_dims(x.rows() == mean_.rows() && x.cols() == mean_.cols(), "MatricT::log_pdf: shape mismatch");
  const int q = static_cast<int>(mean_.cols());
  const double p = static_cast<double>(mean_.rows());
  const Cholesky row_chol = linalg::cholesky(row_scale_, "MatricT row scale");
  const Matrix w = row_chol.matrixL().solve(x - mean_);
  const Matrix inner = linalg::symmetrize(col_scale_ + w.transpose() * w);
  return -0.5 * p * q * kLogPi - 0.5 * q * linalg::log_det(row_chol) +
         0.5 * dof_ * linalg::log_det_spd(col_scale_, "MatricT column scale") -
         0.5 * (dof_ + p) * linalg::log_det_spd(inner, "MatricT kernel") +
         mv_log_gamma(q, 0.5 * (dof_ + p)) - mv_log_gamma(q, 0.5 * dof_);
}

Matrix MatricT::sample(Rng& rng) const {
  const WishartDist precision_law(linalg::inverse_spd(col_scale_, "MatricT column scale"), dof_);
  const Matrix sigma = linalg::inverse_spd(precision_law.sample(rng), "MatricT precision draw");
  return MatricNormal(mean_, sigma, row_scale_).sample(rng);
}

// --------------------------------------------------------------- MultivariateT

MultivariateT::MultivariateT(Vector mean, Matrix scale, double dof)
    : mean_(std::move(mean)), scale_(std::move(scale)), dof_(dof) {
  require_dims(scale_.rows() == mean_.size(), "MultivariateT: scale shape does not match the mean");
  linalg::require_spd(scale_, "MultivariateT scale");
  if (!(dof_ > 0.0) || !std::isfinite(dof_)) {
    throw Error(ErrorCode::kDomain, "MultivariateT: degrees of freedom must be positive");
  }
  chol_ = linalg::cholesky(scale_, "MultivariateT scale");
}

Matrix MultivariateT::variance() const {
  if (dof_ <= 2.0) throw Error(ErrorCode::kUndefinedMoment, "MultivariateT variance requires dof > 2");
  return dof_ / (dof_ - 2.0) * scale_;
}

double MultivariateT::log_pdf(const Vector& x) const {
  require_dims(x.size() == mean_.size(), "MultivariateT::log_pdf: shape mismatch");
  const double q = static_cast<double>(mean_.size());
  const double delta = chol_.matrixL().solve(x - mean_).squaredNorm();
  return boost::math::lgamma(0.5 * (dof_ + q)) - boost::math::lgamma(0.5 * dof_) -
         0.5 * q * (std::log(dof_) + kLogPi) - 0.5 * linalg::log_det(chol_) -
         0.5 * (dof_ + q) * std::log1p(delta / dof_);
}

Vector MultivariateT::sample(Rng& rng) const {
  const double w = std::sqrt(dof_ / rng.chi_square(dof_));
  const Vector z = chol_.matrixL() * rng.normal_vector(mean_.size());
  return mean_ + w * z;
}

MatricTStats matric_t_stats(const MatricT& d) {
  return {d.mean(), d.vec_variance()};
}

MultivariateTStats mvt_stats(const MultivariateT& d) {
  return {d.mean(), d.variance()};
}

MultivariateT normal_wishart_mixture(const Vector& mean, const WishartDist& precision_law) {
  require_dims(mean.size() == precision_law.dim(), "normal_wishart_mixture: shape mismatch");
  const double dof = precision_law.dof() - static_cast<double>(mean.size()) + 1.0;
  return MultivariateT(mean, linalg::inverse_spd(precision_law.scale(), "Wishart scale") / dof, dof);
}

// ------------------------------------------------------------------ NormalTSum

NormalTSum::NormalTSum(Vector mean, Matrix normal_cov, MultivariateT noise)
    : mean_(std::move(mean)), normal_cov_(std::move(normal_cov)), noise_(std::move(noise)) {
  require_dims(normal_cov_.rows() == mean_.size() && normal_cov_.cols() == mean_.size() &&
                   noise_.mean().size() == mean_.size(),
               "NormalTSum: shape mismatch");
  // The normal part may be singular (zero leverage), so use a symmetric root.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(linalg::symmetrize(normal_cov_));
  if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::kNotPositiveDefinite, "NormalTSum: normal covariance is not positive semidefinite");
  }
  normal_root_ = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

Matrix NormalTSum::variance() const {
  return normal_cov_ + noise_.variance();
}

Vector NormalTSum::sample(Rng& rng) const {
  Vector x = mean_ + normal_root_ * rng.normal_vector(mean_.size());
  return x + noise_.sample(rng);
}

Matrix NormalTSum::sample(std::size_t n, Rng& rng) const {
  Matrix out(static_cast<Index>(n), mean_.size());
  for (std::size_t i = 0; i < n; ++i) out.row(static_cast<Index>(i)) = sample(rng).transpose();
  return out;
}

}  // namespace vbvar
