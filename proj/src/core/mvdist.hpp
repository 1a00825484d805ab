#pragma once

#include <optional>

#include "core/linalg.hpp"
#include "core/rng.hpp"

namespace vbvar {

/// ln Γ_M(a) = (M(M-1)/4) ln π + Σ_{j=1..M} ln Γ(a + (1-j)/2).
/// Throws ErrorCode::kDomain unless dim >= 1 and a > (dim-1)/2.
double mv_log_gamma(int dim, double a);

/// Σ_{j=1..M} ψ(a + (1-j)/2), the derivative of mv_log_gamma in a.
double mv_digamma(int dim, double a);

/// Matricvariate normal MN(mean, Σ, V): vec(X) ~ N(vec(mean), Σ ⊗ V) with
/// column-major vec. `col_cov` is Σ (M×M), `row_cov` is V (p×p).
class MatricNormal {
 public:
  MatricNormal(Matrix mean, Matrix col_cov, Matrix row_cov);

  const Matrix& mean() const { return mean_; }
  const Matrix& col_cov() const { return col_cov_; }
  const Matrix& row_cov() const { return row_cov_; }

  // Explicit Σ ⊗ V; only meant for small dimensions.
  Matrix vec_covariance() const;

  Matrix sample(Rng& rng) const;
  // Evaluated through the two Cholesky factors, never through Σ ⊗ V.
  double log_pdf(const Matrix& x) const;

  // A X ~ MN(A X̄, Σ, A V A').
  MatricNormal left_multiply(const Matrix& a) const;

 private:
  Matrix mean_;
  Matrix col_cov_;
  Matrix row_cov_;
  Cholesky col_chol_;
  Cholesky row_chol_;
};

/// Wishart W(S, υ) on M×M SPD matrices with E = υS.
class WishartDist {
 public:
  WishartDist(Matrix scale, double dof);

  Index dim() const { return scale_.rows(); }
  const Matrix& scale() const { return scale_; }
  double dof() const { return dof_; }

  Matrix mean() const;
  // (υ - M - 1) S, only when υ > M + 1.
  std::optional<Matrix> mode() const;
  // Var(w_ij) = υ (s_ij² + s_ii s_jj).
  Matrix elementwise_variance() const;
  double expected_log_det() const;
  double entropy() const;
  double log_pdf(const Matrix& w) const;

  // Bartlett decomposition.
  Matrix sample(Rng& rng) const;

 private:
  Matrix scale_;
  double dof_;
  Cholesky chol_;
  double log_det_scale_;
};

struct WishartStats {
  Matrix mean;
  std::optional<Matrix> mode;
  Matrix variance;
  double entropy;
};

WishartStats wishart_stats(const WishartDist& w);
Matrix wishart_sample(const WishartDist& w, Rng& rng);

// W(F F', υ) for any square factor F.
Matrix wishart_sample_factor(const Matrix& factor, double dof, Rng& rng);

/// Matricvariate t MT(mean, S, V, υ): X | Σ ~ MN(mean, Σ, V) with Σ⁻¹ ~ W(S⁻¹, υ).
/// mean is p×q, `col_scale` S is q×q, `row_scale` V is p×p.
class MatricT {
 public:
  MatricT(Matrix mean, Matrix col_scale, Matrix row_scale, double dof);

  const Matrix& mean() const { return mean_; }
  const Matrix& col_scale() const { return col_scale_; }
  const Matrix& row_scale() const { return row_scale_; }
  double dof() const { return dof_; }

  // (S ⊗ V) / (υ - q - 1); throws kUndefinedMoment when υ <= q + 1.
  Matrix vec_variance() const;
  double log_pdf(const Matrix& x) const;
  Matrix sample(Rng& rng) const;

 private:
  Matrix mean_;
  Matrix col_scale_;
  Matrix row_scale_;
  double dof_;
};

/// Multivariate t T(mean, S, υ) with Var = υ S / (υ - 2).
class MultivariateT {
 public:
  MultivariateT(Vector mean, Matrix scale, double dof);

  const Vector& mean() const { return mean_; }
  const Matrix& scale() const { return scale_; }
  double dof() const { return dof_; }

  // Throws kUndefinedMoment when υ <= 2.
  Matrix variance() const;
  double log_pdf(const Vector& x) const;
  Vector sample(Rng& rng) const;

 private:
  Vector mean_;
  Matrix scale_;
  double dof_;
  Cholesky chol_;
};

struct MatricTStats {
  Matrix mean;
  Matrix vec_variance;
};
struct MultivariateTStats {
  Vector mean;
  Matrix variance;
};

MatricTStats matric_t_stats(const MatricT& d);
MultivariateTStats mvt_stats(const MultivariateT& d);

/// Law of x when x | Λ ~ N(mean, Λ⁻¹) and Λ ~ W(A, ν): a multivariate t with
/// ν - q + 1 degrees of freedom and scale A⁻¹ / (ν - q + 1), so Var = A⁻¹ / (ν - q - 1).
MultivariateT normal_wishart_mixture(const Vector& mean, const WishartDist& precision_law);

/// Sum of an independent normal N(mean, normal_cov) and a zero-mean t. The
/// density has no closed form; moments are exact and draws come from simulation.
class NormalTSum {
 public:
  NormalTSum(Vector mean, Matrix normal_cov, MultivariateT noise);

  const Vector& mean() const { return mean_; }
  const Matrix& normal_cov() const { return normal_cov_; }
  const MultivariateT& noise() const { return noise_; }

  Matrix variance() const;
  Vector sample(Rng& rng) const;
  // One draw per row.
  Matrix sample(std::size_t n, Rng& rng) const;

 private:
  Vector mean_;
  Matrix normal_cov_;
  Matrix normal_root_;
  MultivariateT noise_;
};

}  // namespace vbvar
