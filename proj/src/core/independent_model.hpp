#pragma once

#include "core/linalg.hpp"
#include "core/mvdist.hpp"
#include "core/priors.hpp"
#include "core/vardata.hpp"

namespace vbvar {

// Cross products shared by every independent-prior computation. With
// Z_t = I_M ⊗ x_t the per-observation sums collapse onto these.
struct SufficientStats {
  Matrix XtX;
  Matrix XtY;
  Index T = 0;
  Index M = 0;
  Index p = 0;

  explicit SufficientStats(const DesignData& data);
};

/// Σ_t Z'_t A Z_t = A ⊗ X'X, assembled block by block.
Matrix stacked_gram(const Matrix& a, const Matrix& xtx);

/// Σ_t Z'_t A y_t = vec(X'Y A).
Vector stacked_cross(const Matrix& a, const Matrix& xty);

/// Σ_t Z_t V Z'_t, entry (i, j) = tr(V_ij X'X) for the p × p block V_ij.
Matrix stacked_quadratic(const Matrix& v, const Matrix& xtx, Index M);

/// Σ_t (y_t − Z_t β)(y_t − Z_t β)' = (Y − XΓ)'(Y − XΓ) with Γ = unvec(β).
Matrix residual_cross(const DesignData& data, const Vector& beta);

/// ln p(Y | β, Σ⁻¹) + ln p(β) + ln p(Σ⁻¹); also the unnormalized log posterior.
double log_joint_independent(const IndependentPrior& prior, const DesignData& data, const Vector& beta,
                             const Matrix& precision);

// Same quantity with the prior factorizations done once, for repeated evaluation.
class IndependentLogJoint {
 public:
  IndependentLogJoint(const IndependentPrior& prior, const DesignData& data);

  double operator()(const Vector& beta, const Matrix& precision) const;

 private:
  const DesignData& data_;
  Vector prior_mean_;
  Cholesky prior_chol_;
  WishartDist prec_prior_;
  double constant_ = 0;
};

// V̲⁻¹ and V̲⁻¹β̲, computed once per fit.
struct PriorPrecision {
  Matrix precision;
  Vector precision_mean;
  double log_det_cov = 0;

  explicit PriorPrecision(const IndependentPrior& prior);
};

struct GaussianStep {
  Vector mean;
  Cholesky precision_chol;  // of cov⁻¹
};

/// N(mean, cov) with cov = [V̲⁻¹ + Σ Z'_t A Z_t]⁻¹ and
/// mean = cov [V̲⁻¹β̲ + Σ Z'_t A y_t]. Shared by Gibbs, VB and the mode iteration.
GaussianStep coefficient_conditional(const PriorPrecision& prior, const SufficientStats& stats, const Matrix& a);

}  // namespace vbvar
