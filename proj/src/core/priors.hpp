#pragma once

#include "core/linalg.hpp"
#include "core/vardata.hpp"

namespace vbvar {

/// Γ | Σ ~ MN(mean, Σ, row_cov), Σ⁻¹ ~ W(scale⁻¹, dof).
struct ConjugatePrior {
  Matrix mean;     // Γ̲ (p × M)
  Matrix row_cov;  // V̲ (p × p)
  Matrix scale;    // S̲ (M × M)
  double dof = 0;  // υ̲

  Index M() const { return scale.rows(); }
  Index p() const { return row_cov.rows(); }
  void validate() const;
};

/// β ~ N(mean, cov), Σ⁻¹ ~ W(scale⁻¹, dof), independently.
struct IndependentPrior {
  Vector mean;     // β̲ (Mp), equation-major
  Matrix cov;      // V̲ (Mp × Mp)
  Matrix scale;    // S̲ (M × M)
  double dof = 0;  // υ̲

  Index M() const { return scale.rows(); }
  Index p() const { return M() > 0 ? mean.size() / M() : 0; }
  void validate() const;
};

struct MinnesotaConfig {
  double overall_tightness = 0.2;  // λ₁
  double cross_tightness = 0.5;    // λ₂
  double lag_decay = 1.0;          // λ₃
  double intercept_scale = 100.0;  // λ₄, relative to λ₁
  double own_lag_mean = 0.0;
  int dof_offset = 2;

  void validate() const;
};

/// Residual variance of a least-squares AR(d) with intercept, one per variable.
/// Falls back to the sample variance when the regression is singular.
Vector ar_residual_variances(const DesignData& data);

/// Diagonal V̲ with lag ℓ, variable j entry λ₁² / (ℓ^{2λ₃} ŝ_j²) and
/// intercept entry (λ₁λ₄)²; S̲ = diag(ŝ²), υ̲ = M + dof_offset.
ConjugatePrior minnesota_conjugate(const DesignData& data, const MinnesotaConfig& cfg);

/// Block-diagonal V̲; equation m, lag ℓ, variable j has variance
/// λ₁² (λ₂² if j ≠ m) ŝ_m² / (ℓ^{2λ₃} ŝ_j²), intercept ŝ_m² (λ₁λ₄)².
IndependentPrior minnesota_independent(const DesignData& data, const MinnesotaConfig& cfg);

}  // namespace vbvar
