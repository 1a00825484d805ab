#pragma once

#include "core/linalg.hpp"
#include "core/mvdist.hpp"
#include "core/priors.hpp"
#include "core/vardata.hpp"

namespace vbvar {

/// Γ | Σ, Y ~ MN(mean, Σ, row_cov); Σ⁻¹ | Y ~ W(scale⁻¹, dof).
struct ConjugateExactPosterior {
  Matrix mean;     // Γ̄
  Matrix row_cov;  // V̄
  Matrix scale;    // S̄
  double dof = 0;  // ῡ = T + υ̲

  Index M() const { return scale.rows(); }
  Index p() const { return row_cov.rows(); }
};

ConjugateExactPosterior fit_exact(const ConjugatePrior& prior, const DesignData& data);

/// p(Γ | Y) = MT(Γ̄, S̄, V̄, ῡ).
MatricT marginal_coefficients(const ConjugateExactPosterior& post);

/// p(Σ⁻¹ | Y) = W(S̄⁻¹, ῡ).
WishartDist marginal_precision(const ConjugateExactPosterior& post);

double log_marginal_likelihood(const ConjugatePrior& prior, const ConjugateExactPosterior& post,
                               const DesignData& data);

struct JointMode {
  Matrix coefficients;
  Matrix precision;
};

/// Γ̂ = Γ̄, Σ̂⁻¹ = (T + p + υ̲ − M − 1) S̄⁻¹.
JointMode joint_mode(const ConjugateExactPosterior& post, Index p, double prior_dof, Index T);

struct ExactPredictive {
  MultivariateT law;            // t_{ῡ−M+1}((xΓ̄)', (1 + c) S̄ / (ῡ − M + 1))
  Matrix variance;              // (1 + c) S̄ / (ῡ − M − 1)
  Matrix variance_table_form;   // (1 + c) S̄ / (ῡ − 2); agrees with `variance` only for M = 1
  double leverage = 0;          // c = x V̄ x'
};

/// One-step-ahead predictive density of y_{T+1} given regressor row x_next.
ExactPredictive predictive_exact(const ConjugateExactPosterior& post, const RowVector& x_next);

/// A posterior reused as the prior for a later batch of data.
ConjugatePrior as_prior(const ConjugateExactPosterior& post);

/// ln p(Y | Γ, Σ⁻¹) + ln p(Γ | Σ⁻¹) + ln p(Σ⁻¹).
double log_joint_conjugate(const ConjugatePrior& prior, const DesignData& data, const Matrix& coefficients,
                           const Matrix& precision);

void check_conformable(const ConjugatePrior& prior, const DesignData& data);

}  // namespace vbvar
