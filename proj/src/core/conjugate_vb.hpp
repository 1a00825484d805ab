#pragma once

#include <cstddef>

#include "core/conjugate_exact.hpp"
#include "core/mvdist.hpp"
#include "core/rng.hpp"

namespace vbvar {

/// q(Γ) = MN(Γ̄, E_q(Σ⁻¹)⁻¹, V̄), q(Σ⁻¹) = W(S̄_q⁻¹, ῡ_q).
struct ConjugateVbPosterior {
  Matrix mean;                 // Γ̄
  Matrix row_cov;              // V̄
  Matrix scale_q;              // S̄_q = (ῡ_q / ῡ) S̄
  double dof_q = 0;            // ῡ_q = T + p + υ̲
  double dof = 0;              // ῡ = T + υ̲
  Matrix expected_precision;   // ῡ S̄⁻¹
  Matrix expected_covariance;  // its inverse, S̄ / ῡ

  Index M() const { return scale_q.rows(); }
  Index p() const { return row_cov.rows(); }
  // S̄ of the exact posterior.
  Matrix exact_scale() const { return (dof / dof_q) * scale_q; }
};

ConjugateVbPosterior fit_vb_conjugate(const ConjugatePrior& prior, const DesignData& data);
ConjugateVbPosterior vb_from_exact(const ConjugateExactPosterior& exact, Index p);

MatricNormal vb_coefficients(const ConjugateVbPosterior& vb);
WishartDist vb_precision(const ConjugateVbPosterior& vb);

double elbo_conjugate(const ConjugatePrior& prior, const ConjugateVbPosterior& vb, const DesignData& data);

struct McEstimate {
  double estimate = 0;
  double std_error = 0;
  std::size_t draws = 0;
};

/// E_q[ln p(Y, Γ, Σ⁻¹) − ln q(Γ) − ln q(Σ⁻¹)] by sampling q.
McEstimate mc_elbo_estimate(const ConjugatePrior& prior, const ConjugateVbPosterior& vb, const DesignData& data,
                            std::size_t n_draws, Rng& rng);

/// KL(q ‖ p) for the conjugate VAR; depends only on (M, p, T, υ̲).
double kl_exact(int M, int p, int T, double prior_dof);
/// Stirling approximation of kl_exact.
double kl_stirling(int M, int p, int T, double prior_dof);

struct VbPredictive {
  Vector mean;
  Matrix variance;             // c S̄ / ῡ + S̄_q / (ῡ_q − M − 1)
  Matrix variance_table_form;  // (ῡ_q / (ῡ_q − 2) + c) S̄ / ῡ; agrees with `variance` only for M = 1
  double leverage = 0;
  NormalTSum components;       // normal part + t noise, for simulation
};

VbPredictive predictive_vb_conjugate(const ConjugateVbPosterior& vb, const RowVector& x_next);

/// Γ mode Γ̄ and Σ⁻¹ mode (ῡ_q − M − 1) S̄_q⁻¹.
JointMode vb_modes(const ConjugateVbPosterior& vb);

/// Data-free VB/exact ratios for the conjugate VAR. Each ratio keeps its numerator
/// and denominator as multiples of the common scale (S̄ ⊗ V̄, S̄⁻¹, ...).
struct MomentRatios {
  double dof = 0;    // ῡ
  double dof_q = 0;  // ῡ_q
  double coef_var_vb = 0, coef_var_exact = 0, coef_var_ratio = 0;
  double prec_var_vb = 0, prec_var_exact = 0, prec_var_ratio_table1 = 0;
  double prec_var_ratio_text = 0;
  double mode_vb = 0, mode_exact = 0, mode_ratio = 0;
  double leverage = 0;
  double pred_var_vb = 0, pred_var_exact = 0, pred_var_ratio = 0;
  double pred_var_vb_table = 0, pred_var_exact_table = 0, pred_var_ratio_table = 0;
};

MomentRatios moment_ratios(int M, int p, int T, double prior_dof, double leverage);

/// Precision-variance ratio VB/exact estimated from Wishart draws of both laws,
/// pooled over the diagonal; standard error from 20 batches.
struct PrecisionVarianceCheck {
  int M = 0;
  double estimate = 0;
  double std_error = 0;
  std::size_t draws = 0;
  double table1 = 0;  // ῡ / ῡ_q
  double text = 0;    // (T + υ̲ − p − 1) / (T + υ̲)
  bool table1_consistent = false;
  bool text_consistent = false;
};

PrecisionVarianceCheck adjudicate_precision_variance(int M, int p, int T, double prior_dof, std::size_t n_draws,
                                                     Rng& rng);

}  // namespace vbvar
