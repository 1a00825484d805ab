#pragma once

#include <optional>
#include <vector>

#include "core/conjugate_vb.hpp"
#include "core/independent_model.hpp"
#include "core/mvdist.hpp"
#include "core/priors.hpp"
#include "core/rng.hpp"
#include "core/vardata.hpp"

namespace vbvar {

// Leading constant of the closed-form independent ELBO. kFullDimension (Mp/2)
// is the value implied by the entropy of q(β); kPrinted (p/2) differs from it
// by a constant whenever M > 1 and is kept for comparison.
enum class ElboConstant { kFullDimension, kPrinted };

struct VbConfig {
  int max_iters = 500;
  double elbo_rel_tol = 1e-9;
  std::optional<Matrix> init_precision;  // defaults to the prior mean υ̲ S̲⁻¹
  ElboConstant elbo_constant = ElboConstant::kFullDimension;

  void validate(Index M) const;
};

/// q(β) = N(mean, cov), q(Σ⁻¹) = W(scale_q⁻¹, dof).
struct IndependentVbPosterior {
  Vector mean;                 // β̄_q
  Matrix cov;                  // V̄_q
  Matrix scale_q;              // S̄_q
  double dof = 0;              // ῡ = T + υ̲
  Matrix expected_precision;   // ῡ S̄_q⁻¹
  std::vector<double> elbo_trace;
  int iterations = 0;
  bool converged = false;
  ElboConstant elbo_constant = ElboConstant::kFullDimension;

  Index M() const { return scale_q.rows(); }
  Index p() const { return M() > 0 ? mean.size() / M() : 0; }
};

IndependentVbPosterior fit_vb_independent(const IndependentPrior& prior, const DesignData& data,
                                          const VbConfig& cfg = {});

/// Closed-form ELBO for any (β̄_q, V̄_q, S̄_q); the trace term vanishes right after an S̄_q update.
double elbo_independent(const IndependentPrior& prior, const IndependentVbPosterior& vb, const DesignData& data,
                        ElboConstant constant = ElboConstant::kFullDimension);

McEstimate mc_elbo_independent(const IndependentPrior& prior, const IndependentVbPosterior& vb,
                               const DesignData& data, std::size_t n_draws, Rng& rng);

WishartDist vb_precision(const IndependentVbPosterior& vb);

struct IndependentVbPredictive {
  Vector mean;                 // Z β̄_q
  Matrix variance;             // Z V̄_q Z' + S̄_q / (ῡ − M − 1)
  Matrix variance_table_form;  // Z V̄_q Z' + S̄_q / (ῡ − 2)
  NormalTSum components;
};

IndependentVbPredictive predictive_vb_independent(const IndependentVbPosterior& vb, const RowVector& x_next);

struct ModeResult {
  Vector coefficients;
  Matrix precision;
  std::vector<double> log_posterior_trace;  // exact-mode iteration only
  int iterations = 0;
  bool converged = false;
};

/// Alternates β̂ = argmax given Σ̂⁻¹ and Σ̂⁻¹ = (T + υ̲ − M − 1)[S̲ + E'E]⁻¹.
ModeResult modes_exact_iterative(const IndependentPrior& prior, const DesignData& data, double tol = 1e-10,
                                 int max_iters = 10000);

/// λ = 1 + (M + 1) / (T + υ̲ − M − 1).
double vb_mode_lambda(Index M, Index T, double prior_dof);

/// VB mode iteration: coefficient step with λΣ̂_q⁻¹, precision step
/// (T + υ̲ − M − 1)[S̲ + E'E + Σ Z_t V̄_q Z'_t]⁻¹.
ModeResult modes_vb_iterative(const IndependentPrior& prior, const DesignData& data, double tol = 1e-10,
                              int max_iters = 10000);

}  // namespace vbvar
