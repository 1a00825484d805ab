#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "core/independent_vb.hpp"
#include "core/priors.hpp"
#include "core/rng.hpp"
#include "core/vardata.hpp"

namespace vbvar {

struct GibbsConfig {
  int n_draws = 35000;
  int burn_in = 5000;
  std::uint64_t seed = 0;
  std::optional<Matrix> init_precision;  // defaults to the prior mean υ̲ S̲⁻¹

  void validate(Index M) const;
};

struct GibbsDraws {
  Matrix beta;                     // kept × Mp, one draw per row
  std::vector<Matrix> precision;   // kept draws of Σ⁻¹
  Index M = 0;
  Index p = 0;
  int n_draws = 0;
  int burn_in = 0;
  std::uint64_t seed = 0;

  Index kept() const { return beta.rows(); }
};

/// Alternates β | Σ⁻¹, Y ~ N(β̄, V̄) and Σ⁻¹ | β, Y ~ W([S̲ + Σ e_t e'_t]⁻¹, T + υ̲).
/// The first burn_in iterations are discarded.
GibbsDraws gibbs_run(const IndependentPrior& prior, const DesignData& data, const GibbsConfig& cfg);

struct DrawSummary {
  Vector beta_mean, beta_mean_se;
  Vector beta_var, beta_var_se;
  Matrix precision_mean, precision_mean_se;
  Matrix precision_var, precision_var_se;  // elementwise
  std::size_t batches = 0;
};

/// Sample moments with batch-means standard errors (20 batches).
DrawSummary summarize_draws(const GibbsDraws& draws);

struct GibbsPredictive {
  Vector mean;
  Vector mean_se;
  Matrix variance;     // sample variance of the simulated y_{T+1}
  Matrix variance_rb;  // Var(Z β) + E(Σ) over the same draws
  Matrix draws;        // kept × M
};

/// y = Z_{T+1} β + ε with ε ~ N(0, Σ) drawn fresh for every kept draw.
GibbsPredictive predictive_gibbs(const GibbsDraws& draws, const RowVector& x_next, Rng& rng);

struct RisEstimate {
  double estimate = 0;
  double std_error = 0;  // grouped jackknife, 20 groups
  double ess = 0;        // effective sample size of the reciprocal weights
  double ess_fraction = 0;
  bool degenerate = false;  // ess below 5% of the draws
};

/// Reciprocal importance sampling: 1/ML ≈ mean of q(θ) / [p(Y | θ) p(θ)] over posterior draws.
RisEstimate lnml_ris(const GibbsDraws& draws, const IndependentVbPosterior& vb, const IndependentPrior& prior,
                     const DesignData& data);

/// One row per kept draw: β entries, then the upper triangle of Σ⁻¹.
void write_draws_csv(const GibbsDraws& draws, const std::filesystem::path& path);

}  // namespace vbvar
