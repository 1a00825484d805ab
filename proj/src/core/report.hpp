#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/independent_mcmc.hpp"
#include "core/independent_vb.hpp"
#include "core/priors.hpp"
#include "core/vardata.hpp"

namespace vbvar {

// Descriptive fields copied into the report's meta and provenance sections.
struct ReportContext {
  std::string data_source;
  std::vector<std::string> variable_names;
  nlohmann::json prior_settings = nlohmann::json::object();
};

struct DiagnosticsReport {
  nlohmann::json json;
  std::string text;
  std::optional<GibbsDraws> draws;
  std::vector<double> elbo_trace;
  bool converged = true;
};

/// Exact and VB fits for the conjugate prior; every cell is analytic.
DiagnosticsReport conjugate_report(const ConjugatePrior& prior, const DesignData& data, const RowVector& x_next,
                                   const ReportContext& ctx = {});

/// VB fit for the independent prior, plus Gibbs comparisons when gibbs_cfg is given.
DiagnosticsReport independent_report(const IndependentPrior& prior, const DesignData& data, const RowVector& x_next,
                                     const std::optional<GibbsConfig>& gibbs_cfg, const VbConfig& vb_cfg,
                                     const ReportContext& ctx = {});

/// Both models on one dataset with matched priors.
DiagnosticsReport compare_report(const ConjugatePrior& conj_prior, const IndependentPrior& ind_prior,
                                 const DesignData& data, const RowVector& x_next, const GibbsConfig& gibbs_cfg,
                                 const VbConfig& vb_cfg, const ReportContext& ctx = {});

// Which precision-variance convention the Wishart simulation supports.
inline constexpr const char* kEmpiricalPrecisionConvention = "table1";

nlohmann::json matrix_to_json(const Matrix& m);

}  // namespace vbvar
