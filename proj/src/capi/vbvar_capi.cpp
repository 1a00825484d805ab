#include "vbvar/vbvar.h"

#include <fstream>
#include <iomanip>
#include <memory>
#include <new>
#include <string>

#include "core/conjugate_exact.hpp"
#include "core/conjugate_vb.hpp"
#include "core/error.hpp"
#include "core/independent_mcmc.hpp"
#include "core/independent_vb.hpp"
#include "core/priors.hpp"
#include "core/report.hpp"
#include "core/vardata.hpp"

struct vbvar_series {
  vbvar::RawSeries series;
  std::string source;
};

struct vbvar_design {
  vbvar::DesignData data;
  std::vector<std::string> names;
  std::string source;
};

struct vbvar_report {
  vbvar::DiagnosticsReport report;
  std::string json;
};

struct vbvar_conjugate_fit {
  vbvar::ConjugatePrior prior;
  vbvar::ConjugateExactPosterior exact;
  vbvar::ConjugateVbPosterior vb;
  double log_ml = 0;
  double elbo = 0;
  vbvar::ExactPredictive pred_exact;
  vbvar::VbPredictive pred_vb;
};

struct vbvar_independent_fit {
  vbvar::IndependentVbPosterior vb;
  double elbo = 0;
};

namespace {

thread_local std::string g_last_error;

vbvar_status fail(vbvar_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs fn, translating exceptions into status codes.
template <class Fn>
vbvar_status guarded(Fn&& fn) {
  try {
    fn();
    return VBVAR_OK;
  } catch (const vbvar::Error& e) {
    return fail(static_cast<vbvar_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(VBVAR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(VBVAR_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(VBVAR_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw vbvar::Error(vbvar::ErrorCode::kInvalidArgument, what);
}

vbvar::MinnesotaConfig to_core(const vbvar_minnesota_config* c) {
  vbvar::MinnesotaConfig cfg;
  if (c) {
    cfg.overall_tightness = c->lambda1;
    cfg.cross_tightness = c->lambda2;
    cfg.lag_decay = c->lambda3;
    cfg.intercept_scale = c->lambda4;
    cfg.own_lag_mean = c->own_lag_mean;
    cfg.dof_offset = c->dof_offset;
  }
  return cfg;
}

vbvar::GibbsConfig to_core(const vbvar_gibbs_config& c) {
  vbvar::GibbsConfig cfg;
  cfg.n_draws = c.n_draws;
  cfg.burn_in = c.burn_in;
  cfg.seed = c.seed;
  return cfg;
}

vbvar::VbConfig to_core(const vbvar_vb_config* c) {
  vbvar::VbConfig cfg;
  if (c) {
    cfg.max_iters = c->max_iters;
    cfg.elbo_rel_tol = c->elbo_rel_tol;
    cfg.elbo_constant = c->printed_elbo_constant ? vbvar::ElboConstant::kPrinted : vbvar::ElboConstant::kFullDimension;
  }
  return cfg;
}

vbvar::ReportContext context(const vbvar_design* design, const vbvar::MinnesotaConfig& m) {
  vbvar::ReportContext ctx;
  ctx.data_source = design->source;
  ctx.variable_names = design->names;
  ctx.prior_settings = {{"kind", "minnesota"},
                        {"lambda1", m.overall_tightness},
                        {"lambda2", m.cross_tightness},
                        {"lambda3", m.lag_decay},
                        {"lambda4", m.intercept_scale},
                        {"own_lag_mean", m.own_lag_mean},
                        {"dof_offset", m.dof_offset}};
  return ctx;
}

vbvar_report* wrap(vbvar::DiagnosticsReport rep) {
  auto* out = new vbvar_report{std::move(rep), {}};
  out->json = out->report.json.dump(2);
  return out;
}

void copy_matrix(const vbvar::Matrix& m, double* out, size_t len) {
  require(out != nullptr, "output buffer is null");
  if (len != static_cast<size_t>(m.size())) {
    throw vbvar::Error(vbvar::ErrorCode::kDimensionMismatch,
                       "output buffer holds " + std::to_string(len) + " values, need " + std::to_string(m.size()));
  }
  std::copy(m.data(), m.data() + m.size(), out);
}

}  // namespace

extern "C" {

const char* vbvar_version(void) {
  return "0.1.0";
}

const char* vbvar_last_error(void) {
  return g_last_error.c_str();
}

const char* vbvar_status_string(vbvar_status status) {
  switch (status) {
    case VBVAR_OK: return "ok";
    case VBVAR_ERR_INVALID_ARGUMENT: return "invalid argument";
    case VBVAR_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case VBVAR_ERR_NOT_POSITIVE_DEFINITE: return "matrix not positive definite";
    case VBVAR_ERR_DOMAIN: return "domain error";
    case VBVAR_ERR_UNDEFINED_MOMENT: return "undefined moment";
    case VBVAR_ERR_PARSE: return "parse error";
    case VBVAR_ERR_MISSING_VALUE: return "missing value";
    case VBVAR_ERR_EMPTY_DATA: return "empty data";
    case VBVAR_ERR_INSUFFICIENT_OBSERVATIONS: return "insufficient observations";
    case VBVAR_ERR_SINGULAR_SYSTEM: return "singular system";
    case VBVAR_ERR_NOT_CONVERGED: return "not converged";
    case VBVAR_ERR_TOO_FEW_DRAWS: return "too few draws";
    case VBVAR_ERR_IO: return "i/o error";
    case VBVAR_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void vbvar_minnesota_default(vbvar_minnesota_config* cfg) {
  if (!cfg) return;
  const vbvar::MinnesotaConfig d;
  *cfg = {d.overall_tightness, d.cross_tightness, d.lag_decay, d.intercept_scale, d.own_lag_mean, d.dof_offset};
}

void vbvar_gibbs_default(vbvar_gibbs_config* cfg) {
  if (!cfg) return;
  const vbvar::GibbsConfig d;
  *cfg = {d.n_draws, d.burn_in, d.seed};
}

void vbvar_vb_default(vbvar_vb_config* cfg) {
  if (!cfg) return;
  const vbvar::VbConfig d;
  *cfg = {d.max_iters, d.elbo_rel_tol, 0};
}

void vbvar_simulation_default(vbvar_simulation_config* cfg) {
  if (!cfg) return;
  const vbvar::SyntheticVarSpec d;
  *cfg = {d.M, d.lags, d.T_raw, d.burn_in, d.own_lag, d.cross_sd, d.intercept_sd, d.noise_scale};
}

vbvar_status vbvar_series_load_csv(const char* path, int has_timestamps, vbvar_series** out) {
  return guarded([&] {
    require(path && out, "path and out must be non-null");
    *out = nullptr;
    auto s = std::make_unique<vbvar_series>();
    s->series = vbvar::load_csv(path, {has_timestamps != 0});
    s->source = path;
    *out = s.release();
  });
}

vbvar_status vbvar_series_from_array(const double* values, size_t rows, size_t cols, const char* const* names,
                                     vbvar_series** out) {
  return guarded([&] {
    require(values && out, "values and out must be non-null");
    *out = nullptr;
    if (rows == 0 || cols == 0) throw vbvar::Error(vbvar::ErrorCode::kEmptyData, "series has no rows or columns");
    auto s = std::make_unique<vbvar_series>();
    s->series.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        values, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    if (!s->series.values.allFinite()) {
      throw vbvar::Error(vbvar::ErrorCode::kMissingValue, "series contains non-finite values");
    }
    for (size_t j = 0; j < cols; ++j) {
      s->series.names.push_back(names && names[j] ? names[j] : "y" + std::to_string(j + 1));
    }
    s->source = "<array>";
    *out = s.release();
  });
}

vbvar_status vbvar_series_simulate(const vbvar_simulation_config* cfg, uint64_t seed, vbvar_series** out) {
  return guarded([&] {
    require(cfg && out, "config and out must be non-null");
    *out = nullptr;
    vbvar::SyntheticVarSpec spec{cfg->M,       cfg->lags,     cfg->T_raw,        cfg->burn_in,
                                 cfg->own_lag, cfg->cross_sd, cfg->intercept_sd, cfg->noise_scale};
    vbvar::Rng rng(seed);
    auto s = std::make_unique<vbvar_series>();
    s->series = vbvar::simulate_var(spec, rng);
    s->source = "<simulated seed=" + std::to_string(seed) + ">";
    *out = s.release();
  });
}

vbvar_status vbvar_series_shape(const vbvar_series* series, size_t* rows, size_t* cols) {
  return guarded([&] {
    require(series != nullptr, "series is null");
    if (rows) *rows = static_cast<size_t>(series->series.rows());
    if (cols) *cols = static_cast<size_t>(series->series.cols());
  });
}

vbvar_status vbvar_series_write_csv(const vbvar_series* series, const char* path) {
  return guarded([&] {
    require(series && path, "series and path must be non-null");
    vbvar::write_csv(series->series, path);
  });
}

void vbvar_series_free(vbvar_series* series) {
  delete series;
}

vbvar_status vbvar_design_build(const vbvar_series* series, int lags, vbvar_design** out) {
  return guarded([&] {
    require(series && out, "series and out must be non-null");
    *out = nullptr;
    auto d = std::make_unique<vbvar_design>();
    d->data = vbvar::build_design(series->series, lags);
    d->names = series->series.names;
    d->source = series->source;
    *out = d.release();
  });
}

vbvar_status vbvar_design_shape(const vbvar_design* design, size_t* T, size_t* M, size_t* p) {
  return guarded([&] {
    require(design != nullptr, "design is null");
    if (T) *T = static_cast<size_t>(design->data.T());
    if (M) *M = static_cast<size_t>(design->data.M());
    if (p) *p = static_cast<size_t>(design->data.p());
  });
}

void vbvar_design_free(vbvar_design* design) {
  delete design;
}

vbvar_status vbvar_kl_exact(int M, int p, int T, double prior_dof, double* out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = vbvar::kl_exact(M, p, T, prior_dof);
  });
}

vbvar_status vbvar_kl_stirling(int M, int p, int T, double prior_dof, double* out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = vbvar::kl_stirling(M, p, T, prior_dof);
  });
}

vbvar_status vbvar_report_conjugate(const vbvar_design* design, const vbvar_minnesota_config* prior,
                                    vbvar_report** out) {
  return guarded([&] {
    require(design && out, "design and out must be non-null");
    *out = nullptr;
    const vbvar::MinnesotaConfig m = to_core(prior);
    const vbvar::ConjugatePrior cp = vbvar::minnesota_conjugate(design->data, m);
    *out = wrap(vbvar::conjugate_report(cp, design->data, design->data.x_next, context(design, m)));
  });
}

vbvar_status vbvar_report_independent(const vbvar_design* design, const vbvar_minnesota_config* prior,
                                      const vbvar_gibbs_config* gibbs, const vbvar_vb_config* vb,
                                      vbvar_report** out) {
  return guarded([&] {
    require(design && out, "design and out must be non-null");
    *out = nullptr;
    const vbvar::MinnesotaConfig m = to_core(prior);
    const vbvar::IndependentPrior ip = vbvar::minnesota_independent(design->data, m);
    std::optional<vbvar::GibbsConfig> g;
    if (gibbs) g = to_core(*gibbs);
    *out = wrap(vbvar::independent_report(ip, design->data, design->data.x_next, g, to_core(vb), context(design, m)));
  });
}

vbvar_status vbvar_report_compare(const vbvar_design* design, const vbvar_minnesota_config* prior,
                                  const vbvar_gibbs_config* gibbs, const vbvar_vb_config* vb, vbvar_report** out) {
  return guarded([&] {
    require(design && gibbs && out, "design, gibbs and out must be non-null");
    *out = nullptr;
    const vbvar::MinnesotaConfig m = to_core(prior);
    const vbvar::ConjugatePrior cp = vbvar::minnesota_conjugate(design->data, m);
    const vbvar::IndependentPrior ip = vbvar::minnesota_independent(design->data, m);
    *out = wrap(vbvar::compare_report(cp, ip, design->data, design->data.x_next, to_core(*gibbs), to_core(vb),
                                      context(design, m)));
  });
}

const char* vbvar_report_json(const vbvar_report* report) {
  return report ? report->json.c_str() : nullptr;
}

const char* vbvar_report_text(const vbvar_report* report) {
  return report ? report->report.text.c_str() : nullptr;
}

int vbvar_report_converged(const vbvar_report* report) {
  return report && report->report.converged ? 1 : 0;
}

vbvar_status vbvar_report_write_json(const vbvar_report* report, const char* path) {
  return guarded([&] {
    require(report && path, "report and path must be non-null");
    std::ofstream f(path);
    if (!f) throw vbvar::Error(vbvar::ErrorCode::kIo, std::string("cannot open '") + path + "' for writing");
    f << report->json << '\n';
    if (!f) throw vbvar::Error(vbvar::ErrorCode::kIo, std::string("failed while writing '") + path + "'");
  });
}

vbvar_status vbvar_report_write_draws_csv(const vbvar_report* report, const char* path) {
  return guarded([&] {
    require(report && path, "report and path must be non-null");
    if (!report->report.draws) {
      throw vbvar::Error(vbvar::ErrorCode::kInvalidArgument, "report holds no Gibbs draws");
    }
    vbvar::write_draws_csv(*report->report.draws, path);
  });
}

vbvar_status vbvar_report_write_elbo_trace_csv(const vbvar_report* report, const char* path) {
  return guarded([&] {
    require(report && path, "report and path must be non-null");
    if (report->report.elbo_trace.empty()) {
      throw vbvar::Error(vbvar::ErrorCode::kInvalidArgument, "report holds no ELBO trace");
    }
    std::ofstream f(path);
    if (!f) throw vbvar::Error(vbvar::ErrorCode::kIo, std::string("cannot open '") + path + "' for writing");
    f << "iteration,elbo\n" << std::setprecision(17);
    for (size_t i = 0; i < report->report.elbo_trace.size(); ++i) {
      f << i + 1 << ',' << report->report.elbo_trace[i] << '\n';
    }
    if (!f) throw vbvar::Error(vbvar::ErrorCode::kIo, std::string("failed while writing '") + path + "'");
  });
}

void vbvar_report_free(vbvar_report* report) {
  delete report;
}

vbvar_status vbvar_conjugate_fit_create(const vbvar_design* design, const vbvar_minnesota_config* prior,
                                        vbvar_conjugate_fit** out) {
  return guarded([&] {
    require(design && out, "design and out must be non-null");
    *out = nullptr;
    const auto& data = design->data;
    vbvar::ConjugatePrior cp = vbvar::minnesota_conjugate(data, to_core(prior));
    vbvar::ConjugateExactPosterior exact = vbvar::fit_exact(cp, data);
    vbvar::ConjugateVbPosterior vb = vbvar::vb_from_exact(exact, data.p());
    const double lnml = vbvar::log_marginal_likelihood(cp, exact, data);
    const double elbo = vbvar::elbo_conjugate(cp, vb, data);
    vbvar::ExactPredictive pe = vbvar::predictive_exact(exact, data.x_next);
    vbvar::VbPredictive pv = vbvar::predictive_vb_conjugate(vb, data.x_next);
    *out = new vbvar_conjugate_fit{std::move(cp), std::move(exact), std::move(vb), lnml, elbo,
                                   std::move(pe), std::move(pv)};
  });
}

vbvar_status vbvar_conjugate_fit_log_ml(const vbvar_conjugate_fit* fit, double* out) {
  return guarded([&] {
    require(fit && out, "fit and out must be non-null");
    *out = fit->log_ml;
  });
}

vbvar_status vbvar_conjugate_fit_elbo(const vbvar_conjugate_fit* fit, double* out) {
  return guarded([&] {
    require(fit && out, "fit and out must be non-null");
    *out = fit->elbo;
  });
}

vbvar_status vbvar_conjugate_fit_coefficients(const vbvar_conjugate_fit* fit, double* out, size_t len) {
  return guarded([&] {
    require(fit != nullptr, "fit is null");
    copy_matrix(fit->exact.mean, out, len);
  });
}

vbvar_status vbvar_conjugate_fit_predictive(const vbvar_conjugate_fit* fit, double* mean, double* variance_exact,
                                            double* variance_vb, size_t M) {
  return guarded([&] {
    require(fit != nullptr, "fit is null");
    if (M != static_cast<size_t>(fit->exact.M())) {
      throw vbvar::Error(vbvar::ErrorCode::kDimensionMismatch, "M does not match the fit");
    }
    if (mean) copy_matrix(fit->pred_exact.law.mean(), mean, M);
    if (variance_exact) copy_matrix(fit->pred_exact.variance, variance_exact, M * M);
    if (variance_vb) copy_matrix(fit->pred_vb.variance, variance_vb, M * M);
  });
}

void vbvar_conjugate_fit_free(vbvar_conjugate_fit* fit) {
  delete fit;
}

vbvar_status vbvar_independent_fit_create(const vbvar_design* design, const vbvar_minnesota_config* prior,
                                          const vbvar_vb_config* vb, vbvar_independent_fit** out) {
  return guarded([&] {
    require(design && out, "design and out must be non-null");
    *out = nullptr;
    const auto& data = design->data;
    const vbvar::IndependentPrior ip = vbvar::minnesota_independent(data, to_core(prior));
    const vbvar::VbConfig cfg = to_core(vb);
    vbvar::IndependentVbPosterior post = vbvar::fit_vb_independent(ip, data, cfg);
    const double elbo = vbvar::elbo_independent(ip, post, data, cfg.elbo_constant);
    *out = new vbvar_independent_fit{std::move(post), elbo};
  });
}

vbvar_status vbvar_independent_fit_elbo(const vbvar_independent_fit* fit, double* out) {
  return guarded([&] {
    require(fit && out, "fit and out must be non-null");
    *out = fit->elbo;
  });
}

vbvar_status vbvar_independent_fit_iterations(const vbvar_independent_fit* fit, int* iterations, int* converged) {
  return guarded([&] {
    require(fit != nullptr, "fit is null");
    if (iterations) *iterations = fit->vb.iterations;
    if (converged) *converged = fit->vb.converged ? 1 : 0;
  });
}

vbvar_status vbvar_independent_fit_coefficients(const vbvar_independent_fit* fit, double* out, size_t len) {
  return guarded([&] {
    require(fit != nullptr, "fit is null");
    copy_matrix(vbvar::linalg::unvec(fit->vb.mean, fit->vb.p(), fit->vb.M()), out, len);
  });
}

vbvar_status vbvar_independent_fit_expected_precision(const vbvar_independent_fit* fit, double* out, size_t len) {
  return guarded([&] {
    require(fit != nullptr, "fit is null");
    copy_matrix(fit->vb.expected_precision, out, len);
  });
}

void vbvar_independent_fit_free(vbvar_independent_fit* fit) {
  delete fit;
}

}  // extern "C"
