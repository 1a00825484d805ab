#include "core/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "core/conjugate_exact.hpp"
#include "core/conjugate_vb.hpp"
#include "core/error.hpp"

namespace vbvar {
namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::vector<std::string> variable_names(const ReportContext& ctx, Index M) {
  if (static_cast<Index>(ctx.variable_names.size()) == M) return ctx.variable_names;
  std::vector<std::string> out;
  for (Index j = 0; j < M; ++j) out.push_back("y" + std::to_string(j + 1));
  return out;
}

json ratio_cell(double vb, double reference, const char* reference_name) {
  return {{"vb", vb}, {reference_name, reference}, {"ratio", vb / reference}};
}

// Reference value estimated by simulation: the ratio's se follows from the delta method.
json mc_ratio_cell(double vb, double reference, double reference_se) {
  const double ratio = vb / reference;
  return {{"vb", vb},
          {"gibbs", reference},
          {"gibbs_se", reference_se},
          {"ratio", ratio},
          {"ratio_se", std::abs(ratio) * reference_se / std::abs(reference)}};
}

json meta_section(const char* model, const DesignData& data, double prior_dof, const ReportContext& ctx) {
  return {{"model", model},
          {"M", data.M()},
          {"p", data.p()},
          {"T", data.T()},
          {"lags", data.lag_order},
          {"prior_dof", prior_dof},
          {"variables", variable_names(ctx, data.M())},
          {"data_source", ctx.data_source},
          {"prior_settings", ctx.prior_settings}};
}

class TextTable {
 public:
  void heading(const std::string& s) { os_ << s << '\n'; }
  void row(const std::string& label, const std::string& value, const std::string& note = {}) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "  %-34s %14s", label.c_str(), value.c_str());
    os_ << buf;
    if (!note.empty()) os_ << "   " << note;
    os_ << '\n';
  }
  void blank() { os_ << '\n'; }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

}  // namespace

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

DiagnosticsReport conjugate_report(const ConjugatePrior& prior, const DesignData& data, const RowVector& x_next,
                                   const ReportContext& ctx) {
  const ConjugateExactPosterior exact = fit_exact(prior, data);
  const ConjugateVbPosterior vb = vb_from_exact(exact, data.p());
  const int M = static_cast<int>(data.M());
  const int p = static_cast<int>(data.p());
  const int T = static_cast<int>(data.T());
  const auto names = variable_names(ctx, data.M());

  const double lnml = log_marginal_likelihood(prior, exact, data);
  const double elbo = elbo_conjugate(prior, vb, data);
  const double kl = kl_exact(M, p, T, prior.dof);
  const double kl_st = kl_stirling(M, p, T, prior.dof);

  const ExactPredictive pe = predictive_exact(exact, x_next);
  const VbPredictive pv = predictive_vb_conjugate(vb, x_next);
  const MomentRatios mr = moment_ratios(M, p, T, prior.dof, pe.leverage);
  const JointMode mode_p = joint_mode(exact, data.p(), prior.dof, data.T());
  const JointMode mode_q = vb_modes(vb);
  const WishartDist prec_p = marginal_precision(exact);
  const WishartDist prec_q = vb_precision(vb);
  const Matrix var_p = prec_p.elementwise_variance();
  const Matrix var_q = prec_q.elementwise_variance();
  const Matrix mean_p = prec_p.mean();

  json per_variable = json::array();
  for (int j = 0; j < M; ++j) {
    per_variable.push_back({
        {"variable", names[static_cast<std::size_t>(j)]},
        {"precision_mean", ratio_cell(vb.expected_precision(j, j), mean_p(j, j), "exact")},
        {"precision_variance", ratio_cell(var_q(j, j), var_p(j, j), "exact")},
        {"precision_mode", ratio_cell(mode_q.precision(j, j), mode_p.precision(j, j), "exact")},
        {"predictive_mean", ratio_cell(pv.mean(j), pe.law.mean()(j), "exact")},
        {"predictive_variance", ratio_cell(pv.variance(j, j), pe.variance(j, j), "exact")},
        {"predictive_variance_table_form",
         ratio_cell(pv.variance_table_form(j, j), pe.variance_table_form(j, j), "exact")},
    });
  }

  DiagnosticsReport rep;
  json& j = rep.json;
  j["meta"] = meta_section("conjugate", data, prior.dof, ctx);
  j["kl_section"] = {
      {"log_marginal_likelihood", lnml},
      {"elbo", elbo},
      {"kl", lnml - elbo},
      {"kl_closed_form", kl},
      {"kl_stirling", kl_st},
      {"identity_residual", lnml - elbo - kl},
  };
  j["ratio_section"] = {
      {"orientation", "vb/exact"},
      {"coefficient_variance", {{"vb", mr.coef_var_vb}, {"exact", mr.coef_var_exact}, {"ratio", mr.coef_var_ratio},
                                {"units", "S_bar kron V_bar"}}},
      {"precision_variance",
       {{"table1_convention",
         {{"vb", mr.prec_var_vb}, {"exact", mr.prec_var_exact}, {"ratio", mr.prec_var_ratio_table1}}},
        {"text_convention", {{"ratio", mr.prec_var_ratio_text}}},
        {"empirical_convention", kEmpiricalPrecisionConvention}}},
      {"precision_mode", {{"vb", mr.mode_vb}, {"exact", mr.mode_exact}, {"ratio", mr.mode_ratio},
                          {"units", "inverse S_bar"}}},
      {"predictive_variance",
       {{"leverage", mr.leverage},
        {"vb", mr.pred_var_vb},
        {"exact", mr.pred_var_exact},
        {"ratio", mr.pred_var_ratio},
        {"table_form", {{"vb", mr.pred_var_vb_table}, {"exact", mr.pred_var_exact_table},
                        {"ratio", mr.pred_var_ratio_table}}},
        {"units", "S_bar"}}},
      {"per_variable", per_variable},
  };
  j["posterior"] = {
      {"coefficient_mean", matrix_to_json(exact.mean)},
      {"exact_scale", matrix_to_json(exact.scale)},
      {"exact_dof", exact.dof},
      {"vb_scale", matrix_to_json(vb.scale_q)},
      {"vb_dof", vb.dof_q},
      {"expected_precision", matrix_to_json(vb.expected_precision)},
      {"predictive_mean", std::vector<double>(pe.law.mean().data(), pe.law.mean().data() + M)},
  };
  j["provenance"] = {{"version", kVersion}, {"stochastic", false}, {"seed", nullptr}};
  j["traceability"] = {
      {"kl_section.log_marginal_likelihood", "log_marginal_likelihood"},
      {"kl_section.elbo", "elbo_conjugate"},
      {"kl_section.kl_closed_form", "kl_exact"},
      {"kl_section.kl_stirling", "kl_stirling"},
      {"ratio_section.coefficient_variance", "moment_ratios"},
      {"ratio_section.precision_variance", "moment_ratios / wishart_stats"},
      {"ratio_section.precision_mode", "joint_mode / vb_modes"},
      {"ratio_section.predictive_variance", "predictive_exact / predictive_vb_conjugate"},
      {"posterior", "fit_exact / fit_vb_conjugate"},
  };

  TextTable t;
  t.heading("Conjugate VAR  M=" + std::to_string(M) + "  p=" + std::to_string(p) + "  T=" + std::to_string(T) +
            "  prior dof=" + fmt("%g", prior.dof));
  t.row("log marginal likelihood", fmt("%.6f", lnml));
  t.row("ELBO", fmt("%.6f", elbo));
  t.row("KL = lnML - ELBO", fmt("%.6f", lnml - elbo));
  t.row("KL closed form", fmt("%.6f", kl));
  t.row("KL Stirling", fmt("%.6f", kl_st));
  t.blank();
  t.heading("Ratios VB / exact");
  t.row("coefficient variance", fmt("%.5f", mr.coef_var_ratio));
  t.row("precision variance (Wishart form)", fmt("%.5f", mr.prec_var_ratio_table1), "empirical");
  t.row("precision variance (shrinkage form)", fmt("%.5f", mr.prec_var_ratio_text));
  t.row("precision mode", fmt("%.5f", mr.mode_ratio));
  t.row("predictive variance", fmt("%.5f", mr.pred_var_ratio), "leverage " + fmt("%.4g", mr.leverage));
  t.row("predictive variance (table form)", fmt("%.5f", mr.pred_var_ratio_table));
  rep.text = t.str();
  return rep;
}

DiagnosticsReport independent_report(const IndependentPrior& prior, const DesignData& data, const RowVector& x_next,
                                     const std::optional<GibbsConfig>& gibbs_cfg, const VbConfig& vb_cfg,
                                     const ReportContext& ctx) {
  const IndependentVbPosterior vb = fit_vb_independent(prior, data, vb_cfg);
  const Index M = data.M();
  const Index p = data.p();
  const auto names = variable_names(ctx, M);
  const double elbo = elbo_independent(prior, vb, data, ElboConstant::kFullDimension);
  const double elbo_printed = elbo_independent(prior, vb, data, ElboConstant::kPrinted);
  const IndependentVbPredictive pv = predictive_vb_independent(vb, x_next);
  const WishartDist q_prec = vb_precision(vb);
  const Matrix q_prec_var = q_prec.elementwise_variance();
  const Vector q_coef_var = vb.cov.diagonal();

  DiagnosticsReport rep;
  rep.converged = vb.converged;
  rep.elbo_trace = vb.elbo_trace;
  json& j = rep.json;
  j["meta"] = meta_section("independent", data, prior.dof, ctx);
  j["meta"]["vb_converged"] = vb.converged;
  j["meta"]["vb_iterations"] = vb.iterations;

  TextTable t;
  t.heading("Independent VAR  M=" + std::to_string(M) + "  p=" + std::to_string(p) + "  T=" +
            std::to_string(data.T()) + "  prior dof=" + fmt("%g", prior.dof));
  t.row("ELBO", fmt("%.6f", elbo));
  t.row("VB iterations", std::to_string(vb.iterations), vb.converged ? "converged" : "NOT converged");

  json kl_section = {{"elbo", elbo}, {"elbo_printed_constant", elbo_printed}};
  json per_variable = json::array();
  json coefficients = {{"vb_mean", matrix_to_json(linalg::unvec(vb.mean, p, M))},
                       {"vb_variance", matrix_to_json(linalg::unvec(q_coef_var, p, M))}};
  json provenance = {{"version", kVersion},
                     {"stochastic", gibbs_cfg.has_value()},
                     {"seed", nullptr},
                     {"vb", {{"max_iters", vb_cfg.max_iters},
                             {"elbo_rel_tol", vb_cfg.elbo_rel_tol},
                             {"iterations", vb.iterations},
                             {"converged", vb.converged},
                             {"elbo_constant", vb_cfg.elbo_constant == ElboConstant::kFullDimension ? "Mp/2" : "p/2"}}}};

  // Modes are cheap and deterministic; report the precision-mode ratio as well.
  json mode_section = nullptr;
  if (static_cast<double>(data.T()) + prior.dof > static_cast<double>(M) + 1.0) {
    const ModeResult mode_p = modes_exact_iterative(prior, data);
    const ModeResult mode_q = modes_vb_iterative(prior, data);
    mode_section = json::array();
    for (Index k = 0; k < M; ++k) {
      mode_section.push_back(ratio_cell(mode_q.precision(k, k), mode_p.precision(k, k), "exact"));
    }
  }

  if (gibbs_cfg) {
    const GibbsDraws draws = gibbs_run(prior, data, *gibbs_cfg);
    const DrawSummary s = summarize_draws(draws);
    Rng pred_rng = Rng(gibbs_cfg->seed).child(2);
    const GibbsPredictive pg = predictive_gibbs(draws, x_next, pred_rng);
    const RisEstimate ris = lnml_ris(draws, vb, prior, data);

    kl_section["lnml_ris"] = {{"estimate", ris.estimate},
                              {"std_error", ris.std_error},
                              {"ess_fraction", ris.ess_fraction},
                              {"degenerate", ris.degenerate}};
    kl_section["kl"] = {{"estimate", ris.estimate - elbo}, {"std_error", ris.std_error}};

    for (Index k = 0; k < M; ++k) {
      const json mean_cell = mc_ratio_cell(vb.expected_precision(k, k), s.precision_mean(k, k),
                                           s.precision_mean_se(k, k));
      const json var_cell = mc_ratio_cell(q_prec_var(k, k), s.precision_var(k, k), s.precision_var_se(k, k));
      json pv_cell = mc_ratio_cell(pv.variance(k, k), pg.variance_rb(k, k), 0.0);
      pv_cell["gibbs_sample_variance"] = pg.variance(k, k);
      pv_cell.erase("gibbs_se");
      pv_cell.erase("ratio_se");
      // Ratios of means near zero are unstable; the standardised gap is the usable check.
      json pm_cell = mc_ratio_cell(pv.mean(k), pg.mean(k), pg.mean_se(k));
      pm_cell["z"] = pg.mean_se(k) > 0.0 ? (pv.mean(k) - pg.mean(k)) / pg.mean_se(k) : 0.0;
      per_variable.push_back({
          {"variable", names[static_cast<std::size_t>(k)]},
          {"precision_mean", mean_cell},
          {"precision_variance", var_cell},
          {"predictive_mean", pm_cell},
          {"predictive_variance", pv_cell},
      });
    }
    const Vector coef_var_ratio = q_coef_var.cwiseQuotient(s.beta_var);
    coefficients["gibbs_mean"] = matrix_to_json(linalg::unvec(s.beta_mean, p, M));
    coefficients["gibbs_mean_se"] = matrix_to_json(linalg::unvec(s.beta_mean_se, p, M));
    coefficients["gibbs_variance"] = matrix_to_json(linalg::unvec(s.beta_var, p, M));
    coefficients["gibbs_variance_se"] = matrix_to_json(linalg::unvec(s.beta_var_se, p, M));
    coefficients["variance_ratio"] = matrix_to_json(linalg::unvec(coef_var_ratio, p, M));
    coefficients["variance_ratio_min"] = coef_var_ratio.minCoeff();
    coefficients["variance_ratio_max"] = coef_var_ratio.maxCoeff();

    provenance["seed"] = gibbs_cfg->seed;
    provenance["gibbs"] = {{"n_draws", gibbs_cfg->n_draws},
                           {"burn_in", gibbs_cfg->burn_in},
                           {"kept", draws.kept()},
                           {"batches", s.batches},
                           {"predictive_stream", 2}};

    t.row("lnML (reciprocal importance)", fmt("%.6f", ris.estimate), "se " + fmt("%.4f", ris.std_error));
    t.row("KL = lnML - ELBO", fmt("%.6f", ris.estimate - elbo), "se " + fmt("%.4f", ris.std_error));
    t.blank();
    t.heading("Ratios VB / Gibbs");
    for (Index k = 0; k < M; ++k) {
      const json& c = per_variable[static_cast<std::size_t>(k)];
      const std::string& nm = names[static_cast<std::size_t>(k)];
      t.row("precision mean " + nm, fmt("%.4f", c["precision_mean"]["ratio"].get<double>()),
            "se " + fmt("%.4f", c["precision_mean"]["ratio_se"].get<double>()));
      t.row("precision variance " + nm, fmt("%.4f", c["precision_variance"]["ratio"].get<double>()),
            "se " + fmt("%.4f", c["precision_variance"]["ratio_se"].get<double>()));
      t.row("predictive mean " + nm, fmt("%.4f", c["predictive_mean"]["ratio"].get<double>()),
            "z " + fmt("%.2f", c["predictive_mean"]["z"].get<double>()));
      t.row("predictive variance " + nm, fmt("%.4f", c["predictive_variance"]["ratio"].get<double>()));
    }
    t.row("coefficient variance (min..max)",
          fmt("%.4f", coef_var_ratio.minCoeff()) + ".." + fmt("%.4f", coef_var_ratio.maxCoeff()));
    rep.draws = draws;
  } else {
    for (Index k = 0; k < M; ++k) {
      per_variable.push_back({
          {"variable", names[static_cast<std::size_t>(k)]},
          {"precision_mean", {{"vb", vb.expected_precision(k, k)}}},
          {"precision_variance", {{"vb", q_prec_var(k, k)}}},
          {"predictive_mean", {{"vb", pv.mean(k)}}},
          {"predictive_variance", {{"vb", pv.variance(k, k)}}},
      });
    }
  }

  j["kl_section"] = kl_section;
  j["ratio_section"] = {{"orientation", gibbs_cfg ? "vb/gibbs" : "vb only"},
                        {"per_variable", per_variable},
                        {"coefficients", coefficients},
                        {"precision_mode_vb_over_exact", mode_section}};
  j["posterior"] = {{"coefficient_mean", matrix_to_json(linalg::unvec(vb.mean, p, M))},
                    {"vb_scale", matrix_to_json(vb.scale_q)},
                    {"vb_dof", vb.dof},
                    {"expected_precision", matrix_to_json(vb.expected_precision)},
                    {"predictive_mean", std::vector<double>(pv.mean.data(), pv.mean.data() + M)},
                    {"predictive_variance", matrix_to_json(pv.variance)},
                    {"predictive_variance_table_form", matrix_to_json(pv.variance_table_form)}};
  j["provenance"] = provenance;
  j["traceability"] = {
      {"kl_section.elbo", "elbo_independent"},
      {"kl_section.lnml_ris", "lnml_ris"},
      {"ratio_section.per_variable.precision_mean", "fit_vb_independent / summarize_draws"},
      {"ratio_section.per_variable.precision_variance", "wishart_stats / summarize_draws"},
      {"ratio_section.per_variable.predictive_mean", "predictive_vb_independent / predictive_gibbs"},
      {"ratio_section.per_variable.predictive_variance", "predictive_vb_independent / predictive_gibbs"},
      {"ratio_section.coefficients", "fit_vb_independent / summarize_draws"},
      {"ratio_section.precision_mode_vb_over_exact", "modes_vb_iterative / modes_exact_iterative"},
      {"posterior", "fit_vb_independent"},
  };
  rep.text = t.str();
  return rep;
}

DiagnosticsReport compare_report(const ConjugatePrior& conj_prior, const IndependentPrior& ind_prior,
                                 const DesignData& data, const RowVector& x_next, const GibbsConfig& gibbs_cfg,
                                 const VbConfig& vb_cfg, const ReportContext& ctx) {
  DiagnosticsReport conj = conjugate_report(conj_prior, data, x_next, ctx);
  DiagnosticsReport ind = independent_report(ind_prior, data, x_next, gibbs_cfg, vb_cfg, ctx);

  const double kl_c = conj.json["kl_section"]["kl"].get<double>();
  const double kl_i = ind.json["kl_section"]["kl"]["estimate"].get<double>();
  const double kl_i_se = ind.json["kl_section"]["kl"]["std_error"].get<double>();
  const double order_gap = std::abs(std::log10(std::abs(kl_i) / kl_c));

  DiagnosticsReport rep;
  rep.converged = ind.converged;
  rep.elbo_trace = ind.elbo_trace;
  rep.draws = std::move(ind.draws);
  json& j = rep.json;
  j["meta"] = meta_section("compare", data, conj_prior.dof, ctx);
  j["kl_section"] = {{"conjugate", kl_c},
                     {"independent", kl_i},
                     {"independent_se", kl_i_se},
                     {"ratio_independent_over_conjugate", kl_i / kl_c},
                     {"same_order_of_magnitude", order_gap < 1.0}};
  j["conjugate"] = std::move(conj.json);
  j["independent"] = std::move(ind.json);
  j["provenance"] = j["independent"]["provenance"];
  j["traceability"] = {{"kl_section.conjugate", "kl_exact"},
                       {"kl_section.independent", "lnml_ris - elbo_independent"},
                       {"conjugate", "conjugate_report"},
                       {"independent", "independent_report"}};

  std::ostringstream os;
  os << conj.text << '\n' << ind.text << '\n';
  TextTable t;
  t.heading("KL comparison");
  t.row("conjugate", fmt("%.6f", kl_c));
  t.row("independent", fmt("%.6f", kl_i), "se " + fmt("%.4f", kl_i_se));
  os << t.str();
  rep.text = os.str();
  return rep;
}

}  // namespace vbvar
