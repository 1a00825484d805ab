// Command-line front end: fit, kl, compare, simulate.
// Exit status: 0 success, 1 input error, 2 VB did not converge (report still written).

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "vbvar/vbvar.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNotConverged = 2;

struct RunConfig {
  std::string data;
  int lags = 4;
  std::string prior = "conjugate";
  std::string method = "vb";
  std::optional<std::uint64_t> seed;
  std::string out;
  int draws = 35000;
  int burn_in = 5000;
  int max_iters = 500;
  double tol = 1e-9;
  bool timestamps = false;
  bool printed_elbo_constant = false;
  std::string export_draws;
  std::string export_elbo_trace;
  vbvar_minnesota_config minnesota{};
};

// Flag values, applied over the config file only when given on the command line.
struct Flags {
  std::string config;
  RunConfig cli;
};

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class T>
void take(const nlohmann::json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config key '") + key + "': " + e.what());
  }
}

void apply_config_file(const std::string& path, RunConfig& rc) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw InputError("config file '" + path + "' must hold a JSON object");
  take(j, "data", rc.data);
  take(j, "lags", rc.lags);
  take(j, "prior", rc.prior);
  take(j, "method", rc.method);
  if (j.contains("seed")) {
    std::uint64_t s = 0;
    take(j, "seed", s);
    rc.seed = s;
  }
  take(j, "out", rc.out);
  take(j, "draws", rc.draws);
  take(j, "burn_in", rc.burn_in);
  take(j, "max_iters", rc.max_iters);
  take(j, "tol", rc.tol);
  take(j, "timestamps", rc.timestamps);
  take(j, "export_draws", rc.export_draws);
  take(j, "export_elbo_trace", rc.export_elbo_trace);
  take(j, "printed_elbo_constant", rc.printed_elbo_constant);
  take(j, "lambda1", rc.minnesota.lambda1);
  take(j, "lambda2", rc.minnesota.lambda2);
  take(j, "lambda3", rc.minnesota.lambda3);
  take(j, "lambda4", rc.minnesota.lambda4);
  take(j, "own_lag_mean", rc.minnesota.own_lag_mean);
  take(j, "dof_offset", rc.minnesota.dof_offset);
}

struct Options {
  CLI::Option* data = nullptr;
  CLI::Option* lags = nullptr;
  CLI::Option* prior = nullptr;
  CLI::Option* method = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* draws = nullptr;
  CLI::Option* burn_in = nullptr;
  CLI::Option* max_iters = nullptr;
  CLI::Option* tol = nullptr;
  CLI::Option* timestamps = nullptr;
  CLI::Option* export_draws = nullptr;
  CLI::Option* export_elbo_trace = nullptr;
  CLI::Option* printed_elbo_constant = nullptr;
};

std::uint64_t g_seed_flag = 0;

Options add_run_options(CLI::App* sub, Flags& f, bool with_model_choice) {
  Options o;
  sub->add_option("--config", f.config, "JSON config file with flat keys; flags override it");
  o.data = sub->add_option("--data", f.cli.data, "CSV file, first row variable names");
  o.lags = sub->add_option("--lags", f.cli.lags, "lag order d")->check(CLI::PositiveNumber);
  if (with_model_choice) {
    o.prior = sub->add_option("--prior", f.cli.prior, "conjugate | independent")
                  ->check(CLI::IsMember({"conjugate", "independent"}));
    o.method = sub->add_option("--method", f.cli.method, "exact | vb | gibbs")
                   ->check(CLI::IsMember({"exact", "vb", "gibbs"}));
  }
  o.seed = sub->add_option("--seed", g_seed_flag, "seed for every stochastic step");
  o.out = sub->add_option("--out", f.cli.out, "report JSON path (default: JSON on stdout)");
  o.draws = sub->add_option("--draws", f.cli.draws, "Gibbs iterations including burn-in")->check(CLI::PositiveNumber);
  o.burn_in = sub->add_option("--burn-in", f.cli.burn_in, "discarded Gibbs iterations")->check(CLI::NonNegativeNumber);
  o.max_iters = sub->add_option("--max-iters", f.cli.max_iters, "VB iteration cap")->check(CLI::PositiveNumber);
  o.tol = sub->add_option("--tol", f.cli.tol, "relative ELBO tolerance")->check(CLI::PositiveNumber);
  o.timestamps = sub->add_flag("--timestamps", f.cli.timestamps, "first CSV column holds timestamps");
  o.export_draws = sub->add_option("--export-draws", f.cli.export_draws, "write Gibbs draws to this CSV");
  o.export_elbo_trace = sub->add_option("--export-elbo-trace", f.cli.export_elbo_trace, "write the ELBO trace CSV");
  o.printed_elbo_constant = sub->add_flag("--printed-elbo-constant", f.cli.printed_elbo_constant,
                                          "independent ELBO with leading constant p/2 instead of Mp/2");
  return o;
}

RunConfig resolve(const Flags& f, const Options& o) {
  RunConfig rc;
  vbvar_minnesota_default(&rc.minnesota);
  if (!f.config.empty()) apply_config_file(f.config, rc);
  auto given = [](CLI::Option* opt) { return opt && opt->count() > 0; };
  if (given(o.data)) rc.data = f.cli.data;
  if (given(o.lags)) rc.lags = f.cli.lags;
  if (given(o.prior)) rc.prior = f.cli.prior;
  if (given(o.method)) rc.method = f.cli.method;
  if (given(o.seed)) rc.seed = g_seed_flag;
  if (given(o.out)) rc.out = f.cli.out;
  if (given(o.draws)) rc.draws = f.cli.draws;
  if (given(o.burn_in)) rc.burn_in = f.cli.burn_in;
  if (given(o.max_iters)) rc.max_iters = f.cli.max_iters;
  if (given(o.tol)) rc.tol = f.cli.tol;
  if (given(o.timestamps)) rc.timestamps = f.cli.timestamps;
  if (given(o.export_draws)) rc.export_draws = f.cli.export_draws;
  if (given(o.export_elbo_trace)) rc.export_elbo_trace = f.cli.export_elbo_trace;
  if (given(o.printed_elbo_constant)) rc.printed_elbo_constant = f.cli.printed_elbo_constant;
  if (rc.data.empty()) throw InputError("no data file given (--data or config key 'data')");
  return rc;
}

// Maps a failing library call to an input error carrying the library's message.
void check(vbvar_status st) {
  if (st != VBVAR_OK) throw InputError(std::string(vbvar_status_string(st)) + ": " + vbvar_last_error());
}

struct Handles {
  vbvar_series* series = nullptr;
  vbvar_design* design = nullptr;
  vbvar_report* report = nullptr;
  ~Handles() {
    vbvar_report_free(report);
    vbvar_design_free(design);
    vbvar_series_free(series);
  }
};

int finish(const RunConfig& rc, Handles& h, bool quiet) {
  if (!rc.out.empty()) {
    check(vbvar_report_write_json(h.report, rc.out.c_str()));
    if (!quiet) std::cout << vbvar_report_text(h.report);
  } else {
    std::cout << vbvar_report_json(h.report) << '\n';
  }
  if (!rc.export_draws.empty()) check(vbvar_report_write_draws_csv(h.report, rc.export_draws.c_str()));
  if (!rc.export_elbo_trace.empty()) check(vbvar_report_write_elbo_trace_csv(h.report, rc.export_elbo_trace.c_str()));
  if (!vbvar_report_converged(h.report)) {
    std::cerr << "warning: variational iterations did not converge within " << rc.max_iters << " iterations\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

void load(const RunConfig& rc, Handles& h) {
  check(vbvar_series_load_csv(rc.data.c_str(), rc.timestamps ? 1 : 0, &h.series));
  check(vbvar_design_build(h.series, rc.lags, &h.design));
}

vbvar_vb_config vb_config(const RunConfig& rc) {
  vbvar_vb_config vb;
  vbvar_vb_default(&vb);
  vb.max_iters = rc.max_iters;
  vb.elbo_rel_tol = rc.tol;
  vb.printed_elbo_constant = rc.printed_elbo_constant ? 1 : 0;
  return vb;
}

vbvar_gibbs_config gibbs_config(const RunConfig& rc) {
  vbvar_gibbs_config g;
  vbvar_gibbs_default(&g);
  g.n_draws = rc.draws;
  g.burn_in = rc.burn_in;
  g.seed = *rc.seed;
  return g;
}

int cmd_fit(const RunConfig& rc, bool quiet) {
  if (rc.prior != "conjugate" && rc.prior != "independent") throw InputError("unknown prior '" + rc.prior + "'");
  if (rc.method != "exact" && rc.method != "vb" && rc.method != "gibbs") {
    throw InputError("unknown method '" + rc.method + "'");
  }
  if (rc.method == "exact" && rc.prior != "conjugate") {
    throw InputError("method 'exact' is only available with the conjugate prior");
  }
  if (rc.method == "gibbs" && rc.prior != "independent") {
    throw InputError("method 'gibbs' is only available with the independent prior");
  }
  if (rc.method == "gibbs" && !rc.seed) throw InputError("method 'gibbs' requires --seed");
  if (!rc.export_draws.empty() && rc.method != "gibbs") throw InputError("--export-draws needs method 'gibbs'");
  if (!rc.export_elbo_trace.empty() && rc.prior != "independent") {
    throw InputError("--export-elbo-trace needs the independent prior");
  }

  Handles h;
  load(rc, h);
  if (rc.prior == "conjugate") {
    check(vbvar_report_conjugate(h.design, &rc.minnesota, &h.report));
  } else {
    const vbvar_vb_config vb = vb_config(rc);
    if (rc.method == "gibbs") {
      const vbvar_gibbs_config g = gibbs_config(rc);
      check(vbvar_report_independent(h.design, &rc.minnesota, &g, &vb, &h.report));
    } else {
      check(vbvar_report_independent(h.design, &rc.minnesota, nullptr, &vb, &h.report));
    }
  }
  return finish(rc, h, quiet);
}

int cmd_compare(const RunConfig& rc, bool quiet) {
  if (!rc.seed) throw InputError("compare requires --seed");
  Handles h;
  load(rc, h);
  const vbvar_vb_config vb = vb_config(rc);
  const vbvar_gibbs_config g = gibbs_config(rc);
  check(vbvar_report_compare(h.design, &rc.minnesota, &g, &vb, &h.report));
  return finish(rc, h, quiet);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian VAR estimation with exact, variational and Gibbs posteriors"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress the text summary");
  app.fallthrough();

  Flags fit_flags;
  CLI::App* fit = app.add_subcommand("fit", "fit one model and write a diagnostics report");
  const Options fit_opts = add_run_options(fit, fit_flags, true);

  Flags cmp_flags;
  CLI::App* compare = app.add_subcommand("compare", "exact, VB and Gibbs comparison on one dataset");
  const Options cmp_opts = add_run_options(compare, cmp_flags, false);

  int kl_M = 0, kl_p = 0, kl_T = 0;
  double kl_nu0 = 0;
  CLI::App* kl = app.add_subcommand("kl", "exact and Stirling KL for the conjugate VAR");
  kl->add_option("--M", kl_M, "number of equations")->required();
  kl->add_option("--p", kl_p, "regressors per equation")->required();
  kl->add_option("--T", kl_T, "effective sample size")->required();
  kl->add_option("--nu0", kl_nu0, "prior degrees of freedom")->required();

  vbvar_simulation_config sim;
  vbvar_simulation_default(&sim);
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  CLI::App* simulate = app.add_subcommand("simulate", "write a synthetic stationary VAR series to CSV");
  simulate->add_option("--M", sim.M, "number of variables")->check(CLI::PositiveNumber);
  simulate->add_option("--lags", sim.lags, "true lag order")->check(CLI::PositiveNumber);
  simulate->add_option("--T", sim.T_raw, "number of rows")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim_seed, "generator seed")->required();
  simulate->add_option("--out", sim_out, "CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*fit) return cmd_fit(resolve(fit_flags, fit_opts), quiet);
    if (*compare) return cmd_compare(resolve(cmp_flags, cmp_opts), quiet);
    if (*kl) {
      double exact = 0, stirling = 0;
      check(vbvar_kl_exact(kl_M, kl_p, kl_T, kl_nu0, &exact));
      check(vbvar_kl_stirling(kl_M, kl_p, kl_T, kl_nu0, &stirling));
      std::printf("kl_exact    %.6f\nkl_stirling %.6f\n", exact, stirling);
      return kExitOk;
    }
    if (*simulate) {
      vbvar_series* s = nullptr;
      check(vbvar_series_simulate(&sim, sim_seed, &s));
      const vbvar_status st = vbvar_series_write_csv(s, sim_out.c_str());
      vbvar_series_free(s);
      check(st);
      return kExitOk;
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
