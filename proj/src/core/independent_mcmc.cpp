#include "core/independent_mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <string>

#include "core/error.hpp"
#include "core/independent_model.hpp"

namespace vbvar {
namespace {

constexpr std::size_t kBatches = 20;

double log_sum_exp(const std::vector<double>& v, std::size_t skip_begin = 0, std::size_t skip_end = 0) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i >= skip_begin && i < skip_end) continue;
    mx = std::max(mx, v[i]);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i >= skip_begin && i < skip_end) continue;
    s += std::exp(v[i] - mx);
  }
  return mx + std::log(s);
}

std::size_t batch_begin(std::size_t b, std::size_t n, std::size_t batches) {
  return b * n / batches;
}

// Mean and unbiased variance of the rows in [begin, end).
void row_moments(const Matrix& x, std::size_t begin, std::size_t end, Vector& mean, Vector& var) {
  const Index n = static_cast<Index>(end - begin);
  const auto block = x.middleRows(static_cast<Index>(begin), n);
  mean = block.colwise().mean().transpose();
  if (n < 2) {
    var = Vector::Zero(x.cols());
    return;
  }
  var = (block.rowwise() - mean.transpose()).colwise().squaredNorm().transpose() / static_cast<double>(n - 1);
}

struct BatchedMoments {
  Vector mean, mean_se, var, var_se;
};

BatchedMoments batched_moments(const Matrix& x) {
  const std::size_t n = static_cast<std::size_t>(x.rows());
  const std::size_t batches = std::min(kBatches, n);
  BatchedMoments out;
  row_moments(x, 0, n, out.mean, out.var);

  Matrix bm(static_cast<Index>(batches), x.cols());
  Matrix bv(static_cast<Index>(batches), x.cols());
  for (std::size_t b = 0; b < batches; ++b) {
    Vector m, v;
    row_moments(x, batch_begin(b, n, batches), batch_begin(b + 1, n, batches), m, v);
    bm.row(static_cast<Index>(b)) = m.transpose();
    bv.row(static_cast<Index>(b)) = v.transpose();
  }
  const double nb = static_cast<double>(batches);
  auto spread = [&](const Matrix& m) -> Vector {
    if (batches < 2) return Vector::Zero(x.cols());
    const Vector c = m.colwise().mean().transpose();
    return ((m.rowwise() - c.transpose()).colwise().squaredNorm().transpose() / (nb - 1.0) / nb).cwiseSqrt();
  };
  out.mean_se = spread(bm);
  out.var_se = spread(bv);
  return out;
}

Matrix precision_rows(const GibbsDraws& d) {
  Matrix out(d.kept(), d.M * d.M);
  for (Index i = 0; i < d.kept(); ++i) {
    out.row(i) = Eigen::Map<const RowVector>(d.precision[static_cast<std::size_t>(i)].data(), d.M * d.M);
  }
  return out;
}

}  // namespace

void GibbsConfig::validate(Index M) const {
  if (n_draws < 1) throw Error(ErrorCode::kInvalidArgument, "number of Gibbs draws must be at least 1");
  if (burn_in < 0) throw Error(ErrorCode::kInvalidArgument, "burn-in must be non-negative");
  if (burn_in >= n_draws) throw Error(ErrorCode::kInvalidArgument, "burn-in must leave at least one kept draw");
  if (init_precision) {
    if (init_precision->rows() != M) throw Error(ErrorCode::kDimensionMismatch, "initial precision must be M x M");
    linalg::require_spd(*init_precision, "initial precision");
  }
}

GibbsDraws gibbs_run(const IndependentPrior& prior, const DesignData& data, const GibbsConfig& cfg) {
  prior.validate();
  if (prior.M() != data.M() || prior.p() != data.p()) {
    throw Error(ErrorCode::kDimensionMismatch, "independent prior dimensions do not match the data");
  }
  cfg.validate(data.M());
  const Index M = data.M();
  const Index n_coef = M * data.p();
  const PriorPrecision pp(prior);
  const SufficientStats stats(data);
  const double post_dof = static_cast<double>(data.T()) + prior.dof;

  GibbsDraws out;
  out.M = M;
  out.p = data.p();
  out.n_draws = cfg.n_draws;
  out.burn_in = cfg.burn_in;
  out.seed = cfg.seed;
  const int kept = std::max(0, cfg.n_draws - cfg.burn_in);
  out.beta.resize(kept, n_coef);
  out.precision.reserve(static_cast<std::size_t>(kept));

  Rng rng(cfg.seed);
  Matrix precision =
      cfg.init_precision ? *cfg.init_precision : Matrix(prior.dof * linalg::inverse_spd(prior.scale, "prior scale"));
  const Matrix identity = Matrix::Identity(M, M);
  for (int it = 0; it < cfg.n_draws; ++it) {
    try {
      const GaussianStep step = coefficient_conditional(pp, stats, precision);
      const Vector beta = step.mean + step.precision_chol.matrixU().solve(rng.normal_vector(n_coef));
      const Cholesky scale_chol =
          linalg::cholesky(prior.scale + residual_cross(data, beta), "precision conditional scale");
      // (L L')⁻¹ = F F' with F = L'⁻¹.
      const Matrix factor = scale_chol.matrixU().solve(identity);
      precision = wishart_sample_factor(factor, post_dof, rng);
      if (it >= cfg.burn_in) {
        out.beta.row(it - cfg.burn_in) = beta.transpose();
        out.precision.push_back(precision);
      }
    } catch (const Error& e) {
      throw Error(e.code(), "Gibbs iteration " + std::to_string(it) + ": " + e.what());
    }
  }
  return out;
}

DrawSummary summarize_draws(const GibbsDraws& draws) {
  if (draws.kept() < 2) throw Error(ErrorCode::kTooFewDraws, "summaries need at least 2 kept draws");
  DrawSummary s;
  s.batches = std::min<std::size_t>(kBatches, static_cast<std::size_t>(draws.kept()));
  const BatchedMoments b = batched_moments(draws.beta);
  s.beta_mean = b.mean;
  s.beta_mean_se = b.mean_se;
  s.beta_var = b.var;
  s.beta_var_se = b.var_se;

  const BatchedMoments l = batched_moments(precision_rows(draws));
  const Index M = draws.M;
  s.precision_mean = linalg::unvec(l.mean, M, M);
  s.precision_mean_se = linalg::unvec(l.mean_se, M, M);
  s.precision_var = linalg::unvec(l.var, M, M);
  s.precision_var_se = linalg::unvec(l.var_se, M, M);
  return s;
}

GibbsPredictive predictive_gibbs(const GibbsDraws& draws, const RowVector& x_next, Rng& rng) {
  if (draws.kept() < 100) throw Error(ErrorCode::kTooFewDraws, "predictive simulation needs at least 100 kept draws");
  if (x_next.size() != draws.p) throw Error(ErrorCode::kDimensionMismatch, "x_next length must equal p");
  const Index M = draws.M;
  const Index n = draws.kept();
  const Matrix z = z_block(x_next, M);

  Matrix location(n, M);
  Matrix y(n, M);
  Matrix mean_cov = Matrix::Zero(M, M);
  for (Index i = 0; i < n; ++i) {
    const Matrix& lam = draws.precision[static_cast<std::size_t>(i)];
    const Cholesky chol = linalg::cholesky(lam, "precision draw");
    const Vector loc = z * draws.beta.row(i).transpose();
    location.row(i) = loc.transpose();
    y.row(i) = (loc + chol.matrixU().solve(rng.normal_vector(M))).transpose();
    mean_cov += linalg::inverse(chol);
  }
  mean_cov /= static_cast<double>(n);

  GibbsPredictive out;
  const BatchedMoments b = batched_moments(y);
  out.mean = b.mean;
  out.mean_se = b.mean_se;
  const Matrix centred = y.rowwise() - b.mean.transpose();
  out.variance = centred.transpose() * centred / static_cast<double>(n - 1);
  const Matrix loc_centred = location.rowwise() - location.colwise().mean();
  out.variance_rb = loc_centred.transpose() * loc_centred / static_cast<double>(n - 1) + mean_cov;
  out.draws = std::move(y);
  return out;
}

RisEstimate lnml_ris(const GibbsDraws& draws, const IndependentVbPosterior& vb, const IndependentPrior& prior,
                     const DesignData& data) {
  const std::size_t n = static_cast<std::size_t>(draws.kept());
  if (n < kBatches * 2) throw Error(ErrorCode::kTooFewDraws, "reciprocal importance sampling needs >= 40 draws");
  if (vb.mean.size() != draws.beta.cols() || vb.M() != draws.M) {
    throw Error(ErrorCode::kDimensionMismatch, "VB fit does not match the draws");
  }
  const IndependentLogJoint log_joint(prior, data);
  const Cholesky cov_chol = linalg::cholesky(vb.cov, "VB coefficient covariance");
  const double n_coef = static_cast<double>(vb.mean.size());
  const double q_beta_const = -0.5 * n_coef * std::log(2.0 * std::numbers::pi) - 0.5 * linalg::log_det(cov_chol);
  const WishartDist q_prec = vb_precision(vb);

  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector beta = draws.beta.row(static_cast<Index>(i)).transpose();
    const Matrix& lam = draws.precision[i];
    const double log_q = q_beta_const - 0.5 * cov_chol.matrixL().solve(beta - vb.mean).squaredNorm() +
                         q_prec.log_pdf(lam);
    w[i] = log_q - log_joint(beta, lam);
  }

  RisEstimate r;
  const double nd = static_cast<double>(n);
  r.estimate = std::log(nd) - log_sum_exp(w);

  std::vector<double> jack(kBatches);
  double jack_mean = 0.0;
  for (std::size_t g = 0; g < kBatches; ++g) {
    const std::size_t b0 = batch_begin(g, n, kBatches);
    const std::size_t b1 = batch_begin(g + 1, n, kBatches);
    jack[g] = std::log(static_cast<double>(n - (b1 - b0))) - log_sum_exp(w, b0, b1);
    jack_mean += jack[g];
  }
  jack_mean /= static_cast<double>(kBatches);
  double ss = 0.0;
  for (double j : jack) ss += (j - jack_mean) * (j - jack_mean);
  const double g = static_cast<double>(kBatches);
  r.std_error = std::sqrt((g - 1.0) / g * ss);

  std::vector<double> w2(n);
  for (std::size_t i = 0; i < n; ++i) w2[i] = 2.0 * w[i];
  r.ess = std::exp(2.0 * log_sum_exp(w) - log_sum_exp(w2));
  r.ess_fraction = r.ess / nd;
  r.degenerate = r.ess_fraction < 0.05;
  return r;
}

void write_draws_csv(const GibbsDraws& draws, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  const Index M = draws.M;
  const Index p = draws.p;
  for (Index m = 0; m < M; ++m) {
    for (Index j = 0; j < p; ++j) out << (m == 0 && j == 0 ? "" : ",") << "beta_" << m + 1 << "_" << j;
  }
  for (Index j = 0; j < M; ++j) {
    for (Index i = 0; i <= j; ++i) out << ",prec_" << i + 1 << "_" << j + 1;
  }
  out << '\n' << std::setprecision(17);
  for (Index r = 0; r < draws.kept(); ++r) {
    for (Index c = 0; c < draws.beta.cols(); ++c) out << (c == 0 ? "" : ",") << draws.beta(r, c);
    const Matrix& lam = draws.precision[static_cast<std::size_t>(r)];
    for (Index j = 0; j < M; ++j) {
      for (Index i = 0; i <= j; ++i) out << ',' << lam(i, j);
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "failed while writing '" + path.string() + "'");
}

}  // namespace vbvar
