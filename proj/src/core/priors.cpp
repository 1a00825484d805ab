#include "core/priors.hpp"

#include <cmath>
#include <string>

#include "core/error.hpp"

namespace vbvar {
namespace {

void require_dof(double dof, Index M) {
  if (!(dof > static_cast<double>(M) - 1.0) || !std::isfinite(dof)) {
    throw Error(ErrorCode::kDomain, "prior dof must exceed M - 1 (M = " + std::to_string(M) + ")");
  }
}

Matrix minnesota_mean(const DesignData& data, double own_lag_mean) {
  const Index M = data.M();
  Matrix mean = Matrix::Zero(data.p(), M);
  if (own_lag_mean != 0.0) {
    for (Index j = 0; j < M; ++j) mean(1 + j, j) = own_lag_mean;
  }
  return mean;
}

double lag_scale(int lag, double decay) {
  return std::pow(static_cast<double>(lag), 2.0 * decay);
}

}  // namespace

void ConjugatePrior::validate() const {
  const Index m = M();
  if (m < 1) throw Error(ErrorCode::kDimensionMismatch, "conjugate prior: empty scale matrix");
  if (mean.rows() != p() || mean.cols() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "conjugate prior: mean must be p x M");
  }
  if (!mean.allFinite()) throw Error(ErrorCode::kInvalidArgument, "conjugate prior: mean has non-finite entries");
  linalg::require_spd(row_cov, "conjugate prior row covariance");
  linalg::require_spd(scale, "conjugate prior scale");
  require_dof(dof, m);
}

void IndependentPrior::validate() const {
  const Index m = M();
  if (m < 1) throw Error(ErrorCode::kDimensionMismatch, "independent prior: empty scale matrix");
  if (mean.size() == 0 || mean.size() % m != 0) {
    throw Error(ErrorCode::kDimensionMismatch, "independent prior: mean length must be a multiple of M");
  }
  if (cov.rows() != mean.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "independent prior: covariance must be Mp x Mp");
  }
  if (!mean.allFinite()) throw Error(ErrorCode::kInvalidArgument, "independent prior: mean has non-finite entries");
  linalg::require_spd(cov, "independent prior covariance");
  linalg::require_spd(scale, "independent prior scale");
  require_dof(dof, m);
}

void MinnesotaConfig::validate() const {
  if (!(overall_tightness > 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda1 must be positive");
  if (!(cross_tightness > 0.0 && cross_tightness <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda2 must lie in (0, 1]");
  }
  if (!(lag_decay >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda3 must be non-negative");
  if (!(intercept_scale > 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda4 must be positive");
  if (!std::isfinite(own_lag_mean)) throw Error(ErrorCode::kInvalidArgument, "own_lag_mean must be finite");
  if (dof_offset < 1) throw Error(ErrorCode::kInvalidArgument, "dof_offset must be at least 1");
}

Vector ar_residual_variances(const DesignData& data) {
  const Index T = data.T();
  const Index M = data.M();
  const int d = data.lag_order;
  if (d < 1 || data.p() != M * d + 1) {
    throw Error(ErrorCode::kDimensionMismatch, "AR pre-fit needs a VAR design with intercept and lags");
  }
  if (T < 2 * d + 2) {
    throw Error(ErrorCode::kInsufficientObservations,
                "AR(" + std::to_string(d) + ") pre-fits need at least " + std::to_string(2 * d + 2) +
                    " effective observations, got " + std::to_string(T));
  }
  Vector s2(M);
  for (Index j = 0; j < M; ++j) {
    Matrix Xj(T, d + 1);
    Xj.col(0).setOnes();
    for (int l = 1; l <= d; ++l) Xj.col(l) = data.X.col(1 + (l - 1) * M + j);
    const Vector y = data.Y.col(j);

    Eigen::ColPivHouseholderQR<Matrix> qr(Xj);
    double v = 0.0;
    if (qr.rank() == d + 1) {
      const Vector resid = y - Xj * qr.solve(y);
      v = resid.squaredNorm() / static_cast<double>(T - d - 1);
    }
    if (!(v > 0.0)) {
      const double mu = y.mean();
      v = (y.array() - mu).square().sum() / static_cast<double>(T - 1);
    }
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kDomain, "variable " + std::to_string(j + 1) + " is constant; cannot scale the prior");
    }
    s2(j) = v;
  }
  return s2;
}

ConjugatePrior minnesota_conjugate(const DesignData& data, const MinnesotaConfig& cfg) {
  cfg.validate();
  const Vector s2 = ar_residual_variances(data);
  const Index M = data.M();
  const int d = data.lag_order;
  const double l1 = cfg.overall_tightness;

  Vector diag(data.p());
  diag(0) = (l1 * cfg.intercept_scale) * (l1 * cfg.intercept_scale);
  for (int l = 1; l <= d; ++l) {
    for (Index j = 0; j < M; ++j) diag(1 + (l - 1) * M + j) = l1 * l1 / (lag_scale(l, cfg.lag_decay) * s2(j));
  }

  ConjugatePrior prior;
  prior.mean = minnesota_mean(data, cfg.own_lag_mean);
  prior.row_cov = diag.asDiagonal();
  prior.scale = s2.asDiagonal();
  prior.dof = static_cast<double>(M + cfg.dof_offset);
  prior.validate();
  return prior;
}

IndependentPrior minnesota_independent(const DesignData& data, const MinnesotaConfig& cfg) {
  cfg.validate();
  const Vector s2 = ar_residual_variances(data);
  const Index M = data.M();
  const Index p = data.p();
  const int d = data.lag_order;
  const double l1 = cfg.overall_tightness;
  const double l2 = cfg.cross_tightness;

  Vector diag(M * p);
  for (Index m = 0; m < M; ++m) {
    const Index off = m * p;
    diag(off) = s2(m) * (l1 * cfg.intercept_scale) * (l1 * cfg.intercept_scale);
    for (int l = 1; l <= d; ++l) {
      for (Index j = 0; j < M; ++j) {
        const double cross = j == m ? 1.0 : l2 * l2;
        diag(off + 1 + (l - 1) * M + j) = l1 * l1 * cross * s2(m) / (lag_scale(l, cfg.lag_decay) * s2(j));
      }
    }
  }

  IndependentPrior prior;
  prior.mean = linalg::vec(minnesota_mean(data, cfg.own_lag_mean));
  prior.cov = diag.asDiagonal();
  prior.scale = s2.asDiagonal();
  prior.dof = static_cast<double>(M + cfg.dof_offset);
  prior.validate();
  return prior;
}

}  // namespace vbvar
