#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "core/linalg.hpp"
#include "core/rng.hpp"

namespace vbvar {

struct RawSeries {
  Matrix values;  // T_raw × M, rows in time order
  std::vector<std::string> names;
  std::vector<std::string> timestamps;  // empty unless parsed

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
};

struct CsvOptions {
  bool has_timestamps = false;  // first column holds labels, not data
};

RawSeries parse_csv(std::istream& in, const CsvOptions& options, std::string_view source = "<stream>");
RawSeries load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
// Writes timestamps as the first column when present; full double precision.
void write_csv(const RawSeries& series, const std::filesystem::path& path);

/// Y = XΓ + E for a VAR(d) with intercept. Row t of X is (1, y'_{t-1}, …, y'_{t-d}).
struct DesignData {
  Matrix Y;            // T × M
  Matrix X;            // T × p, p = M d + 1
  int lag_order = 0;
  RowVector x_next;    // regressor row for the first out-of-sample period (1 × p)

  Index T() const { return Y.rows(); }
  Index M() const { return Y.cols(); }
  Index p() const { return X.cols(); }
};

DesignData build_design(const RawSeries& series, int lags);

/// Validating constructor for arbitrary regressors (e.g. intercept-only toys).
/// An empty x_next defaults to a row of zeros with a leading one.
DesignData make_design(Matrix Y, Matrix X, int lag_order, RowVector x_next = RowVector());

/// Z_t = I_M ⊗ x_t (M × Mp), so Z_t vec(Γ) = (x_t Γ)'.
Matrix z_block(const RowVector& x_row, Index M);

struct SyntheticVarSpec {
  int M = 3;
  int lags = 1;
  int T_raw = 200;
  int burn_in = 100;
  double own_lag = 0.5;     // first own-lag coefficient; later lags decay geometrically
  double cross_sd = 0.05;   // sd of cross-variable coefficients (divided by M)
  double intercept_sd = 0.2;
  double noise_scale = 1.0;
};

/// Draws a stationary Gaussian VAR(d) path; used for demos and tests.
RawSeries simulate_var(const SyntheticVarSpec& spec, Rng& rng);

}  // namespace vbvar
