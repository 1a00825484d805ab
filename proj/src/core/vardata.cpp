#include "core/vardata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <sstream>

#include "core/error.hpp"

namespace vbvar {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

bool is_missing_token(std::string_view s) {
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == "null";
}

std::string location(std::string_view source, std::size_t line_no, std::size_t col, const std::string& name) {
  std::ostringstream os;
  os << source << ": row " << line_no << ", column " << col + 1 << " (" << name << ")";
  return os.str();
}

}  // namespace

RawSeries parse_csv(std::istream& in, const CsvOptions& options, std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string_view> fields;

  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      have_header = true;
      break;
    }
  }
  if (!have_header) throw Error(ErrorCode::kEmptyData, std::string(source) + ": file is empty");

  RawSeries series;
  fields = split_fields(line);
  const std::size_t first_data = options.has_timestamps ? 1 : 0;
  if (fields.size() <= first_data) {
    throw Error(ErrorCode::kParse, std::string(source) + ": header row has no variable columns");
  }
  for (std::size_t c = first_data; c < fields.size(); ++c) {
    std::string name = unquote(fields[c]);
    if (name.empty()) name = "y" + std::to_string(c + 1 - first_data);
    series.names.push_back(std::move(name));
  }
  const std::size_t n_vars = series.names.size();

  std::vector<double> values;
  std::size_t n_rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    fields = split_fields(line);
    if (fields.size() != n_vars + first_data) {
      std::ostringstream os;
      os << source << ": row " << line_no << " has " << fields.size() << " fields, expected "
         << n_vars + first_data;
      throw Error(ErrorCode::kParse, os.str());
    }
    if (options.has_timestamps) series.timestamps.push_back(unquote(fields[0]));
    for (std::size_t c = 0; c < n_vars; ++c) {
      const std::string_view cell = fields[c + first_data];
      if (is_missing_token(cell)) {
        throw Error(ErrorCode::kMissingValue,
                    "missing value at " + location(source, line_no, c + first_data, series.names[c]));
      }
      double v = 0.0;
      const char* end = cell.data() + cell.size();
      const char* begin = cell.data();
      if (*begin == '+') ++begin;
      const auto res = std::from_chars(begin, end, v);
      if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
        throw Error(ErrorCode::kParse, "non-numeric value '" + std::string(cell) + "' at " +
                                           location(source, line_no, c + first_data, series.names[c]));
      }
      values.push_back(v);
    }
    ++n_rows;
  }
  if (n_rows == 0) throw Error(ErrorCode::kEmptyData, std::string(source) + ": no data rows after the header");

  series.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Index>(n_rows), static_cast<Index>(n_vars));
  return series;
}

RawSeries load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open data file '" + path.string() + "'");
  return parse_csv(in, options, path.string());
}

void write_csv(const RawSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  const bool stamps = series.timestamps.size() == static_cast<std::size_t>(series.rows()) && series.rows() > 0;
  if (stamps) out << "date,";
  for (std::size_t j = 0; j < series.names.size(); ++j) out << (j ? "," : "") << series.names[j];
  out << '\n' << std::setprecision(17);
  for (Index i = 0; i < series.rows(); ++i) {
    if (stamps) out << series.timestamps[static_cast<std::size_t>(i)] << ',';
    for (Index j = 0; j < series.cols(); ++j) out << (j ? "," : "") << series.values(i, j);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "failed while writing '" + path.string() + "'");
}

DesignData build_design(const RawSeries& series, int lags) {
  if (lags < 1) throw Error(ErrorCode::kInvalidArgument, "lag order must be at least 1");
  const Index m = series.cols();
  const Index t_raw = series.rows();
  if (m < 1) throw Error(ErrorCode::kEmptyData, "series has no variables");
  if (!series.values.allFinite()) throw Error(ErrorCode::kMissingValue, "series contains non-finite values");
  if (t_raw <= lags) {
    throw Error(ErrorCode::kInsufficientObservations,
                "need more than " + std::to_string(lags) + " observations for " + std::to_string(lags) +
                    " lags, got " + std::to_string(t_raw));
  }
  const Index t = t_raw - lags;
  const Index p = m * lags + 1;

  DesignData d;
  d.lag_order = lags;
  d.Y = series.values.bottomRows(t);
  d.X.resize(t, p);
  d.X.col(0).setOnes();
  for (int l = 1; l <= lags; ++l) {
    d.X.block(0, 1 + (l - 1) * m, t, m) = series.values.middleRows(lags - l, t);
  }
  d.x_next.resize(p);
  d.x_next(0) = 1.0;
  for (int l = 1; l <= lags; ++l) {
    d.x_next.segment(1 + (l - 1) * m, m) = series.values.row(t_raw - l);
  }
  return d;
}

DesignData make_design(Matrix Y, Matrix X, int lag_order, RowVector x_next) {
  if (Y.rows() != X.rows()) throw Error(ErrorCode::kDimensionMismatch, "Y and X must have the same number of rows");
  if (Y.cols() < 1 || X.cols() < 1) throw Error(ErrorCode::kDimensionMismatch, "Y and X need at least one column");
  if (!Y.allFinite() || !X.allFinite()) throw Error(ErrorCode::kInvalidArgument, "design contains non-finite values");
  if (x_next.size() == 0) {
    x_next = RowVector::Zero(X.cols());
    x_next(0) = 1.0;
  }
  if (x_next.size() != X.cols()) throw Error(ErrorCode::kDimensionMismatch, "x_next length must equal p");
  DesignData d;
  d.Y = std::move(Y);
  d.X = std::move(X);
  d.lag_order = lag_order;
  d.x_next = std::move(x_next);
  return d;
}

Matrix z_block(const RowVector& x_row, Index M) {
  const Index p = x_row.size();
  Matrix z = Matrix::Zero(M, M * p);
  for (Index m = 0; m < M; ++m) z.block(m, m * p, 1, p) = x_row;
  return z;
}

RawSeries simulate_var(const SyntheticVarSpec& spec, Rng& rng) {
  if (spec.M < 1 || spec.lags < 1 || spec.T_raw < 1 || spec.burn_in < 0) {
    throw Error(ErrorCode::kInvalidArgument, "simulate_var: invalid specification");
  }
  const Index m = spec.M;
  const int d = spec.lags;

  std::vector<Matrix> lag_coef(static_cast<std::size_t>(d));
  for (int l = 0; l < d; ++l) {
    Matrix a = rng.normal_matrix(m, m) * (spec.cross_sd / std::sqrt(static_cast<double>(m)));
    a.diagonal().setConstant(spec.own_lag * std::pow(0.5, l));
    lag_coef[static_cast<std::size_t>(l)] = a;
  }
  // Shrink towards stationarity if the companion matrix is explosive.
  Matrix companion = Matrix::Zero(m * d, m * d);
  for (int l = 0; l < d; ++l) companion.block(0, l * m, m, m) = lag_coef[static_cast<std::size_t>(l)];
  if (d > 1) companion.block(m, 0, m * (d - 1), m * (d - 1)).setIdentity();
  const double radius = Eigen::EigenSolver<Matrix>(companion, false).eigenvalues().cwiseAbs().maxCoeff();
  if (radius > 0.9) {
    const double shrink = 0.9 / radius;
    for (int l = 0; l < d; ++l) lag_coef[static_cast<std::size_t>(l)] *= std::pow(shrink, l + 1);
  }

  const Vector intercept = rng.normal_vector(m) * spec.intercept_sd;
  const Matrix b = rng.normal_matrix(m, m);
  const Matrix sigma = spec.noise_scale * spec.noise_scale *
                       (0.5 * Matrix::Identity(m, m) + 0.5 * b * b.transpose() / static_cast<double>(m));
  const Cholesky chol = linalg::cholesky(sigma, "synthetic noise covariance");

  const Index total = spec.burn_in + spec.T_raw + d;
  Matrix y = Matrix::Zero(total, m);
  for (Index t = d; t < total; ++t) {
    Vector mean = intercept;
    for (int l = 0; l < d; ++l) mean += lag_coef[static_cast<std::size_t>(l)] * y.row(t - 1 - l).transpose();
    y.row(t) = (mean + chol.matrixL() * rng.normal_vector(m)).transpose();
  }

  RawSeries series;
  series.values = y.bottomRows(spec.T_raw);
  for (Index j = 0; j < m; ++j) series.names.push_back("y" + std::to_string(j + 1));
  return series;
}

}  // namespace vbvar
