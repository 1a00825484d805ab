#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "core/error.hpp"
#include "core/independent_model.hpp"
#include "core/vardata.hpp"
#include "support/test_support.hpp"

using namespace vbvar;
using vbvar::testing::random_spd;

namespace {

ErrorCode parse_error(const std::string& text, bool timestamps = false, std::string* message = nullptr) {
  std::istringstream in(text);
  try {
    parse_csv(in, CsvOptions{timestamps});
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  FAIL("expected a parse failure");
  return ErrorCode::kInvalidArgument;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("vbvar_vardata_" + name);
}

}  // namespace

TEST_SUITE("vardata") {

TEST_CASE("csv file shape") {
  const auto path = temp_file("shape.csv");
  {
    std::ofstream out(path);
    out << "gdp,infl,rate\n";
    for (int t = 0; t < 200; ++t) out << t * 0.1 << ',' << -t << ',' << 1.5 << '\n';
  }
  const RawSeries s = load_csv(path);
  CHECK(s.cols() == 3);
  CHECK(s.rows() == 200);
  CHECK(s.names == std::vector<std::string>{"gdp", "infl", "rate"});
  CHECK(s.values(199, 1) == doctest::Approx(-199.0));
  std::filesystem::remove(path);
}

TEST_CASE("csv blank cell names the cell") {
  std::string msg;
  CHECK(parse_error("a,b\n1,2\n3,\n", false, &msg) == ErrorCode::kMissingValue);
  CHECK(msg.find("row 3") != std::string::npos);
  CHECK(msg.find("column 2") != std::string::npos);
  CHECK(msg.find("(b)") != std::string::npos);
  CHECK(parse_error("a,b\n1,NA\n") == ErrorCode::kMissingValue);
}

TEST_CASE("csv header only and empty input") {
  CHECK(parse_error("a,b,c\n") == ErrorCode::kEmptyData);
  CHECK(parse_error("") == ErrorCode::kEmptyData);
}

TEST_CASE("csv non-numeric cell and ragged rows") {
  std::string msg;
  CHECK(parse_error("a,b\n1,2\n3,x7\n", false, &msg) == ErrorCode::kParse);
  CHECK(msg.find("row 3") != std::string::npos);
  CHECK(parse_error("a,b\n1,2,3\n") == ErrorCode::kParse);
}

TEST_CASE("csv timestamps column") {
  std::istringstream in("date,x,y\n2001Q1,1,2\n2001Q2,3,4\n");
  const RawSeries s = parse_csv(in, CsvOptions{true});
  CHECK(s.cols() == 2);
  CHECK(s.timestamps == std::vector<std::string>{"2001Q1", "2001Q2"});
  CHECK(s.names == std::vector<std::string>{"x", "y"});
  CHECK(s.values(1, 0) == 3.0);
}

TEST_CASE("csv missing file") {
  try {
    load_csv("/nonexistent/dir/data.csv");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
    CHECK(std::string(e.what()).find("/nonexistent/dir/data.csv") != std::string::npos);
  }
}

TEST_CASE("csv write and reload round trip") {
  Rng rng(4);
  SyntheticVarSpec spec;
  spec.M = 2;
  spec.T_raw = 30;
  RawSeries s = simulate_var(spec, rng);
  const auto path = temp_file("roundtrip.csv");
  write_csv(s, path);
  const RawSeries r = load_csv(path);
  CHECK(r.names == s.names);
  CHECK((r.values - s.values).norm() == 0.0);

  s.timestamps.clear();
  for (Index t = 0; t < s.rows(); ++t) s.timestamps.push_back("t" + std::to_string(t));
  write_csv(s, path);
  const RawSeries u = load_csv(path, CsvOptions{true});
  CHECK(u.timestamps == s.timestamps);
  CHECK((u.values - s.values).norm() == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("design for two variables and one lag") {
  RawSeries s;
  s.values.resize(4, 2);
  s.values << 1, 10, 2, 20, 3, 30, 4, 40;
  s.names = {"a", "b"};
  const DesignData d = build_design(s, 1);
  CHECK(d.T() == 3);
  CHECK(d.p() == 3);
  CHECK(d.Y.row(0) == s.values.row(1));
  CHECK(d.Y.row(2) == s.values.row(3));
  RowVector x0(3);
  x0 << 1, 1, 10;
  CHECK(d.X.row(0) == x0);
  RowVector xn(3);
  xn << 1, 4, 40;
  CHECK(d.x_next == xn);
}

TEST_CASE("design row layout with several lags") {
  const DesignData d = vbvar::testing::synthetic_design(3, 4, 200, 12);
  CHECK(d.T() == 196);
  CHECK(d.p() == 13);
  CHECK(d.X.col(0).isOnes());
  // Row t holds (1, y_{t-1}, ..., y_{t-4}); y_{t-1} of row t+1 is y_t of row t.
  for (Index t = 0; t + 1 < d.T(); ++t) {
    CHECK(d.X.block(t + 1, 1, 1, 3) == d.Y.row(t));
    CHECK(d.X.block(t + 1, 4, 1, 9) == d.X.block(t, 1, 1, 9));
  }
  CHECK(d.x_next.segment(1, 3) == d.Y.row(d.T() - 1));
}

TEST_CASE("design needs more rows than lags") {
  RawSeries s;
  s.values = Matrix::Ones(3, 2);
  s.names = {"a", "b"};
  try {
    build_design(s, 3);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInsufficientObservations);
  }
  CHECK_THROWS_AS(build_design(s, 0), Error);
}

TEST_CASE("z block structure") {
  RowVector x(3);
  x << 1.0, 2.0, 3.0;
  CHECK(z_block(x, 1) == Matrix(x));
  RowVector y(2);
  y << 5.0, 6.0;
  Matrix expected(2, 4);
  expected << 5, 6, 0, 0, 0, 0, 5, 6;
  CHECK(z_block(y, 2) == expected);
}

TEST_CASE("z block reproduces the matrix form") {
  Rng rng(7);
  const Index M = 3, p = 4;
  const Matrix X = rng.normal_matrix(10, p);
  const Matrix G = rng.normal_matrix(p, M);
  const Vector beta = linalg::vec(G);
  for (Index t = 0; t < X.rows(); ++t) {
    const Vector lhs = (X.row(t) * G).transpose();
    CHECK((z_block(X.row(t), M) * beta - lhs).norm() < 1e-12);
  }
}

TEST_CASE("noise-free data is reproduced exactly") {
  Rng rng(9);
  const Index M = 2, p = 5;
  const Matrix X = rng.normal_matrix(40, p);
  const Matrix G = rng.normal_matrix(p, M);
  const DesignData d = make_design(X * G, X, 2);
  CHECK((d.Y - d.X * G).norm() < 1e-13);
  CHECK(residual_cross(d, linalg::vec(G)).norm() < 1e-24 + 1e-13);
}

TEST_CASE("stacked sums equal the Kronecker forms") {
  Rng rng(10);
  for (Index M = 1; M <= 4; ++M) {
    for (Index p = 1; p <= 4; ++p) {
      const Matrix X = rng.normal_matrix(15, p);
      const Matrix Y = rng.normal_matrix(15, M);
      const Matrix A = random_spd(M, rng);
      const Matrix V = random_spd(M * p, rng);
      Matrix gram = Matrix::Zero(M * p, M * p);
      Vector cross = Vector::Zero(M * p);
      Matrix quad = Matrix::Zero(M, M);
      for (Index t = 0; t < X.rows(); ++t) {
        const Matrix Z = z_block(X.row(t), M);
        gram += Z.transpose() * A * Z;
        cross += Z.transpose() * A * Y.row(t).transpose();
        quad += Z * V * Z.transpose();
      }
      const Matrix XtX = X.transpose() * X;
      CHECK((stacked_gram(A, XtX) - gram).norm() <= 1e-10 * gram.norm());
      CHECK((stacked_gram(A, XtX) - linalg::kron(A, XtX)).norm() <= 1e-10 * gram.norm());
      CHECK((stacked_cross(A, X.transpose() * Y) - cross).norm() <= 1e-10 * cross.norm());
      CHECK((stacked_quadratic(V, XtX, M) - quad).norm() <= 1e-10 * quad.norm());
    }
  }
}

TEST_CASE("simulated series are reproducible and finite") {
  SyntheticVarSpec spec;
  spec.M = 4;
  spec.lags = 2;
  spec.T_raw = 150;
  Rng a(3), b(3);
  const RawSeries x = simulate_var(spec, a);
  const RawSeries y = simulate_var(spec, b);
  CHECK(x.values == y.values);
  CHECK(x.rows() == 150);
  CHECK(x.values.allFinite());
  CHECK(x.names.front() == "y1");
}

}  // TEST_SUITE
