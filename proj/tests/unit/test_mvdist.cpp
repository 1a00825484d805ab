#include <doctest.h>

#include <cmath>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "core/error.hpp"
#include "core/mvdist.hpp"
#include "support/test_support.hpp"

using namespace vbvar;
using vbvar::testing::random_spd;
using vbvar::testing::sample_moments;
using vbvar::testing::within_se;

namespace {

constexpr double kLn2Pi = 1.8378770664093454836;

double mvn_log_pdf(const Vector& x, const Vector& mean, const Matrix& cov) {
  const Cholesky llt = linalg::cholesky(cov, "cov");
  const double q = static_cast<double>(x.size());
  return -0.5 * q * kLn2Pi - 0.5 * linalg::log_det(llt) - 0.5 * llt.matrixL().solve(x - mean).squaredNorm();
}

}  // namespace

TEST_SUITE("mvdist") {

TEST_CASE("multivariate log gamma values") {
  CHECK(mv_log_gamma(1, 1.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(mv_log_gamma(1, 0.5) == doctest::Approx(0.5723649429247001).epsilon(1e-12));
  CHECK(mv_log_gamma(2, 1.5) == doctest::Approx(0.4515827052894549).epsilon(1e-12));
}

TEST_CASE("multivariate log gamma domain") {
  CHECK_THROWS_AS(mv_log_gamma(2, 0.5), Error);
  CHECK_THROWS_AS(mv_log_gamma(0, 3.0), Error);
  try {
    mv_log_gamma(3, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDomain);
  }
}

TEST_CASE("multivariate log gamma recurrence") {
  const double ln_pi = std::log(M_PI);
  for (int M = 2; M <= 25; ++M) {
    for (double a : {12.5, 30.0, 101.25}) {
      const double lhs = mv_log_gamma(M, a);
      const double rhs = 0.5 * (M - 1) * ln_pi + std::lgamma(a) + mv_log_gamma(M - 1, a - 0.5);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST_CASE("multivariate digamma is the derivative of log gamma") {
  const double h = 1e-5;
  for (int M : {1, 3, 7}) {
    const double a = 9.3;
    const double fd = (mv_log_gamma(M, a + h) - mv_log_gamma(M, a - h)) / (2 * h);
    CHECK(mv_digamma(M, a) == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("wishart closed-form moments") {
  const WishartStats s = wishart_stats(WishartDist(Matrix::Constant(1, 1, 2.0), 3.0));
  CHECK(s.mean(0, 0) == doctest::Approx(6.0));
  CHECK(s.variance(0, 0) == doctest::Approx(24.0));
  REQUIRE(s.mode.has_value());
  CHECK((*s.mode)(0, 0) == doctest::Approx(2.0));
  CHECK_FALSE(wishart_stats(WishartDist(Matrix::Constant(1, 1, 2.0), 2.0)).mode.has_value());

  const WishartStats t = wishart_stats(WishartDist(Matrix::Identity(2, 2), 4.0));
  REQUIRE(t.mode.has_value());
  CHECK((*t.mode - Matrix::Identity(2, 2)).norm() < 1e-15);
}

TEST_CASE("wishart rejects invalid parameters") {
  CHECK_THROWS_AS(WishartDist(Matrix::Identity(3, 3), 1.5), Error);
  Matrix bad(2, 2);
  bad << 1, 2, 2, 1;
  try {
    WishartDist w(bad, 5.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotPositiveDefinite);
  }
}

TEST_CASE("wishart sampler reproduces mean and variance") {
  Matrix S(2, 2);
  S << 1.0, 0.3, 0.3, 2.0;
  const WishartDist w(S, 10.0);
  const WishartStats st = wishart_stats(w);
  Rng rng(2024);
  const int n = 1000000;
  std::vector<double> a(n), b(n), c(n);
  for (int i = 0; i < n; ++i) {
    const Matrix x = w.sample(rng);
    a[i] = x(0, 0);
    b[i] = x(0, 1);
    c[i] = x(1, 1);
  }
  const auto ma = sample_moments(a), mb = sample_moments(b), mc = sample_moments(c);
  CHECK(within_se(ma.mean, st.mean(0, 0), ma.mean_se, 3));
  CHECK(within_se(mb.mean, st.mean(0, 1), mb.mean_se, 3));
  CHECK(within_se(mc.mean, st.mean(1, 1), mc.mean_se, 3));
  CHECK(within_se(ma.var, st.variance(0, 0), ma.var_se, 3));
  CHECK(within_se(mb.var, st.variance(0, 1), mb.var_se, 3));
  CHECK(within_se(mc.var, st.variance(1, 1), mc.var_se, 3));
}

TEST_CASE("wishart sampler: positivity, determinism and identity-scale mean") {
  const WishartDist scalar(Matrix::Identity(1, 1), 5.0);
  Rng r1(11), r2(11);
  const Matrix d1 = scalar.sample(r1);
  const Matrix d2 = scalar.sample(r2);
  CHECK(d1(0, 0) > 0.0);
  CHECK(d1(0, 0) == d2(0, 0));

  const WishartDist w(Matrix::Identity(2, 2), 7.0);
  Rng rng(5);
  const int n = 1000000;
  std::vector<double> a(n), b(n);
  for (int i = 0; i < n; ++i) {
    const Matrix x = w.sample(rng);
    a[i] = x(0, 0);
    b[i] = x(1, 0);
  }
  const auto ma = sample_moments(a), mb = sample_moments(b);
  CHECK(within_se(ma.mean, 7.0, ma.mean_se, 3));
  CHECK(within_se(mb.mean, 0.0, mb.mean_se, 3));
}

TEST_CASE("wishart draws are symmetric positive definite") {
  Rng rng(3);
  const WishartDist w(random_spd(5, rng), 5.5);
  for (int i = 0; i < 200; ++i) {
    const Matrix x = w.sample(rng);
    CHECK(linalg::is_symmetric(x));
    CHECK(Eigen::LLT<Matrix>(x).info() == Eigen::Success);
  }
}

TEST_CASE("wishart factor sampler matches the scale form") {
  Rng rng(8);
  const Matrix S = random_spd(3, rng);
  const Matrix F = linalg::cholesky(S, "S").matrixL();
  Rng a(99), b(99);
  const Matrix x = wishart_sample_factor(F, 6.0, a);
  const Matrix y = WishartDist(S, 6.0).sample(b);
  CHECK((x - y).norm() < 1e-10 * y.norm());
}

TEST_CASE("wishart density integrates to one for M = 1") {
  for (double dof : {0.5, 3.0, 12.0}) {
    const WishartDist w(Matrix::Constant(1, 1, 0.7), dof);
    boost::math::quadrature::exp_sinh<double> integrator;
    const double total = integrator.integrate(
        [&](double x) { return std::exp(w.log_pdf(Matrix::Constant(1, 1, x))); });
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("wishart density for M = 1 is a gamma density") {
  const double s = 1.7, dof = 6.0, x = 4.2;
  const WishartDist w(Matrix::Constant(1, 1, s), dof);
  const double shape = dof / 2, scale = 2 * s;
  const double expected = (shape - 1) * std::log(x) - x / scale - std::lgamma(shape) - shape * std::log(scale);
  CHECK(w.log_pdf(Matrix::Constant(1, 1, x)) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("wishart entropy and expected log determinant match Monte Carlo") {
  Matrix S(2, 2);
  S << 0.8, 0.2, 0.2, 0.5;
  const WishartDist w(S, 6.0);
  Rng rng(17);
  const int n = 200000;
  std::vector<double> neg_log_pdf(n), log_det(n);
  for (int i = 0; i < n; ++i) {
    const Matrix x = w.sample(rng);
    neg_log_pdf[i] = -w.log_pdf(x);
    log_det[i] = linalg::log_det_spd(x, "draw");
  }
  const auto e = sample_moments(neg_log_pdf), l = sample_moments(log_det);
  CHECK(within_se(e.mean, w.entropy(), e.mean_se, 4));
  CHECK(within_se(l.mean, w.expected_log_det(), l.mean_se, 4));
}

TEST_CASE("matric normal density at the mean") {
  for (Index M : {1, 2, 3}) {
    for (Index p : {1, 4}) {
      const MatricNormal d(Matrix::Zero(p, M), Matrix::Identity(M, M), Matrix::Identity(p, p));
      CHECK(d.log_pdf(Matrix::Zero(p, M)) == doctest::Approx(-0.5 * M * p * kLn2Pi).epsilon(1e-13));
    }
  }
}

TEST_CASE("matric normal density equals the vectorized normal density") {
  Rng rng(21);
  for (Index M = 1; M <= 4; ++M) {
    for (Index p = 1; p <= 4; ++p) {
      const Matrix mean = rng.normal_matrix(p, M);
      const MatricNormal d(mean, random_spd(M, rng), random_spd(p, rng));
      const Matrix x = rng.normal_matrix(p, M);
      const double direct = mvn_log_pdf(linalg::vec(x), linalg::vec(mean), d.vec_covariance());
      CHECK(std::abs(d.log_pdf(x) - direct) <= 1e-10 * std::max(1.0, std::abs(direct)));
    }
  }
}

TEST_CASE("matric normal rejects non-conformable arguments") {
  const MatricNormal d(Matrix::Zero(3, 2), Matrix::Identity(2, 2), Matrix::Identity(3, 3));
  try {
    d.log_pdf(Matrix::Zero(2, 3));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimensionMismatch);
  }
  CHECK_THROWS_AS(MatricNormal(Matrix::Zero(3, 2), Matrix::Identity(3, 3), Matrix::Identity(3, 3)), Error);
}

TEST_CASE("matric normal sampler covariance is the Kronecker product") {
  Rng rng(31);
  const Index M = 2, p = 3;
  const MatricNormal d(Matrix::Zero(p, M), random_spd(M, rng), random_spd(p, rng));
  const Matrix target = d.vec_covariance();
  const int n = 200000;
  const Index k = M * p;
  Matrix draws(n, k);
  for (int i = 0; i < n; ++i) draws.row(i) = linalg::vec(d.sample(rng)).transpose();
  for (Index a = 0; a < k; ++a) {
    for (Index b = a; b < k; ++b) {
      std::vector<double> prod(n);
      for (int i = 0; i < n; ++i) prod[i] = draws(i, a) * draws(i, b);
      const auto m = sample_moments(prod);
      CHECK(within_se(m.mean, target(a, b), m.mean_se, 4));
    }
  }
}

TEST_CASE("matric normal linear map") {
  Rng rng(41);
  const Index M = 2, p = 3, q = 2;
  const Matrix mean = rng.normal_matrix(p, M);
  const MatricNormal d(mean, random_spd(M, rng), random_spd(p, rng));
  const Matrix A = rng.normal_matrix(q, p);
  const MatricNormal mapped = d.left_multiply(A);
  CHECK((mapped.mean() - A * mean).norm() < 1e-12);
  CHECK((mapped.row_cov() - A * d.row_cov() * A.transpose()).norm() < 1e-12);

  const int n = 200000;
  const Index k = M * q;
  const Matrix target = mapped.vec_covariance();
  const Vector target_mean = linalg::vec(mapped.mean());
  Matrix draws(n, k);
  for (int i = 0; i < n; ++i) draws.row(i) = linalg::vec(A * d.sample(rng)).transpose();
  for (Index a = 0; a < k; ++a) {
    std::vector<double> col(draws.col(a).data(), draws.col(a).data() + n);
    const auto m = sample_moments(col);
    CHECK(within_se(m.mean, target_mean(a), m.mean_se, 4));
    CHECK(within_se(m.var, target(a, a), m.var_se, 4));
  }
}

TEST_CASE("matric t moments") {
  const MatricT d(Matrix::Zero(3, 2), Matrix::Identity(2, 2), Matrix::Identity(3, 3), 5.0);
  const MatricTStats s = matric_t_stats(d);
  CHECK((s.vec_variance - 0.5 * Matrix::Identity(6, 6)).norm() < 1e-15);
  CHECK(s.mean.isZero());
  try {
    MatricT(Matrix::Zero(3, 2), Matrix::Identity(2, 2), Matrix::Identity(3, 3), 3.0).vec_variance();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUndefinedMoment);
  }
}

TEST_CASE("matric t compounding oracle") {
  Rng rng(51);
  const Index p = 2, q = 2;
  const Matrix mean = rng.normal_matrix(p, q);
  const Matrix S = random_spd(q, rng), V = random_spd(p, rng);
  const MatricT d(mean, S, V, 9.0);
  const Matrix target = d.vec_variance();
  const Vector target_mean = linalg::vec(mean);
  const WishartDist prec(linalg::inverse_spd(S, "S"), 9.0);
  const int n = 400000;
  const Index k = p * q;
  Matrix draws(n, k);
  for (int i = 0; i < n; ++i) {
    const Matrix sigma = linalg::inverse_spd(prec.sample(rng), "draw");
    draws.row(i) = linalg::vec(MatricNormal(mean, sigma, V).sample(rng)).transpose();
  }
  for (Index a = 0; a < k; ++a) {
    std::vector<double> col(draws.col(a).data(), draws.col(a).data() + n);
    const auto m = sample_moments(col);
    CHECK(within_se(m.mean, target_mean(a), m.mean_se, 4));
    CHECK(within_se(m.var, target(a, a), m.var_se, 4));
  }
}

TEST_CASE("matric t density with one column is a multivariate t") {
  Rng rng(61);
  const Index p = 3;
  const Matrix V = random_spd(p, rng);
  const double s = 1.4, dof = 7.0;
  const Vector mean = rng.normal_vector(p);
  const MatricT d(mean, Matrix::Constant(1, 1, s), V, dof);
  const MultivariateT t(mean, s * V / dof, dof);
  for (int i = 0; i < 5; ++i) {
    const Vector x = rng.normal_vector(p);
    CHECK(d.log_pdf(x) == doctest::Approx(t.log_pdf(x)).epsilon(1e-12));
  }
}

TEST_CASE("multivariate t moments and density") {
  Vector m(2);
  m << 1.0, 2.0;
  const MultivariateT t(m, 0.1 * Matrix::Identity(2, 2), 10.0);
  const MultivariateTStats s = mvt_stats(t);
  CHECK((s.variance - 0.125 * Matrix::Identity(2, 2)).norm() < 1e-15);
  CHECK(s.mean == m);
  CHECK_THROWS_AS(MultivariateT(m, Matrix::Identity(2, 2), 2.0).variance(), Error);

  const double scale = 2.5, dof = 4.5, x = 0.7;
  const MultivariateT u(Vector::Zero(1), Matrix::Constant(1, 1, scale), dof);
  const boost::math::students_t_distribution<double> ref(dof);
  const double expected = std::log(boost::math::pdf(ref, x / std::sqrt(scale)) / std::sqrt(scale));
  CHECK(u.log_pdf(Vector::Constant(1, x)) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("multivariate t sampler moments") {
  Rng rng(71);
  const Matrix S = random_spd(3, rng);
  const MultivariateT t(rng.normal_vector(3), S, 8.0);
  const Matrix target = t.variance();
  const int n = 400000;
  Matrix draws(n, 3);
  for (int i = 0; i < n; ++i) draws.row(i) = t.sample(rng).transpose();
  for (Index a = 0; a < 3; ++a) {
    std::vector<double> col(draws.col(a).data(), draws.col(a).data() + n);
    const auto m = sample_moments(col);
    CHECK(within_se(m.mean, t.mean()(a), m.mean_se, 4));
    CHECK(within_se(m.var, target(a, a), m.var_se, 4));
  }
}

TEST_CASE("normal with wishart precision compounds to a multivariate t") {
  Rng rng(81);
  const Matrix A = 0.1 * random_spd(2, rng);
  const WishartDist law(A, 12.0);
  const Vector mean = rng.normal_vector(2);
  const MultivariateT mix = normal_wishart_mixture(mean, law);
  CHECK(mix.dof() == doctest::Approx(11.0));
  const Matrix expected = linalg::inverse_spd(A, "A") / (12.0 - 2.0 - 1.0);
  CHECK((mix.variance() - expected).norm() < 1e-12 * expected.norm());

  const int n = 400000;
  Matrix draws(n, 2);
  for (int i = 0; i < n; ++i) {
    const Matrix sigma = linalg::inverse_spd(law.sample(rng), "draw");
    const Cholesky llt = linalg::cholesky(sigma, "sigma");
    draws.row(i) = (mean + llt.matrixL() * rng.normal_vector(2)).transpose();
  }
  for (Index a = 0; a < 2; ++a) {
    std::vector<double> col(draws.col(a).data(), draws.col(a).data() + n);
    const auto m = sample_moments(col);
    CHECK(within_se(m.mean, mean(a), m.mean_se, 4));
    CHECK(within_se(m.var, expected(a, a), m.var_se, 4));
  }
}

TEST_CASE("sum of a normal and a t") {
  Rng rng(91);
  const Matrix C = 0.3 * random_spd(2, rng);
  const MultivariateT noise(Vector::Zero(2), random_spd(2, rng), 9.0);
  const Vector mean = rng.normal_vector(2);
  const NormalTSum sum(mean, C, noise);
  CHECK((sum.variance() - (C + noise.variance())).norm() < 1e-14);
  const Matrix draws = sum.sample(300000, rng);
  const Matrix target = sum.variance();
  for (Index a = 0; a < 2; ++a) {
    std::vector<double> col(draws.col(a).data(), draws.col(a).data() + draws.rows());
    const auto m = sample_moments(col);
    CHECK(within_se(m.mean, mean(a), m.mean_se, 4));
    CHECK(within_se(m.var, target(a, a), m.var_se, 4));
  }
  CHECK_NOTHROW(NormalTSum(mean, Matrix::Zero(2, 2), noise));
}

}  // TEST_SUITE
