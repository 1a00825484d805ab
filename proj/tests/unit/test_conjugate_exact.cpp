#include <doctest.h>

#include <cmath>
#include <vector>

#include "core/conjugate_exact.hpp"
#include "core/error.hpp"
#include "support/test_support.hpp"

using namespace vbvar;
using vbvar::testing::random_conjugate_prior;
using vbvar::testing::random_spd;
using vbvar::testing::sample_moments;
using vbvar::testing::within_se;

namespace {

constexpr double kLn2Pi = 1.8378770664093454836;

DesignData random_design(Index M, Index p, Index T, Rng& rng) {
  Matrix X = rng.normal_matrix(T, p);
  if (p > 0) X.col(0).setOnes();
  const Matrix G = rng.normal_matrix(p, M) * 0.3;
  return make_design(X * G + rng.normal_matrix(T, M), X, 1);
}

bool is_psd(const Matrix& a) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(linalg::symmetrize(a)).eigenvalues().minCoeff() >
         -1e-10 * std::max(1.0, a.norm());
}

// Scalar conjugate model: y_t | g, l ~ N(x_t g, 1/l), g | l ~ N(g0, v0/l), l ~ Gamma(nu0/2, rate s0/2).
struct ScalarModel {
  double g0, v0, s0, nu0;
  std::vector<double> x, y;
  double log_joint(double g, double l) const {
    double lp = 0;
    for (std::size_t t = 0; t < x.size(); ++t) {
      const double e = y[t] - x[t] * g;
      lp += -0.5 * kLn2Pi + 0.5 * std::log(l) - 0.5 * l * e * e;
    }
    lp += -0.5 * kLn2Pi - 0.5 * std::log(v0 / l) - 0.5 * l * (g - g0) * (g - g0) / v0;
    const double shape = 0.5 * nu0, rate = 0.5 * s0;
    lp += shape * std::log(rate) - std::lgamma(shape) + (shape - 1) * std::log(l) - rate * l;
    return lp;
  }
  ConjugatePrior prior() const {
    ConjugatePrior p;
    p.mean = Matrix::Constant(1, 1, g0);
    p.row_cov = Matrix::Constant(1, 1, v0);
    p.scale = Matrix::Constant(1, 1, s0);
    p.dof = nu0;
    return p;
  }
  DesignData data() const {
    Matrix X(static_cast<Index>(x.size()), 1), Y(static_cast<Index>(y.size()), 1);
    for (std::size_t t = 0; t < x.size(); ++t) {
      X(static_cast<Index>(t), 0) = x[t];
      Y(static_cast<Index>(t), 0) = y[t];
    }
    return make_design(Y, X, 0, RowVector::Ones(1));
  }
};

}  // namespace

TEST_SUITE("conjugate_exact") {

TEST_CASE("no data leaves the prior unchanged") {
  Rng rng(1);
  const ConjugatePrior prior = random_conjugate_prior(2, 3, rng);
  const DesignData empty = make_design(Matrix(0, 2), Matrix(0, 3), 1);
  const ConjugateExactPosterior post = fit_exact(prior, empty);
  CHECK((post.mean - prior.mean).norm() < 1e-14);
  CHECK((post.row_cov - prior.row_cov).norm() < 1e-12);
  CHECK((post.scale - prior.scale).norm() < 1e-12);
  CHECK(post.dof == prior.dof);
}

TEST_CASE("orthonormal design averages prior and data") {
  Rng rng(2);
  const Index T = 20, p = 4, M = 2;
  const Eigen::HouseholderQR<Matrix> qr(rng.normal_matrix(T, p));
  const Matrix X = qr.householderQ() * Matrix::Identity(T, p);
  const Matrix Y = rng.normal_matrix(T, M);
  ConjugatePrior prior = random_conjugate_prior(M, p, rng);
  prior.row_cov = Matrix::Identity(p, p);
  const ConjugateExactPosterior post = fit_exact(prior, make_design(Y, X, 1));
  CHECK((post.mean - 0.5 * (prior.mean + X.transpose() * Y)).norm() < 1e-12);
}

TEST_CASE("posterior matches a dense re-evaluation") {
  Rng rng(3);
  const Index M = 2, p = 3, T = 12;
  const DesignData d = random_design(M, p, T, rng);
  const ConjugatePrior prior = random_conjugate_prior(M, p, rng);
  const ConjugateExactPosterior post = fit_exact(prior, d);

  const Matrix V0inv = prior.row_cov.inverse();
  const Matrix V = (V0inv + d.X.transpose() * d.X).inverse();
  const Matrix G = V * (V0inv * prior.mean + d.X.transpose() * d.Y);
  const Matrix E = d.Y - d.X * G;
  const Matrix S = E.transpose() * E + prior.scale + (G - prior.mean).transpose() * V0inv * (G - prior.mean);
  CHECK((post.row_cov - V).norm() < 1e-12 * V.norm());
  CHECK((post.mean - G).norm() < 1e-12 * G.norm());
  CHECK((post.scale - S).norm() < 1e-11 * S.norm());
  CHECK(post.dof == T + prior.dof);
}

TEST_CASE("each summand of the posterior scale is dominated") {
  Rng rng(4);
  for (int rep = 0; rep < 10; ++rep) {
    const Index M = 1 + rep % 3, p = 2 + rep % 4;
    const DesignData d = random_design(M, p, 25, rng);
    const ConjugatePrior prior = random_conjugate_prior(M, p, rng);
    const ConjugateExactPosterior post = fit_exact(prior, d);
    const Matrix E = d.Y - d.X * post.mean;
    const Matrix D = post.mean - prior.mean;
    CHECK(is_psd(post.scale - E.transpose() * E));
    CHECK(is_psd(post.scale - prior.scale));
    CHECK(is_psd(post.scale - D.transpose() * prior.row_cov.inverse() * D));
  }
}

TEST_CASE("sequential updating equals a single fit") {
  Rng rng(5);
  const Index M = 3, p = 4, T = 60;
  const DesignData d = random_design(M, p, T, rng);
  const ConjugatePrior prior = random_conjugate_prior(M, p, rng);
  const DesignData first = make_design(d.Y.topRows(25), d.X.topRows(25), 1);
  const DesignData second = make_design(d.Y.bottomRows(T - 25), d.X.bottomRows(T - 25), 1);
  const ConjugateExactPosterior once = fit_exact(prior, d);
  const ConjugateExactPosterior twice = fit_exact(as_prior(fit_exact(prior, first)), second);
  CHECK((twice.mean - once.mean).norm() <= 1e-10 * once.mean.norm());
  CHECK((twice.row_cov - once.row_cov).norm() <= 1e-10 * once.row_cov.norm());
  CHECK((twice.scale - once.scale).norm() <= 1e-8 * once.scale.norm());
  CHECK(twice.dof == once.dof);
}

TEST_CASE("non-conformable prior is rejected") {
  Rng rng(6);
  const DesignData d = random_design(2, 3, 10, rng);
  try {
    fit_exact(random_conjugate_prior(2, 4, rng), d);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimensionMismatch);
  }
}

TEST_CASE("marginal coefficient law") {
  Rng rng(7);
  const Index M = 2, p = 2;
  const DesignData d = random_design(M, p, 15, rng);
  const ConjugateExactPosterior post = fit_exact(random_conjugate_prior(M, p, rng), d);
  const MatricT mt = marginal_coefficients(post);
  CHECK(mt.mean() == post.mean);
  const Matrix target = linalg::kron(post.scale, post.row_cov) / (post.dof - M - 1.0);
  CHECK((mt.vec_variance() - target).norm() < 1e-12 * target.norm());

  const WishartDist prec = marginal_precision(post);
  const int n = 200000;
  const Index k = M * p;
  Matrix draws(n, k);
  for (int i = 0; i < n; ++i) {
    const Matrix sigma = linalg::inverse_spd(prec.sample(rng), "draw");
    draws.row(i) = linalg::vec(MatricNormal(post.mean, sigma, post.row_cov).sample(rng)).transpose();
  }
  const Vector mean = linalg::vec(post.mean);
  for (Index a = 0; a < k; ++a) {
    std::vector<double> col(draws.col(a).data(), draws.col(a).data() + n);
    const auto m = sample_moments(col);
    CHECK(within_se(m.mean, mean(a), m.mean_se, 4));
    CHECK(within_se(m.var, target(a, a), m.var_se, 4));
  }
}

TEST_CASE("single equation marginal is a multivariate t") {
  Rng rng(8);
  const Index p = 3;
  const DesignData d = random_design(1, p, 20, rng);
  const ConjugateExactPosterior post = fit_exact(random_conjugate_prior(1, p, rng), d);
  const Matrix var = marginal_coefficients(post).vec_variance();
  CHECK((var - post.scale(0, 0) * post.row_cov / (post.dof - 2.0)).norm() < 1e-13 * var.norm());
  const MultivariateT t(post.mean.col(0), post.scale(0, 0) * post.row_cov / post.dof, post.dof);
  const Vector x = post.mean.col(0) + 0.1 * rng.normal_vector(p);
  CHECK(marginal_coefficients(post).log_pdf(x) == doctest::Approx(t.log_pdf(x)).epsilon(1e-12));
}

TEST_CASE("log marginal likelihood against quadrature for one observation") {
  ScalarModel model{0.2, 1.5, 0.8, 4.0, {1.3}, {0.7}};
  const ConjugatePrior prior = model.prior();
  const DesignData d = model.data();
  const double lnml = log_marginal_likelihood(prior, fit_exact(prior, d), d);
  // Integrate over (g, ln l) to resolve the small-precision region.
  const auto g = vbvar::testing::grid_quadrature(
      [&](double gg, double u) { return model.log_joint(gg, std::exp(u)) + u; }, -60.0, 60.0, -14.0, 5.0, 1600);
  CHECK(std::abs(lnml - g.log_integral) < 1e-5);
}

TEST_CASE("log marginal likelihood with several observations against quadrature") {
  ScalarModel model{0.0, 2.0, 1.0, 3.0, {1.0, -0.4, 0.8, 2.1, -1.3}, {0.5, -0.9, 1.2, 1.6, -0.2}};
  const ConjugatePrior prior = model.prior();
  const DesignData d = model.data();
  const double lnml = log_marginal_likelihood(prior, fit_exact(prior, d), d);
  const auto g = vbvar::testing::grid_quadrature(
      [&](double gg, double u) { return model.log_joint(gg, std::exp(u)) + u; }, -15.0, 15.0, -12.0, 4.0, 1200);
  CHECK(std::abs(lnml - g.log_integral) < 1e-5);
}

TEST_CASE("a badly scaled prior lowers the marginal likelihood") {
  Rng rng(9);
  const Index M = 2, p = 3;
  const DesignData d = random_design(M, p, 80, rng);
  ConjugatePrior prior = random_conjugate_prior(M, p, rng);
  prior.scale = Matrix::Identity(M, M);
  const double base = log_marginal_likelihood(prior, fit_exact(prior, d), d);
  prior.scale *= 1e6;
  const double scaled = log_marginal_likelihood(prior, fit_exact(prior, d), d);
  CHECK(scaled < base);
}

TEST_CASE("joint mode closed form") {
  Rng rng(10);
  const Index M = 3, p = 4, T = 30;
  const DesignData d = random_design(M, p, T, rng);
  const ConjugatePrior prior = random_conjugate_prior(M, p, rng);
  const ConjugateExactPosterior post = fit_exact(prior, d);
  const JointMode mode = joint_mode(post, p, prior.dof, T);
  CHECK(mode.coefficients == post.mean);
  const Matrix expected = (T + p + prior.dof - M - 1.0) * post.scale.inverse();
  CHECK((mode.precision - expected).norm() < 1e-10 * expected.norm());

  ConjugateExactPosterior scaled = post;
  scaled.scale *= 3.0;
  CHECK((joint_mode(scaled, p, prior.dof, T).precision - mode.precision / 3.0).norm() <
        1e-12 * mode.precision.norm());
}

TEST_CASE("joint mode against a numerical optimizer") {
  ScalarModel model{0.1, 1.0, 0.5, 3.0, {1.0, 0.4, -0.7, 1.5, 0.2, -1.1}, {0.8, 0.1, -0.9, 1.1, 0.5, -0.6}};
  const ConjugatePrior prior = model.prior();
  const DesignData d = model.data();
  const ConjugateExactPosterior post = fit_exact(prior, d);
  const JointMode mode = joint_mode(post, 1, prior.dof, d.T());
  const auto best = vbvar::testing::maximize_2d(
      [&](double g, double l) {
        return log_joint_conjugate(prior, d, Matrix::Constant(1, 1, g), Matrix::Constant(1, 1, l));
      },
      -5.0, 5.0, 1e-3, 50.0);
  CHECK(std::abs(best.x - mode.coefficients(0, 0)) < 1e-6);
  CHECK(std::abs(best.y - mode.precision(0, 0)) < 1e-6 * std::max(1.0, mode.precision(0, 0)));
}

TEST_CASE("log joint agrees with the scalar reference") {
  ScalarModel model{0.1, 1.0, 0.5, 3.0, {1.0, 0.4, -0.7}, {0.8, 0.1, -0.9}};
  const ConjugatePrior prior = model.prior();
  const DesignData d = model.data();
  for (double g : {-0.5, 0.3, 1.2}) {
    for (double l : {0.2, 1.0, 4.0}) {
      const double a = log_joint_conjugate(prior, d, Matrix::Constant(1, 1, g), Matrix::Constant(1, 1, l));
      CHECK(a == doctest::Approx(model.log_joint(g, l)).epsilon(1e-12));
    }
  }
}

TEST_CASE("joint mode requires enough degrees of freedom") {
  ConjugateExactPosterior post;
  post.mean = Matrix::Zero(1, 3);
  post.row_cov = Matrix::Identity(1, 1);
  post.scale = Matrix::Identity(3, 3);
  post.dof = 2.5;
  CHECK_THROWS_AS(joint_mode(post, 1, 2.5, 0), Error);
}

TEST_CASE("predictive density location and variance") {
  Rng rng(11);
  const Index M = 2, p = 3;
  const DesignData d = random_design(M, p, 40, rng);
  ConjugatePrior prior = random_conjugate_prior(M, p, rng);
  const ConjugateExactPosterior post = fit_exact(prior, d);
  const RowVector x = d.X.row(3);
  const ExactPredictive pred = predictive_exact(post, x);
  const double c = (x * post.row_cov * x.transpose())(0, 0);
  CHECK(pred.leverage == doctest::Approx(c));
  CHECK((pred.law.mean() - (x * post.mean).transpose()).norm() < 1e-13);
  const Matrix expected = (1.0 + c) * post.scale / (post.dof - M - 1.0);
  CHECK((pred.variance - expected).norm() < 1e-12 * expected.norm());
  CHECK((pred.law.variance() - expected).norm() < 1e-12 * expected.norm());
  CHECK((pred.variance_table_form - (1.0 + c) * post.scale / (post.dof - 2.0)).norm() < 1e-12);

  ConjugateExactPosterior zero = post;
  zero.mean.setZero();
  RowVector intercept = RowVector::Zero(p);
  intercept(0) = 1.0;
  CHECK(predictive_exact(zero, intercept).law.mean().isZero());
}

TEST_CASE("predictive variance against compound simulation") {
  Rng rng(12);
  const Index M = 2, p = 2;
  const DesignData d = random_design(M, p, 12, rng);
  const ConjugateExactPosterior post = fit_exact(random_conjugate_prior(M, p, rng), d);
  const RowVector x = d.x_next;
  const ExactPredictive pred = predictive_exact(post, x);
  const WishartDist prec = marginal_precision(post);
  const int n = 300000;
  Matrix draws(n, M);
  for (int i = 0; i < n; ++i) {
    const Matrix sigma = linalg::inverse_spd(prec.sample(rng), "draw");
    const Matrix G = MatricNormal(post.mean, sigma, post.row_cov).sample(rng);
    const Cholesky llt = linalg::cholesky(sigma, "sigma");
    draws.row(i) = (x * G) + (llt.matrixL() * rng.normal_vector(M)).transpose();
  }
  for (Index a = 0; a < M; ++a) {
    std::vector<double> col(draws.col(a).data(), draws.col(a).data() + n);
    const auto m = sample_moments(col);
    CHECK(within_se(m.mean, pred.law.mean()(a), m.mean_se, 4));
    CHECK(within_se(m.var, pred.variance(a, a), m.var_se, 4));
  }
}

TEST_CASE("single equation predictive variance matches both forms") {
  Rng rng(13);
  const DesignData d = random_design(1, 3, 20, rng);
  const ConjugateExactPosterior post = fit_exact(random_conjugate_prior(1, 3, rng), d);
  const ExactPredictive pred = predictive_exact(post, d.x_next);
  CHECK(pred.variance(0, 0) == doctest::Approx(pred.variance_table_form(0, 0)).epsilon(1e-14));
}

}  // TEST_SUITE
