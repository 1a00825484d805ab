#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "core/linalg.hpp"
#include "core/priors.hpp"
#include "core/rng.hpp"
#include "core/vardata.hpp"

namespace vbvar::testing {

// A A' / n + ridge I for a standard normal A.
Matrix random_spd(Index n, Rng& rng, double ridge = 0.5);

DesignData synthetic_design(int M, int lags, int T_raw, std::uint64_t seed);

ConjugatePrior random_conjugate_prior(Index M, Index p, Rng& rng);
IndependentPrior random_independent_prior(Index M, Index p, Rng& rng);

// Intercept-free scalar regression with six observations.
DesignData toy_design();
IndependentPrior toy_independent_prior();

// Mean, variance and their standard errors from iid samples.
struct SampleMoments {
  double mean = 0;
  double mean_se = 0;
  double var = 0;
  double var_se = 0;
};
SampleMoments sample_moments(const std::vector<double>& xs);

// Moments of a 2-D density over (beta, lambda) by the midpoint rule on an n×n grid.
struct GridMoments {
  double beta_mean = 0;
  double beta_var = 0;
  double prec_mean = 0;
  double prec_var = 0;
  double log_integral = 0;  // ln ∫∫ exp(log_density)
};
GridMoments grid_quadrature(const std::function<double(double, double)>& log_density, double beta_lo,
                            double beta_hi, double prec_lo, double prec_hi, int n = 400);

// Quadrature of the toy posterior under the independent prior; ranges follow the VB fit.
GridMoments toy_quadrature(int n = 400);

// Maximizes f over a box by nested Brent searches.
struct Maximum2d {
  double x = 0;
  double y = 0;
  double value = 0;
};
Maximum2d maximize_2d(const std::function<double(double, double)>& f, double x_lo, double x_hi, double y_lo,
                      double y_hi);

bool within_se(double value, double reference, double se, double k);

}  // namespace vbvar::testing
