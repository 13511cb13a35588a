#pragma once

#include "coshfit/distributions.hpp"
#include "coshfit/losses.hpp"
#include "coshfit/solvers.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

namespace coshfit {

/// 2 sigma^2 / n, the inverse Fisher information of the Cosh location over n.
double asymptotic_variance(double sigma, std::size_t n);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// theta_hat +/- z_{alpha/2} sigma sqrt(2 / n).
Interval confidence_interval(double theta_hat, double sigma, std::size_t n, double alpha);

/**
 * Replicate estimates and their summaries. Each row of `estimates` is one
 * successful replicate (in replicate order); columns are the estimated
 * components (theta and sigma, or the regression coefficients).
 */
struct BootstrapReport {
  Eigen::MatrixXd estimates;
  Eigen::VectorXd point;
  Eigen::VectorXd se;
  Eigen::VectorXd ci_lower;  ///< percentile interval
  Eigen::VectorXd ci_upper;
  double alpha = 0.05;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::size_t failures = 0;
};

struct ParametricBootstrapReport {
  BootstrapReport report;  ///< components (theta_hat, sigma_hat); point holds the true (theta, sigma)
  double mean_theta = 0.0;
  double n_var_theta = 0.0;  ///< n times the sample variance of theta_hat
  double mean_sigma = 0.0;
  std::size_t n = 0;
};

/// Draws `replicates` Cosh samples of size n and fits (theta, sigma) to each.
/// Replicate b uses seed derive_seed(seed, b), so results do not depend on threading.
ParametricBootstrapReport parametric_bootstrap(const DistSpec& spec, std::size_t n, std::size_t replicates,
                                               std::uint64_t seed, double alpha = 0.05);

/// Case-resampling bootstrap of a location M-estimate.
BootstrapReport bootstrap_se(std::span<const double> data, const LossSpec& spec, std::size_t replicates,
                             std::uint64_t seed, double alpha = 0.05);

enum class Resampling {
  Cases,      ///< draw (y, x) rows with replacement
  Residuals,  ///< keep X fixed, add resampled fit residuals to the fitted values
};

/// Bootstrap of a linear fit. Replicates whose fit throws or fails to converge
/// are skipped; more than 10% failures fails the call.
BootstrapReport bootstrap_se(const RegressionData& data, const LossSpec& spec, std::size_t replicates,
                             std::uint64_t seed, double alpha = 0.05, Resampling scheme = Resampling::Cases);

/// Runs body(i) for i in [0, count) on a small thread pool.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

struct GofReport {
  double statistic_D = 0.0;
  double p_value = 1.0;
  LocationScale fitted{0.0, 1.0};
  DistKind kind = DistKind::Gaussian;
  std::size_t n = 0;
};

/// sup |F_n - F| over the sample, using both sides of each empirical step.
double ks_statistic(std::span<const double> data, const DistSpec& spec);

/// Kolmogorov survival function Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_pvalue(double lambda);

/// Location-scale MLE for Gaussian, Cauchy or Cosh.
LocationScale fit_mle(std::span<const double> data, DistKind kind);

/// Fits `kind` by MLE, then reports D and the asymptotic p-value at sqrt(n) D.
/// The p-value ignores that the parameters were estimated.
GofReport ks_test(std::span<const double> residuals, DistKind kind);

}  // namespace coshfit
