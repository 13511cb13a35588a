#pragma once

#include "coshfit/distributions.hpp"
#include "coshfit/losses.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace coshfit {

/// Raised when the design matrix (with intercept) is rank deficient.
class SingularDesignError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a scale estimate collapses (e.g. all observations equal).
class DegenerateScaleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Response y and predictors X (n x p, no intercept column). p may be 0.
class RegressionData {
 public:
  RegressionData(Eigen::VectorXd y, Eigen::MatrixXd X);

  /// Location problem: p = 0.
  static RegressionData location(std::span<const double> y);

  std::size_t n() const { return static_cast<std::size_t>(y_.size()); }
  std::size_t p() const { return static_cast<std::size_t>(X_.cols()); }
  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::MatrixXd& X() const { return X_; }

  /// [1 | X], n x (p + 1).
  Eigen::MatrixXd design() const;

  /// Rows selected by index (with repetition), for case resampling.
  RegressionData subset(std::span<const std::size_t> rows) const;

 private:
  Eigen::VectorXd y_;
  Eigen::MatrixXd X_;
};

struct FitResult {
  Eigen::VectorXd beta;  ///< intercept first, then one slope per predictor
  double objective = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;  ///< infinity norm of the objective gradient; NaN for rank fits
};

struct SolverOptions {
  double gradient_tol = 1e-8;
  int max_iterations = 200;
  double armijo = 1e-4;
  double shrink = 0.5;
};

/// Sum of rho over residuals y - [1|X] beta (rank dispersion for LossKind::Rank).
double objective(const RegressionData& data, const LossSpec& spec, const Eigen::VectorXd& beta);

/// Gradient of objective() with respect to beta (pointwise losses only).
Eigen::VectorXd objective_gradient(const RegressionData& data, const LossSpec& spec,
                                   const Eigen::VectorXd& beta);

/**
 * Location M-estimate argmin_theta sum rho(x_i - theta).
 *
 * L2 returns the sample mean. LogCosh and Huber use Newton steps safeguarded by
 * bisection on [min, max]. CauchyLoss is non-convex: eleven local searches
 * (the mean plus ten starts spread over the data range) keep the best minimum.
 */
FitResult fit_location(std::span<const double> data, const LossSpec& spec);

/// Joint Cosh MLE of (theta, sigma) by alternating Newton on theta and log sigma.
/// Throws DegenerateScaleError when all observations are equal.
LocationScale fit_location_scale(std::span<const double> data);

/**
 * Linear M-estimate with intercept.
 *
 * L2 solves least squares. Smooth losses use Newton on X'WX (W = psi') with
 * Armijo backtracking from the L2 solution; when X'WX is not positive definite
 * the IRLS weights psi(r)/r replace psi'. Huber with HuberScale::Mad alternates
 * a MAD scale update with the fixed-scale fit. Rank minimizes the Jaeckel
 * dispersion over slopes by Nelder-Mead and sets the intercept to the median
 * residual. Non-convergence is reported through FitResult::converged.
 */
FitResult fit_linear(const RegressionData& data, const LossSpec& spec, const SolverOptions& options = {});

/// Scale used by HuberScale::Mad: median(|r|) / 0.6745.
double mad_scale(std::span<const double> residuals);

struct QuantileFit {
  std::vector<double> taus;
  std::vector<FitResult> fits;
  SmrqParams loss_params;  ///< c, h, s, v shared by every tau (tau field unused)
};

/// One SMRQ fit per tau; taus must be strictly increasing in (0, 1).
QuantileFit fit_quantiles(const RegressionData& data, std::span<const double> taus,
                          const SmrqParams& params = {}, const SolverOptions& options = {});

struct MonotonicityReport {
  std::vector<double> taus;
  std::vector<double> below_fraction;
  std::size_t violations = 0;
};

/// Fraction of observations strictly below each fitted hyperplane, and the
/// number of adjacent tau pairs where that fraction decreases.
MonotonicityReport monotonicity_audit(const QuantileFit& fit, const RegressionData& data);

/// Derivative-free minimizer used by the rank fit; exposed for testing.
struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  bool converged = false;
  int evaluations = 0;
};

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, const Eigen::VectorXd& step,
                             double size_tol = 1e-6, int max_evaluations = 20000);

}  // namespace coshfit
