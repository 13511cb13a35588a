#pragma once

#include "coshfit/solvers.hpp"

#include <vector>

namespace coshfit::detail {

/// Columns of X centred and scaled to unit spread; coefficients map back exactly.
struct ScaledDesign {
  Eigen::MatrixXd Z;       // [1 | (X - mean) / spread]
  Eigen::VectorXd mean;    // per predictor
  Eigen::VectorXd spread;  // per predictor

  explicit ScaledDesign(const Eigen::MatrixXd& X);

  Eigen::VectorXd to_original(const Eigen::VectorXd& gamma) const;
  Eigen::VectorXd from_original(const Eigen::VectorXd& beta) const;
};

/// Least-squares coefficients (intercept first); throws SingularDesignError.
Eigen::VectorXd least_squares(const RegressionData& data);

double median(std::vector<double> values);

FitResult fit_rank(const RegressionData& data);

}  // namespace coshfit::detail
