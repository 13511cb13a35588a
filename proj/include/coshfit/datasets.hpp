#pragma once

#include "coshfit/solvers.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace coshfit {

/// Raised for unreadable files and malformed CSV content.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Response plus predictor columns (X has zero columns for location data).
struct NamedDataset {
  std::string name;
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::string response_name;
  std::vector<std::string> column_names;  ///< one per column of X, in file order

  RegressionData to_regression_data() const { return RegressionData(y, X); }
};

/// "location25" (25 values) or "telephone" (year, calls in tens of millions).
/// Unknown names throw std::invalid_argument listing the available ones.
NamedDataset builtin(std::string_view name);

std::vector<std::string> available_builtins();

/// Comma-separated file with a header row; `response` becomes y and every
/// other column becomes a predictor, in file order.
NamedDataset load_csv(const std::filesystem::path& path, std::string_view response);

/// Writes the response first, then the predictors, using round-trip precision.
void write_csv(const NamedDataset& data, const std::filesystem::path& path);

}  // namespace coshfit
