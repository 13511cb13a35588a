#include "coshfit/solvers.hpp"

#include "solver_detail.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace coshfit {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, const Eigen::VectorXd& step, double size_tol,
                             int max_evaluations) {
  const Eigen::Index d = start.size();
  if (step.size() != d) throw std::invalid_argument("nelder_mead: step and start sizes differ");

  NelderMeadResult out;
  if (d == 0) {
    out.x = start;
    out.value = f(start);
    out.evaluations = 1;
    out.converged = true;
    return out;
  }

  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(d + 1), start);
  std::vector<double> vals(pts.size());
  for (Eigen::Index j = 0; j < d; ++j) pts[static_cast<std::size_t>(j + 1)](j) += step(j);
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return f(x);
  };
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(pts.size());
  bool converged = false;
  while (evals < max_evaluations) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];

    double size = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Eigen::VectorXd diff = (pts[i] - pts[best]).cwiseAbs();
      for (Eigen::Index j = 0; j < d; ++j) {
        size = std::max(size, diff(j) / std::max(1.0, std::abs(pts[best](j))));
      }
    }
    if (size <= size_tol) {
      converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i != worst) centroid += pts[i];
    }
    centroid /= static_cast<double>(d);

    const Eigen::VectorXd reflected = centroid + (centroid - pts[worst]);
    const double fr = eval(reflected);
    if (fr < vals[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = eval(expanded);
      if (fe < fr) {
        pts[worst] = expanded;
        vals[worst] = fe;
      } else {
        pts[worst] = reflected;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = reflected;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = eval(contracted);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = contracted;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      vals[i] = eval(pts[i]);
    }
  }

  const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  out.x = pts[best];
  out.value = vals[best];
  out.converged = converged;
  out.evaluations = evals;
  return out;
}

namespace detail {

FitResult fit_rank(const RegressionData& data) {
  const Eigen::VectorXd& y = data.y();
  FitResult out;
  out.gradient_norm = std::numeric_limits<double>::quiet_NaN();

  if (data.p() == 0) {
    out.beta = Eigen::VectorXd::Constant(1, median(std::vector<double>(y.begin(), y.end())));
    out.objective = rank_objective(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
    out.converged = true;
    return out;
  }

  // Search over slopes on the standardized predictors; the dispersion ignores the intercept.
  const ScaledDesign sd(data.X());
  const Eigen::MatrixXd Zs = sd.Z.rightCols(static_cast<Eigen::Index>(data.p()));
  Eigen::VectorXd r(y.size());
  auto dispersion = [&](const Eigen::VectorXd& g) {
    r.noalias() = y - Zs * g;
    return rank_objective(std::span<const double>(r.data(), static_cast<std::size_t>(r.size())));
  };

  const double sd_y = std::sqrt((y.array() - y.mean()).square().sum() / static_cast<double>(y.size()));
  const double floor_step = 1e-3 * std::max(sd_y, 1e-12);

  Eigen::VectorXd gamma = sd.from_original(least_squares(data)).tail(static_cast<Eigen::Index>(data.p()));
  double value = dispersion(gamma);
  bool converged = false;
  int evaluations = 0;
  int restarts = 0;
  for (; restarts < 20; ++restarts) {
    Eigen::VectorXd step = gamma.cwiseAbs() * 0.1;
    for (Eigen::Index j = 0; j < step.size(); ++j) step(j) = std::max(step(j), floor_step);
    const NelderMeadResult nm = nelder_mead(dispersion, gamma, step);
    evaluations += nm.evaluations;
    const double gain = value - nm.value;
    if (nm.value <= value) {
      gamma = nm.x;
      value = nm.value;
    }
    converged = nm.converged;
    // Restart from the best vertex until a fresh simplex no longer improves it.
    if (!(gain > 1e-12 * std::max(1.0, std::abs(value)))) break;
  }

  Eigen::VectorXd full(static_cast<Eigen::Index>(data.p() + 1));
  full(0) = 0.0;
  full.tail(static_cast<Eigen::Index>(data.p())) = gamma;
  Eigen::VectorXd beta = sd.to_original(full);
  const Eigen::VectorXd resid = y - data.design() * beta;
  beta(0) += median(std::vector<double>(resid.begin(), resid.end()));

  out.beta = beta;
  out.objective = value;
  out.converged = converged;
  out.iterations = evaluations;
  return out;
}

}  // namespace detail

}  // namespace coshfit
