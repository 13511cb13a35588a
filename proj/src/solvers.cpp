#include "coshfit/solvers.hpp"

#include "solver_detail.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace coshfit {

namespace detail {

ScaledDesign::ScaledDesign(const Eigen::MatrixXd& X)
    : Z(X.rows(), X.cols() + 1), mean(X.cols()), spread(X.cols()) {
  const double n = static_cast<double>(X.rows());
  Z.col(0).setOnes();
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double m = X.col(j).mean();
    double s = std::sqrt((X.col(j).array() - m).square().sum() / n);
    if (!(s > 0.0)) s = 1.0;  // constant column; the QR rank check rejects it
    mean(j) = m;
    spread(j) = s;
    Z.col(j + 1) = (X.col(j).array() - m) / s;
  }
}

Eigen::VectorXd ScaledDesign::to_original(const Eigen::VectorXd& gamma) const {
  Eigen::VectorXd beta(gamma.size());
  beta(0) = gamma(0);
  for (Eigen::Index j = 0; j < mean.size(); ++j) {
    beta(j + 1) = gamma(j + 1) / spread(j);
    beta(0) -= beta(j + 1) * mean(j);
  }
  return beta;
}

Eigen::VectorXd ScaledDesign::from_original(const Eigen::VectorXd& beta) const {
  Eigen::VectorXd gamma(beta.size());
  gamma(0) = beta(0);
  for (Eigen::Index j = 0; j < mean.size(); ++j) {
    gamma(j + 1) = beta(j + 1) * spread(j);
    gamma(0) += beta(j + 1) * mean(j);
  }
  return gamma;
}

Eigen::VectorXd least_squares(const RegressionData& data) {
  const ScaledDesign sd(data.X());
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sd.Z);
  if (qr.rank() < sd.Z.cols()) {
    throw SingularDesignError("design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                              " < " + std::to_string(sd.Z.cols()) + ")");
  }
  return sd.to_original(qr.solve(data.y()));
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace detail

namespace {

using detail::ScaledDesign;

double sum_rho(const LossSpec& spec, const Eigen::VectorXd& r) {
  double total = 0.0;
  for (double v : r) total += rho(spec, v);
  return total;
}

Eigen::VectorXd psi_vector(const LossSpec& spec, const Eigen::VectorXd& r) {
  return r.unaryExpr([&](double v) { return psi(spec, v); });
}

// Gradient of sum rho(y - D beta) in the original coordinates, from residuals.
Eigen::VectorXd original_gradient(const RegressionData& data, const Eigen::VectorXd& psis) {
  Eigen::VectorXd g(data.p() + 1);
  g(0) = -psis.sum();
  if (data.p() > 0) g.tail(data.p()) = -(data.X().transpose() * psis);
  return g;
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

bool positive_definite(const Eigen::LDLT<Eigen::MatrixXd>& ldlt) {
  if (ldlt.info() != Eigen::Success) return false;
  const Eigen::VectorXd d = ldlt.vectorD();
  const double largest = d.cwiseAbs().maxCoeff();
  return largest > 0.0 && d.minCoeff() > 1e-12 * largest;
}

// Newton direction on the scaled design; falls back to IRLS weights, then to
// a Levenberg shift, whenever psi' does not give a positive definite system.
Eigen::VectorXd newton_direction(const Eigen::MatrixXd& Z, const LossSpec& spec,
                                 const Eigen::VectorXd& r, const Eigen::VectorXd& psis,
                                 const Eigen::VectorXd& grad) {
  Eigen::VectorXd w = r.unaryExpr([&](double v) { return psi_prime(spec, v); });
  Eigen::MatrixXd H = Z.transpose() * w.asDiagonal() * Z;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
  if (positive_definite(ldlt)) return -ldlt.solve(grad);

  bool irls_ok = true;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    w(i) = r(i) != 0.0 ? psis(i) / r(i) : psi_prime(spec, 0.0);
    if (!(w(i) > 0.0) || !std::isfinite(w(i))) irls_ok = false;
  }
  if (irls_ok) {
    H = Z.transpose() * w.asDiagonal() * Z;
    ldlt.compute(H);
    if (positive_definite(ldlt)) return -ldlt.solve(grad);
  } else {
    w = r.unaryExpr([&](double v) { return std::max(psi_prime(spec, v), 0.0); });
    H = Z.transpose() * w.asDiagonal() * Z;
  }

  const double base = std::max(H.diagonal().cwiseAbs().maxCoeff(), 1.0);
  for (double lambda = 1e-10 * base; lambda < 1e12 * base; lambda *= 10.0) {
    Eigen::MatrixXd shifted = H;
    shifted.diagonal().array() += lambda;
    ldlt.compute(shifted);
    if (positive_definite(ldlt)) return -ldlt.solve(grad);
  }
  return -grad;
}

// Damped Newton on sum rho(y - Z gamma), started at gamma.
FitResult newton_fit(const RegressionData& data, const ScaledDesign& sd, const LossSpec& spec,
                     Eigen::VectorXd gamma, const SolverOptions& opt) {
  const Eigen::MatrixXd& Z = sd.Z;
  const Eigen::VectorXd& y = data.y();

  FitResult out;
  Eigen::VectorXd r = y - Z * gamma;
  double f = sum_rho(spec, r);
  Eigen::VectorXd psis = psi_vector(spec, r);
  double gnorm = inf_norm(original_gradient(data, psis));

  int iter = 0;
  for (; iter < opt.max_iterations && !(gnorm < opt.gradient_tol); ++iter) {
    const Eigen::VectorXd grad = -(Z.transpose() * psis);
    Eigen::VectorXd dir = newton_direction(Z, spec, r, psis, grad);
    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {
      dir = -grad;
      slope = -grad.squaredNorm();
    }

    bool accepted = false;
    for (double t = 1.0; t > 1e-12; t *= opt.shrink) {
      const Eigen::VectorXd cand = gamma + t * dir;
      const Eigen::VectorXd cand_r = y - Z * cand;
      const double cand_f = sum_rho(spec, cand_r);
      bool take = cand_f <= f + opt.armijo * t * slope;
      Eigen::VectorXd cand_psis;
      double cand_gnorm = 0.0;
      if (!take && t == 1.0 && std::abs(cand_f - f) <= 1e-12 * std::max(1.0, std::abs(f))) {
        // At the rounding floor of f: accept a full step that still shrinks the gradient.
        cand_psis = psi_vector(spec, cand_r);
        cand_gnorm = inf_norm(original_gradient(data, cand_psis));
        take = cand_gnorm < gnorm;
      }
      if (take) {
        if (cand_psis.size() == 0) {
          cand_psis = psi_vector(spec, cand_r);
          cand_gnorm = inf_norm(original_gradient(data, cand_psis));
        }
        gamma = cand;
        r = cand_r;
        f = cand_f;
        psis = std::move(cand_psis);
        gnorm = cand_gnorm;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }

  out.beta = sd.to_original(gamma);
  out.objective = f;
  out.iterations = iter;
  out.gradient_norm = gnorm;
  out.converged = gnorm < opt.gradient_tol;
  return out;
}

FitResult fit_smooth(const RegressionData& data, const LossSpec& spec, const SolverOptions& opt,
                     const Eigen::VectorXd& start) {
  const ScaledDesign sd(data.X());
  return newton_fit(data, sd, spec, sd.from_original(start), opt);
}

FitResult fit_huber_mad(const RegressionData& data, const LossSpec& spec, const SolverOptions& opt) {
  Eigen::VectorXd beta = detail::least_squares(data);
  const Eigen::MatrixXd D = data.design();
  FitResult fit;
  bool outer_converged = false;
  int total = 0;
  for (int outer = 0; outer < 500; ++outer) {
    const Eigen::VectorXd r = data.y() - D * beta;
    const double s = mad_scale(std::span<const double>(r.data(), static_cast<std::size_t>(r.size())));
    if (!(s > 0.0)) throw DegenerateScaleError("MAD scale of residuals is zero");
    fit = fit_smooth(data, LossSpec::huber(spec.delta() * s), opt, beta);
    total += fit.iterations;
    const double change = inf_norm(fit.beta - beta);
    beta = fit.beta;
    if (change <= 1e-10 * (1.0 + inf_norm(beta))) {
      outer_converged = true;
      break;
    }
  }
  fit.iterations = total;
  fit.converged = fit.converged && outer_converged;
  return fit;
}

FitResult fit_cauchy_linear(const RegressionData& data, const SolverOptions& opt) {
  const LossSpec spec = LossSpec::cauchy();
  const Eigen::VectorXd ls = detail::least_squares(data);
  const Eigen::VectorXd r = data.y() - data.design() * ls;
  const double lo = r.minCoeff();
  const double hi = r.maxCoeff();

  std::vector<Eigen::VectorXd> starts{ls};
  for (int k = 0; k < 10; ++k) {
    Eigen::VectorXd s = ls;
    s(0) += lo + (k + 0.5) / 10.0 * (hi - lo);
    starts.push_back(s);
  }

  FitResult best;
  bool have = false;
  for (const auto& s : starts) {
    FitResult fit = fit_smooth(data, spec, opt, s);
    const bool better = !have || (fit.converged && !best.converged) ||
                        (fit.converged == best.converged && fit.objective < best.objective);
    if (better) {
      best = std::move(fit);
      have = true;
    }
  }
  return best;
}

// Safeguarded Newton for sum psi(x - theta) = 0 with psi nondecreasing.
FitResult locate_monotone(std::span<const double> data, const LossSpec& spec) {
  constexpr double tol = 1e-10;
  double lo = *std::min_element(data.begin(), data.end());
  double hi = *std::max_element(data.begin(), data.end());
  double theta = detail::median(std::vector<double>(data.begin(), data.end()));

  auto score = [&](double t) {
    double g = 0.0;
    for (double x : data) g += psi(spec, x - t);
    return g;
  };

  double g = score(theta);
  int iter = 0;
  for (; iter < 500 && !(std::abs(g) < tol); ++iter) {
    if (g > 0.0) {
      lo = theta;
    } else {
      hi = theta;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max({1.0, std::abs(lo), std::abs(hi)})) {
      break;
    }
    double h = 0.0;
    for (double x : data) h += psi_prime(spec, x - theta);
    double cand = h > 0.0 ? theta + g / h : std::numeric_limits<double>::quiet_NaN();
    if (!(cand > lo && cand < hi)) cand = 0.5 * (lo + hi);
    theta = cand;
    g = score(theta);
  }

  FitResult out;
  out.beta = Eigen::VectorXd::Constant(1, theta);
  out.objective = 0.0;
  for (double x : data) out.objective += rho(spec, x - theta);
  out.gradient_norm = std::abs(g);
  out.converged = std::abs(g) < tol;
  out.iterations = iter;
  return out;
}

// Local descent for the non-convex Cauchy location objective from a start.
FitResult cauchy_local_1d(std::span<const double> data, double theta, double range) {
  const LossSpec spec = LossSpec::cauchy();
  auto value = [&](double t) {
    double f = 0.0;
    for (double x : data) f += rho(spec, x - t);
    return f;
  };
  auto score = [&](double t) {
    double g = 0.0;
    for (double x : data) g += psi(spec, x - t);
    return g;
  };

  double f = value(theta);
  double g = score(theta);
  int iter = 0;
  for (; iter < 500 && !(std::abs(g) < 1e-10); ++iter) {
    double h = 0.0;
    for (double x : data) h += psi_prime(spec, x - theta);
    // Moving theta by +step changes the objective at rate -g.
    const double step = h > 0.0 ? g / h : std::copysign(0.1 * std::max(range, 1e-12), g);
    bool accepted = false;
    for (double t = 1.0; t > 1e-14; t *= 0.5) {
      const double cand = theta + t * step;
      const double cand_f = value(cand);
      if (cand_f <= f - 1e-4 * t * g * step || (t == 1.0 && std::abs(cand_f - f) <= 1e-14 * std::max(1.0, f) &&
                                                std::abs(score(cand)) < std::abs(g))) {
        theta = cand;
        f = cand_f;
        g = score(theta);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  FitResult out;
  out.beta = Eigen::VectorXd::Constant(1, theta);
  out.objective = f;
  out.gradient_norm = std::abs(g);
  out.converged = std::abs(g) < 1e-10;
  out.iterations = iter;
  return out;
}

}  // namespace

RegressionData::RegressionData(Eigen::VectorXd y, Eigen::MatrixXd X) : y_(std::move(y)), X_(std::move(X)) {
  if (X_.rows() != y_.size()) {
    throw std::invalid_argument("predictor rows (" + std::to_string(X_.rows()) + ") do not match response length (" +
                                std::to_string(y_.size()) + ")");
  }
  if (!(y_.size() > X_.cols())) {
    throw std::invalid_argument("regression data needs n > p (n=" + std::to_string(y_.size()) +
                                ", p=" + std::to_string(X_.cols()) + ")");
  }
  if (!y_.allFinite() || !X_.allFinite()) throw std::invalid_argument("regression data contains non-finite values");
}

RegressionData RegressionData::location(std::span<const double> y) {
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  return RegressionData(std::move(v), Eigen::MatrixXd(static_cast<Eigen::Index>(y.size()), 0));
}

Eigen::MatrixXd RegressionData::design() const {
  Eigen::MatrixXd D(X_.rows(), X_.cols() + 1);
  D.col(0).setOnes();
  D.rightCols(X_.cols()) = X_;
  return D;
}

RegressionData RegressionData::subset(std::span<const std::size_t> rows) const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), X_.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(rows[i]);
    y(static_cast<Eigen::Index>(i)) = y_(src);
    X.row(static_cast<Eigen::Index>(i)) = X_.row(src);
  }
  return RegressionData(std::move(y), std::move(X));
}

double objective(const RegressionData& data, const LossSpec& spec, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd r = data.y() - data.design() * beta;
  if (spec.kind() == LossKind::Rank) {
    return rank_objective(std::span<const double>(r.data(), static_cast<std::size_t>(r.size())));
  }
  return sum_rho(spec, r);
}

Eigen::VectorXd objective_gradient(const RegressionData& data, const LossSpec& spec, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd r = data.y() - data.design() * beta;
  return original_gradient(data, psi_vector(spec, r));
}

double mad_scale(std::span<const double> residuals) {
  std::vector<double> a(residuals.size());
  std::transform(residuals.begin(), residuals.end(), a.begin(), [](double v) { return std::abs(v); });
  return detail::median(std::move(a)) / 0.6745;
}

FitResult fit_location(std::span<const double> data, const LossSpec& spec) {
  if (data.empty()) throw std::invalid_argument("fit_location needs at least one observation");
  switch (spec.kind()) {
    case LossKind::L2: {
      const double mean = std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(data.size());
      FitResult out;
      out.beta = Eigen::VectorXd::Constant(1, mean);
      double g = 0.0;
      for (double x : data) {
        out.objective += rho(spec, x - mean);
        g += x - mean;
      }
      out.gradient_norm = std::abs(g);
      out.converged = true;
      return out;
    }
    case LossKind::LogCosh:
      return locate_monotone(data, spec);
    case LossKind::Huber:
      if (spec.huber_scale() == HuberScale::Mad) return fit_linear(RegressionData::location(data), spec);
      return locate_monotone(data, spec);
    case LossKind::CauchyLoss: {
      const double lo = *std::min_element(data.begin(), data.end());
      const double hi = *std::max_element(data.begin(), data.end());
      const double mean = std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(data.size());
      FitResult best = cauchy_local_1d(data, mean, hi - lo);
      for (int k = 0; k < 10; ++k) {
        FitResult fit = cauchy_local_1d(data, lo + (k + 0.5) / 10.0 * (hi - lo), hi - lo);
        if ((fit.converged && !best.converged) ||
            (fit.converged == best.converged && fit.objective < best.objective)) {
          best = fit;
        }
      }
      return best;
    }
    default:
      throw std::invalid_argument("fit_location supports l2, logcosh, huber and cauchy, got " + spec.name());
  }
}

LocationScale fit_location_scale(std::span<const double> data) {
  if (data.size() < 2) throw std::invalid_argument("location-scale fit needs at least two observations");
  const double lo = *std::min_element(data.begin(), data.end());
  const double hi = *std::max_element(data.begin(), data.end());
  if (!(hi > lo)) throw DegenerateScaleError("all observations are equal; scale is not identifiable");

  const double n = static_cast<double>(data.size());
  double theta = detail::median(std::vector<double>(data.begin(), data.end()));
  std::vector<double> dev(data.size());
  std::transform(data.begin(), data.end(), dev.begin(), [&](double x) { return std::abs(x - theta); });
  double sigma = detail::median(dev) / std::asinh(1.0);  // MAD of the standard Cosh is asinh(1)
  if (!(sigma > 0.0)) sigma = (hi - lo) / 4.0;

  // Average negative log-likelihood in (theta, s = log sigma), constants dropped.
  auto nll = [&](double t, double s) {
    const double inv = std::exp(-s);
    double total = 0.0;
    for (double x : data) total += stable_logcosh((x - t) * inv);
    return s + total / n;
  };

  std::vector<double> z(data.size());
  for (int outer = 0; outer < 1000; ++outer) {
    // theta step: solve sum tanh((x - theta)/sigma) = 0 on the standardized copy.
    for (std::size_t i = 0; i < data.size(); ++i) z[i] = data[i] / sigma;
    theta = locate_monotone(z, LossSpec::log_cosh()).beta(0) * sigma;

    // log-sigma step: Newton on a convex 1-D function, with backtracking.
    double s = std::log(sigma);
    double grad_s = 1.0;
    double hess_s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double zi = (data[i] - theta) / sigma;
      const double th = std::tanh(zi);
      grad_s -= zi * th / n;
      hess_s += (zi * th + zi * zi * sech_squared(zi)) / n;
    }
    double grad_t = 0.0;
    for (double x : data) grad_t += std::tanh((x - theta) / sigma);
    grad_t /= n;
    if (std::abs(grad_s) < 1e-10 && std::abs(grad_t) < 1e-10) break;

    double step = hess_s > 0.0 ? -grad_s / hess_s : -grad_s;
    step = std::clamp(step, -1.0, 1.0);
    const double f0 = nll(theta, s);
    for (double t = 1.0; t > 1e-12; t *= 0.5) {
      if (nll(theta, s + t * step) <= f0 + 1e-4 * t * grad_s * step || (t == 1.0 && std::abs(grad_s) < 1e-8)) {
        s += t * step;
        break;
      }
    }
    sigma = std::exp(s);
  }
  return {theta, sigma};
}

FitResult fit_linear(const RegressionData& data, const LossSpec& spec, const SolverOptions& options) {
  switch (spec.kind()) {
    case LossKind::L2: {
      FitResult out;
      out.beta = detail::least_squares(data);
      out.objective = objective(data, spec, out.beta);
      out.gradient_norm = inf_norm(objective_gradient(data, spec, out.beta));
      out.converged = true;
      return out;
    }
    case LossKind::LogCosh:
    case LossKind::SmoothedCheck:
    case LossKind::Smrq:
      return fit_smooth(data, spec, options, detail::least_squares(data));
    case LossKind::Huber:
      if (spec.huber_scale() == HuberScale::Mad) return fit_huber_mad(data, spec, options);
      return fit_smooth(data, spec, options, detail::least_squares(data));
    case LossKind::CauchyLoss:
      return fit_cauchy_linear(data, options);
    case LossKind::Rank:
      return detail::fit_rank(data);
    case LossKind::Check:
      break;
  }
  throw std::invalid_argument("fit_linear does not support the non-smooth check loss");
}

QuantileFit fit_quantiles(const RegressionData& data, std::span<const double> taus, const SmrqParams& params,
                          const SolverOptions& options) {
  if (taus.empty()) throw std::invalid_argument("at least one tau is required");
  for (std::size_t k = 0; k < taus.size(); ++k) {
    if (!(taus[k] > 0.0 && taus[k] < 1.0)) throw std::invalid_argument("taus must lie in (0, 1)");
    if (k > 0 && !(taus[k] > taus[k - 1])) throw std::invalid_argument("taus must be strictly increasing");
  }
  QuantileFit out;
  out.loss_params = params;
  const Eigen::VectorXd start = detail::least_squares(data);
  for (double tau : taus) {
    SmrqParams p = params;
    p.tau = tau;
    out.taus.push_back(tau);
    out.fits.push_back(fit_smooth(data, LossSpec::smrq(p), options, start));
  }
  return out;
}

MonotonicityReport monotonicity_audit(const QuantileFit& fit, const RegressionData& data) {
  if (fit.taus.size() != fit.fits.size()) throw std::invalid_argument("quantile fit has mismatched taus and fits");
  MonotonicityReport report;
  report.taus = fit.taus;
  const Eigen::MatrixXd D = data.design();
  for (const auto& f : fit.fits) {
    if (static_cast<std::size_t>(f.beta.size()) != data.p() + 1) {
      throw std::invalid_argument("quantile fit dimension does not match the data");
    }
    const Eigen::VectorXd fitted = D * f.beta;
    std::size_t below = 0;
    for (Eigen::Index i = 0; i < fitted.size(); ++i) {
      if (data.y()(i) < fitted(i)) ++below;
    }
    report.below_fraction.push_back(static_cast<double>(below) / static_cast<double>(data.n()));
  }
  for (std::size_t k = 1; k < report.below_fraction.size(); ++k) {
    if (report.below_fraction[k] < report.below_fraction[k - 1]) ++report.violations;
  }
  return report;
}

}  // namespace coshfit
