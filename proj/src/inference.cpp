#include "coshfit/inference.hpp"

#include "coshfit/random.hpp"
#include "solver_detail.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace coshfit {

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
}

// Linear interpolation between order statistics (R type 7).
double percentile(std::vector<double> sorted, double q) {
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Summaries over the successful replicates, kept in replicate order.
BootstrapReport summarize(std::vector<std::optional<Eigen::VectorXd>>& rows, Eigen::VectorXd point, double alpha,
                          std::uint64_t seed) {
  BootstrapReport rep;
  rep.alpha = alpha;
  rep.seed = seed;
  rep.replicates = rows.size();
  rep.point = std::move(point);
  const Eigen::Index k = rep.point.size();

  std::size_t ok = 0;
  for (const auto& r : rows) ok += r.has_value() ? 1 : 0;
  rep.failures = rows.size() - ok;
  if (ok == 0) throw std::runtime_error("every bootstrap replicate failed");
  if (static_cast<double>(rep.failures) > 0.1 * static_cast<double>(rows.size())) {
    throw std::runtime_error(std::to_string(rep.failures) + " of " + std::to_string(rows.size()) +
                             " bootstrap replicates failed (more than 10%)");
  }

  rep.estimates.resize(static_cast<Eigen::Index>(ok), k);
  Eigen::Index row = 0;
  for (const auto& r : rows) {
    if (r) rep.estimates.row(row++) = r->transpose();
  }

  rep.se.resize(k);
  rep.ci_lower.resize(k);
  rep.ci_upper.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::VectorXd col = rep.estimates.col(j);
    const double mean = col.mean();
    rep.se(j) = ok > 1 ? std::sqrt((col.array() - mean).square().sum() / static_cast<double>(ok - 1)) : 0.0;
    std::vector<double> v(col.begin(), col.end());
    rep.ci_lower(j) = percentile(v, alpha / 2.0);
    rep.ci_upper(j) = percentile(std::move(v), 1.0 - alpha / 2.0);
  }
  return rep;
}

std::vector<std::size_t> resample_rows(std::size_t n, std::uint64_t seed) {
  UniformStream stream(seed);
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = stream.index(n);
  return rows;
}

// Newton on (theta, log sigma) for the Cauchy negative log-likelihood.
LocationScale cauchy_mle(std::span<const double> data) {
  const double n = static_cast<double>(data.size());
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  double theta = detail::median(sorted);
  const double iqr = percentile(sorted, 0.75) - percentile(sorted, 0.25);
  double s = std::log(iqr > 0.0 ? iqr / 2.0 : (sorted.back() - sorted.front()) / 4.0);

  auto nll = [&](double t, double ls) {
    const double inv = std::exp(-ls);
    double total = n * ls;
    for (double x : data) {
      const double z = (x - t) * inv;
      total += std::log1p(z * z);
    }
    return total;
  };

  for (int iter = 0; iter < 500; ++iter) {
    const double sigma = std::exp(s);
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
    g(1) = n;
    for (double x : data) {
      const double z = (x - theta) / sigma;
      const double d = 1.0 + z * z;
      // derivatives of log(1 + z^2) in theta and log sigma, with dz/dtheta = -1/sigma, dz/ds = -z
      g(0) += -2.0 * z / (d * sigma);
      g(1) += -2.0 * z * z / d;
      H(0, 0) += 2.0 * (1.0 - z * z) / (d * d * sigma * sigma);
      H(0, 1) += 4.0 * z / (d * d * sigma);
      H(1, 1) += 4.0 * z * z / (d * d);
    }
    H(1, 0) = H(0, 1);
    if (g.cwiseAbs().maxCoeff() < 1e-10 * n) break;

    Eigen::Vector2d dir;
    Eigen::LDLT<Eigen::Matrix2d> ldlt(H);
    if (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0) {
      dir = -ldlt.solve(g);
    } else {
      dir = -g.cwiseQuotient(H.diagonal().cwiseAbs().cwiseMax(1.0));
    }
    if (!(g.dot(dir) < 0.0)) dir = -g;
    const double f0 = nll(theta, s);
    bool moved = false;
    for (double t = 1.0; t > 1e-14; t *= 0.5) {
      if (nll(theta + t * dir(0), s + t * dir(1)) <= f0 + 1e-4 * t * g.dot(dir)) {
        theta += t * dir(0);
        s += t * dir(1);
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return {theta, std::exp(s)};
}

}  // namespace

double asymptotic_variance(double sigma, std::size_t n) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be finite and > 0");
  if (n == 0) throw std::invalid_argument("n must be at least 1");
  return 2.0 * sigma * sigma / static_cast<double>(n);
}

Interval confidence_interval(double theta_hat, double sigma, std::size_t n, double alpha) {
  require_alpha(alpha);
  const double half = normal_quantile(1.0 - alpha / 2.0) * std::sqrt(asymptotic_variance(sigma, n));
  return {theta_hat - half, theta_hat + half};
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

ParametricBootstrapReport parametric_bootstrap(const DistSpec& spec, std::size_t n, std::size_t replicates,
                                               std::uint64_t seed, double alpha) {
  if (spec.kind() != DistKind::Cosh) throw std::invalid_argument("parametric bootstrap expects a Cosh distribution");
  if (n < 2) throw std::invalid_argument("parametric bootstrap needs n >= 2");
  if (replicates == 0) throw std::invalid_argument("replicates must be at least 1");
  require_alpha(alpha);

  std::vector<std::optional<Eigen::VectorXd>> rows(replicates);
  parallel_for(replicates, [&](std::size_t b) {
    const auto x = sample(spec, n, derive_seed(seed, b));
    try {
      const LocationScale fit = fit_location_scale(x);
      rows[b] = Eigen::Vector2d(fit.theta(), fit.sigma());
    } catch (const DegenerateScaleError&) {
    }
  });

  ParametricBootstrapReport out;
  out.report = summarize(rows, Eigen::Vector2d(spec.params().theta(), spec.params().sigma()), alpha, seed);
  out.n = n;
  out.mean_theta = out.report.estimates.col(0).mean();
  out.mean_sigma = out.report.estimates.col(1).mean();
  out.n_var_theta = static_cast<double>(n) * out.report.se(0) * out.report.se(0);
  return out;
}

BootstrapReport bootstrap_se(std::span<const double> data, const LossSpec& spec, std::size_t replicates,
                             std::uint64_t seed, double alpha) {
  if (data.empty()) throw std::invalid_argument("bootstrap needs data");
  if (replicates == 0) throw std::invalid_argument("replicates must be at least 1");
  require_alpha(alpha);

  const FitResult base = fit_location(data, spec);
  std::vector<std::optional<Eigen::VectorXd>> rows(replicates);
  parallel_for(replicates, [&](std::size_t b) {
    const auto idx = resample_rows(data.size(), derive_seed(seed, b));
    std::vector<double> x(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) x[i] = data[idx[i]];
    try {
      FitResult fit = fit_location(x, spec);
      if (fit.converged) rows[b] = std::move(fit.beta);
    } catch (const std::runtime_error&) {
    }
  });
  return summarize(rows, base.beta, alpha, seed);
}

BootstrapReport bootstrap_se(const RegressionData& data, const LossSpec& spec, std::size_t replicates,
                             std::uint64_t seed, double alpha, Resampling scheme) {
  if (replicates == 0) throw std::invalid_argument("replicates must be at least 1");
  require_alpha(alpha);

  const FitResult base = fit_linear(data, spec);
  const Eigen::VectorXd fitted = data.design() * base.beta;
  const Eigen::VectorXd resid = data.y() - fitted;
  std::vector<std::optional<Eigen::VectorXd>> rows(replicates);
  parallel_for(replicates, [&](std::size_t b) {
    const auto idx = resample_rows(data.n(), derive_seed(seed, b));
    try {
      FitResult fit;
      if (scheme == Resampling::Cases) {
        fit = fit_linear(data.subset(idx), spec);
      } else {
        Eigen::VectorXd y = fitted;
        for (std::size_t i = 0; i < idx.size(); ++i) y(static_cast<Eigen::Index>(i)) += resid(static_cast<Eigen::Index>(idx[i]));
        fit = fit_linear(RegressionData(std::move(y), data.X()), spec);
      }
      if (fit.converged) rows[b] = std::move(fit.beta);
    } catch (const std::runtime_error&) {
    } catch (const std::invalid_argument&) {
    }
  });
  return summarize(rows, base.beta, alpha, seed);
}

double ks_statistic(std::span<const double> data, const DistSpec& spec) {
  if (data.empty()) throw std::invalid_argument("ks statistic needs data");
  std::vector<double> x(data.begin(), data.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(spec, x[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
  }
  return d;
}

double kolmogorov_pvalue(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.18) {
    // Jacobi theta form, which converges quickly for small lambda.
    const double c = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double m = 2.0 * k - 1.0;
      sum += std::exp(c * m * m);
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

LocationScale fit_mle(std::span<const double> data, DistKind kind) {
  if (data.size() < 2) throw std::invalid_argument("MLE needs at least two observations");
  const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
  if (!(*hi > *lo)) throw DegenerateScaleError("all observations are equal; scale is not identifiable");
  switch (kind) {
    case DistKind::Gaussian: {
      const double n = static_cast<double>(data.size());
      double mean = 0.0;
      for (double x : data) mean += x;
      mean /= n;
      double ss = 0.0;
      for (double x : data) ss += (x - mean) * (x - mean);
      return {mean, std::sqrt(ss / n)};
    }
    case DistKind::Cauchy:
      return cauchy_mle(data);
    case DistKind::Cosh:
      return fit_location_scale(data);
    case DistKind::SkewedCosh:
      break;
  }
  throw std::invalid_argument("MLE is available for gaussian, cauchy and cosh");
}

GofReport ks_test(std::span<const double> residuals, DistKind kind) {
  if (residuals.size() < 5) throw std::invalid_argument("ks test needs at least five residuals");
  GofReport rep;
  rep.kind = kind;
  rep.n = residuals.size();
  rep.fitted = fit_mle(residuals, kind);
  rep.statistic_D = ks_statistic(residuals, DistSpec::make(kind, rep.fitted));
  rep.p_value = kolmogorov_pvalue(std::sqrt(static_cast<double>(rep.n)) * rep.statistic_D);
  return rep;
}

}  // namespace coshfit
