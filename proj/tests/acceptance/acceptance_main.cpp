// Acceptance run: one PASS/FAIL line per criterion, details indented below it.
// Exit status is nonzero when any criterion fails.

#include "../oracles.hpp"
#include "coshfit/datasets.hpp"
#include "coshfit/distributions.hpp"
#include "coshfit/inference.hpp"
#include "coshfit/losses.hpp"
#include "coshfit/random.hpp"
#include "coshfit/solvers.hpp"

#include <fmt/format.h>

#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace coshfit;

namespace {

class Criterion {
 public:
  explicit Criterion(std::string title) : title_(std::move(title)), start_(std::chrono::steady_clock::now()) {}

  void check(bool ok, const std::string& detail) {
    pass_ = pass_ && ok;
    details_.push_back(fmt::format("{} {}", ok ? "ok  " : "FAIL", detail));
  }

  void note(const std::string& detail) { details_.push_back("     " + detail); }

  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  void runtime_under(double limit) {
    const double s = seconds();
    check(s < limit, fmt::format("runtime {:.2f} s (limit {} s)", s, limit));
  }

  bool finish() const {
    fmt::print("[{}] {}\n", pass_ ? "PASS" : "FAIL", title_);
    for (const auto& d : details_) fmt::print("    {}\n", d);
    std::fflush(stdout);
    return pass_;
  }

 private:
  std::string title_;
  std::chrono::steady_clock::time_point start_;
  bool pass_ = true;
  std::vector<std::string> details_;
};

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }

bool within_rel(double value, double target, double rel) { return std::abs(value - target) <= rel * std::abs(target); }

std::span<const double> span_of(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

bool c1_parametric_bootstrap() {
  Criterion c("C1 parametric bootstrap of the Cosh location (B=10000, n=100)");
  const std::array<std::pair<double, double>, 4> configs{{{0.0, 1.0}, {0.0, 3.0}, {5.0, 2.0}, {5.0, 3.0}}};
  for (std::size_t row = 0; row < configs.size(); ++row) {
    const auto [theta, sigma] = configs[row];
    const auto rep = parametric_bootstrap(DistSpec::cosh({theta, sigma}), 100, 10000, derive_seed(42, row));
    const double analytic = 2.0 * sigma * sigma;
    c.check(within(rep.mean_theta, theta, 0.05),
            fmt::format("({}, {}) mean theta_hat {:.4f} (target {} +/- 0.05)", theta, sigma, rep.mean_theta, theta));
    c.check(within_rel(rep.n_var_theta, analytic, 0.10),
            fmt::format("({}, {}) n Var(theta_hat) {:.3f} (target {} +/- 10%)", theta, sigma, rep.n_var_theta,
                        analytic));
    c.check(within_rel(rep.mean_sigma, sigma, 0.05),
            fmt::format("({}, {}) mean sigma_hat {:.4f} (target {} +/- 5%)", theta, sigma, rep.mean_sigma, sigma));
  }
  c.runtime_under(60.0);
  return c.finish();
}

bool c2_location_table() {
  Criterion c("C2 location estimates and bootstrap s.e. on the 25-point dataset");
  const auto d = builtin("location25");
  const auto y = span_of(d.y);
  struct Row {
    LossSpec spec;
    double theta;
    double theta_tol;
    double se;
    double se_tol;
  };
  const std::vector<Row> rows{{LossSpec::l2(), 0.73, 0.005, 0.84, 0.1},
                              {LossSpec::log_cosh(), -0.06, 0.01, 0.28, 0.05},
                              {LossSpec::cauchy(), -0.19, 0.03, 0.28, 0.05}};
  for (const auto& r : rows) {
    const FitResult fit = fit_location(y, r.spec);
    const BootstrapReport b = bootstrap_se(y, r.spec, 2000, 7);
    c.check(fit.converged && within(fit.beta(0), r.theta, r.theta_tol),
            fmt::format("{:<8} theta_hat {:.5f} (target {} +/- {})", r.spec.name(), fit.beta(0), r.theta,
                        r.theta_tol));
    c.check(within(b.se(0), r.se, r.se_tol),
            fmt::format("{:<8} bootstrap s.e. {:.4f} (target {} +/- {}, B=2000)", r.spec.name(), b.se(0), r.se,
                        r.se_tol));
  }
  c.runtime_under(30.0);
  return c.finish();
}

bool c3_telephone() {
  Criterion c("C3 telephone regression (slope, intercept)");
  const RegressionData data = builtin("telephone").to_regression_data();
  struct Row {
    LossSpec spec;
    double slope;
    double intercept;
    double rel;
  };
  const std::vector<Row> rows{{LossSpec::l2(), 0.504, -983.9, 0.005},
                              {LossSpec::log_cosh(), 0.173, -338.1, 0.02},
                              {LossSpec::huber(0.1), 0.143, -280.0, 0.02},
                              {LossSpec::rank(), 0.146, -284.3, 0.05}};
  for (const auto& r : rows) {
    const FitResult fit = fit_linear(data, r.spec);
    const bool ok = fit.converged && within_rel(fit.beta(1), r.slope, r.rel) &&
                    within_rel(fit.beta(0), r.intercept, r.rel);
    c.check(ok, fmt::format("{:<12} slope {:.5f} intercept {:.3f} (target {}, {} +/- {}%)", r.spec.name(),
                            fit.beta(1), fit.beta(0), r.slope, r.intercept, r.rel * 100.0));
  }
  c.runtime_under(10.0);
  return c.finish();
}

bool c4_kappa() {
  Criterion c("C4 normalizer kappa(tau) by quadrature against closed forms");
  const double pi = std::numbers::pi;
  const double mid = pi * std::sqrt(4.0 - 2.0 * std::sqrt(2.0));
  const std::array<std::pair<double, double>, 5> table{
      {{0.0, pi * std::sqrt(2.0)}, {0.25, mid}, {0.5, pi}, {0.75, mid}, {1.0, pi * std::sqrt(2.0)}}};
  for (const auto& [tau, expected] : table) {
    const double k = kappa(tau);
    c.check(within(k, expected, 1e-8), fmt::format("tau={:<4} kappa {:.12f} closed form {:.12f} |diff| {:.2e}", tau,
                                                   k, expected, std::abs(k - expected)));
  }
  return c.finish();
}

bool c5_fisher() {
  Criterion c("C5 Fisher information for the location");
  for (double sigma : {1.0, 2.0, 3.0}) {
    const double q = fisher_information_quadrature(DistSpec::cosh({0.0, sigma}));
    const double expected = 1.0 / (2.0 * sigma * sigma);
    c.check(within(q, expected, 1e-8),
            fmt::format("Cosh sigma={} quadrature {:.12f} vs {:.12f}", sigma, q, expected));
  }
  const double skew = fisher_information(DistSpec::skewed_cosh(0.5));
  c.check(within(skew, 0.5, 1e-8), fmt::format("SkewedCosh tau=0.5 {:.12f} vs 0.5", skew));
  return c.finish();
}

bool c6_gof() {
  Criterion c("C6 KS goodness of fit on L2 telephone residuals");
  const auto d = builtin("telephone");
  const RegressionData data = d.to_regression_data();
  const FitResult fit = fit_linear(data, LossSpec::l2());
  const Eigen::VectorXd r = data.y() - data.design() * fit.beta;
  for (DistKind kind : {DistKind::Gaussian, DistKind::Cauchy, DistKind::Cosh}) {
    const GofReport g = ks_test(span_of(r), kind);
    const bool want_reject = kind == DistKind::Gaussian;
    const bool ok = want_reject ? g.p_value < 0.05 : g.p_value > 0.05;
    c.check(ok, fmt::format("{:<8} D {:.4f} p {:.4f} (expected p {} 0.05)", to_string(kind), g.statistic_D,
                            g.p_value, want_reject ? "<" : ">"));
  }
  return c.finish();
}

bool c7_swiss() {
  Criterion c("C7 Swiss fertility regression: coefficients and bootstrap s.e.");
  const std::filesystem::path path = std::filesystem::path(COSHFIT_DATA_DIR) / "swiss.csv";
  const RegressionData data = load_csv(path, "Fertility").to_regression_data();
  const std::array<const char*, 5> names{"A", "Ex", "Ed", "C", "IM"};
  struct Column {
    LossSpec spec;
    const char* label;
    std::array<double, 5> beta;
    std::array<double, 5> se;
  };
  const std::vector<Column> columns{
      {LossSpec::huber(1.345, HuberScale::Mad), "Huber", {-0.19, -0.28, -0.84, 0.10, 1.21},
       {0.071, 0.258, 0.186, 0.035, 0.388}},
      {LossSpec::rank(), "Rank", {-0.20, -0.25, -0.88, 0.10, 1.19}, {0.069, 0.249, 0.179, 0.034, 0.375}},
      {LossSpec::log_cosh(), "LogCosh", {-0.20, -0.26, -0.89, 0.10, 1.40}, {0.075, 0.264, 0.190, 0.035, 0.395}}};
  for (const auto& col : columns) {
    const FitResult fit = fit_linear(data, col.spec);
    const BootstrapReport resid = bootstrap_se(data, col.spec, 2000, 11, 0.05, Resampling::Residuals);
    const BootstrapReport cases = bootstrap_se(data, col.spec, 2000, 11, 0.05, Resampling::Cases);
    for (std::size_t j = 0; j < names.size(); ++j) {
      const auto k = static_cast<Eigen::Index>(j + 1);
      c.check(fit.converged && within(fit.beta(k), col.beta[j], 0.05),
              fmt::format("{:<8} {:<3} beta {:+.4f} (target {:+.2f} +/- 0.05)", col.label, names[j], fit.beta(k),
                          col.beta[j]));
      c.check(within_rel(resid.se(k), col.se[j], 0.15),
              fmt::format("{:<8} {:<3} s.e. {:.4f} residual resampling (target {:.3f} +/- 15%); case resampling {:.4f}",
                          col.label, names[j], resid.se(k), col.se[j], cases.se(k)));
    }
  }
  c.note(fmt::format("B=2000, seed 11, runtime {:.2f} s", c.seconds()));
  return c.finish();
}

bool c8_monotonicity() {
  Criterion c("C8 SMRQ decile fits on Swiss data do not cross");
  const std::filesystem::path path = std::filesystem::path(COSHFIT_DATA_DIR) / "swiss.csv";
  const RegressionData data = load_csv(path, "Fertility").to_regression_data();
  std::vector<double> taus;
  for (int k = 1; k <= 9; ++k) taus.push_back(0.1 * k);
  const QuantileFit q = fit_quantiles(data, taus);
  bool converged = true;
  for (const auto& f : q.fits) converged = converged && f.converged;
  const MonotonicityReport m = monotonicity_audit(q, data);
  std::string fractions;
  for (double f : m.below_fraction) fractions += fmt::format(" {:.3f}", f);
  c.check(converged, "all nine fits converged");
  c.check(m.violations == 0, fmt::format("violations {} ; below-fractions{}", m.violations, fractions));
  return c.finish();
}

bool c9_properties() {
  Criterion c("C9 property suites");

  double round_trip = 0.0;
  for (const DistSpec& spec : {DistSpec::cosh({1.0, 2.0}), DistSpec::cauchy({-1.0, 0.5}), DistSpec::gaussian({3.0, 2.0})}) {
    for (int i = 1; i < 1000; ++i) {
      const double u = i / 1000.0;
      round_trip = std::max(round_trip, std::abs(cdf(spec, inv_cdf(spec, u)) - u));
    }
  }
  c.check(round_trip < 1e-10, fmt::format("cdf(inv_cdf(u)) max error {:.2e} (< 1e-10)", round_trip));

  double norm_err = 0.0;
  for (double theta : {-2.0, 0.0, 3.0}) {
    for (double sigma : {0.5, 1.0, 2.0}) {
      const DistSpec spec = DistSpec::cosh({theta, sigma});
      const double mass = oracle::simpson([&](double x) { return pdf(spec, x); }, theta - 80.0 * sigma,
                                          theta + 80.0 * sigma, 400000);
      norm_err = std::max(norm_err, std::abs(mass - 1.0));
    }
  }
  for (double tau : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    const DistSpec spec = DistSpec::skewed_cosh(tau);
    const double mass = oracle::simpson([&](double x) { return pdf(spec, x); }, -200.0, 200.0, 400000);
    norm_err = std::max(norm_err, std::abs(mass - 1.0));
  }
  c.check(norm_err < 1e-8, fmt::format("pdf integrates to 1: max error {:.2e} (< 1e-8)", norm_err));

  const std::vector<LossSpec> smooth{LossSpec::l2(),         LossSpec::log_cosh(),          LossSpec::huber(1.345),
                                     LossSpec::cauchy(),     LossSpec::smoothed_check(0.3), LossSpec::smrq({})};
  double psi_err = 0.0;
  double psi_prime_err = 0.0;
  for (const auto& spec : smooth) {
    for (int i = -100; i <= 100; ++i) {
      const double x = 0.1 * i + 0.013;
      if (spec.kind() == LossKind::Huber && std::abs(std::abs(x) - spec.delta()) < 1e-4) continue;
      psi_err = std::max(psi_err, std::abs(psi(spec, x) - oracle::derivative([&](double v) { return rho(spec, v); }, x)));
      psi_prime_err = std::max(
          psi_prime_err, std::abs(psi_prime(spec, x) - oracle::derivative([&](double v) { return psi(spec, v); }, x)));
    }
  }
  c.check(psi_err < 1e-6, fmt::format("psi vs finite difference of rho: {:.2e} (< 1e-6)", psi_err));
  c.check(psi_prime_err < 1e-6, fmt::format("psi' vs finite difference of psi: {:.2e} (< 1e-6)", psi_prime_err));

  double tail_err = 0.0;
  for (double x = 30.0; x < 1e6; x *= 1.3) {
    tail_err = std::max(tail_err, std::abs(stable_logcosh(x) - (x - std::numbers::ln2)) / std::max(1.0, x * 1e-3));
    tail_err = std::max(tail_err, std::abs(stable_logcosh(-x) - (x - std::numbers::ln2)) / std::max(1.0, x * 1e-3));
  }
  const double big = std::numeric_limits<double>::max();
  c.check(tail_err < 1e-12, fmt::format("stable_logcosh tail vs |x| - log 2: {:.2e} (< 1e-12)", tail_err));
  c.check(std::isfinite(stable_logcosh(big)) && std::isfinite(stable_logcosh(-big)),
          "stable_logcosh finite at the largest double");

  const LossSpec cauchy = LossSpec::cauchy();
  c.check(psi(cauchy, 1.0) > psi(cauchy, 3.0),
          fmt::format("CauchyLoss psi(1)={:.4f} > psi(3)={:.4f}", psi(cauchy, 1.0), psi(cauchy, 3.0)));

  std::mt19937_64 gen(2718);
  std::normal_distribution<double> normal(0.0, 2.0);
  std::uniform_int_distribution<int> size(5, 15);
  double golden_err = 0.0;
  for (int instance = 0; instance < 50; ++instance) {
    std::vector<double> x(static_cast<std::size_t>(size(gen)));
    for (auto& v : x) v = normal(gen);
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    const double ref = oracle::golden_section(
        [&](double t) {
          double s = 0.0;
          for (double v : x) s += std::log(std::cosh(v - t));
          return s;
        },
        *lo, *hi);
    golden_err = std::max(golden_err, std::abs(fit_location(x, LossSpec::log_cosh()).beta(0) - ref));
  }
  c.check(golden_err < 1e-6, fmt::format("LogCosh location vs golden section, 50 instances: {:.2e} (< 1e-6)", golden_err));

  const auto loc = builtin("location25");
  const auto a = bootstrap_se(span_of(loc.y), LossSpec::log_cosh(), 300, 5);
  const auto b = bootstrap_se(span_of(loc.y), LossSpec::log_cosh(), 300, 5);
  const auto pa = parametric_bootstrap(DistSpec::cosh(), 50, 100, 8);
  const auto pb = parametric_bootstrap(DistSpec::cosh(), 50, 100, 8);
  c.check(a.estimates == b.estimates && pa.report.estimates == pb.report.estimates,
          "bootstrap replicates bit-identical under a repeated seed");
  return c.finish();
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  int failed = 0;
  failed += c1_parametric_bootstrap() ? 0 : 1;
  failed += c2_location_table() ? 0 : 1;
  failed += c3_telephone() ? 0 : 1;
  failed += c4_kappa() ? 0 : 1;
  failed += c5_fisher() ? 0 : 1;
  failed += c6_gof() ? 0 : 1;
  failed += c7_swiss() ? 0 : 1;
  failed += c8_monotonicity() ? 0 : 1;
  failed += c9_properties() ? 0 : 1;
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  fmt::print("{} of 9 criteria passed ({:.1f} s)\n", 9 - failed, total);
  return failed == 0 ? 0 : 1;
}
