#include "coshfit/distributions.hpp"

#include "coshfit/quadrature.hpp"
#include "coshfit/random.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace coshfit {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPdfFloor = 1e-16;
constexpr double kWindow = 50.0;

// exp(-(tau - 1/2) z) / cosh z without overflow for any finite z.
double skewed_kernel(double tau, double z) {
  const double a = std::abs(z);
  return 2.0 * std::exp(-(tau - 0.5) * z - a) / (1.0 + std::exp(-2.0 * a));
}

// 1 / cosh z without overflow.
double sech(double z) {
  const double a = std::abs(z);
  const double e = std::exp(-a);
  return 2.0 * e / (1.0 + e * e);
}

// Half-width (in standardized units) beyond which the skewed kernel / kappa
// drops below kPdfFloor on both sides; never narrower than kWindow.
double skewed_half_width(double tau, double kappa_value) {
  const double slowest_rate = std::min(tau + 0.5, 1.5 - tau);
  const double cut = std::log(2.0 / (kappa_value * kPdfFloor)) / slowest_rate;
  return std::max(kWindow, cut);
}

double standard_pdf(const DistSpec& spec, double kappa_value, double z) {
  switch (spec.kind()) {
    case DistKind::Cosh:
      return sech(z) / kPi;
    case DistKind::Cauchy:
      return 1.0 / (kPi * (1.0 + z * z));
    case DistKind::Gaussian:
      return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
    case DistKind::SkewedCosh:
      return skewed_kernel(*spec.tau(), z) / kappa_value;
  }
  return 0.0;
}

// d/dz log g(z) for the standardized density g.
double standard_score(const DistSpec& spec, double z) {
  switch (spec.kind()) {
    case DistKind::Cosh:
      return -std::tanh(z);
    case DistKind::Cauchy:
      return -2.0 * z / (1.0 + z * z);
    case DistKind::Gaussian:
      return -z;
    case DistKind::SkewedCosh:
      return -(std::tanh(z) + *spec.tau() - 0.5);
  }
  return 0.0;
}

void check_tau(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("tau must lie in [0, 1], got " + std::to_string(tau));
  }
}

double skewed_kappa_of(const DistSpec& spec) { return spec.normalizer(); }

// Integral of h(z) * g(z) over the standardized support.
double expect_standard(const DistSpec& spec, const std::function<double(double)>& h) {
  const double k = spec.kind() == DistKind::SkewedCosh ? skewed_kappa_of(spec) : 1.0;
  auto integrand = [&](double z) { return h(z) * standard_pdf(spec, k, z); };
  if (spec.kind() == DistKind::Cauchy) {
    const double inf = std::numeric_limits<double>::infinity();
    return integrate(integrand, -inf, 0.0) + integrate(integrand, 0.0, inf);
  }
  const double w = spec.kind() == DistKind::SkewedCosh ? skewed_half_width(*spec.tau(), k) : kWindow;
  return integrate(integrand, -w, 0.0) + integrate(integrand, 0.0, w);
}

double skewed_standard_cdf(double tau, double kappa_value, double z) {
  const double w = skewed_half_width(tau, kappa_value);
  if (z <= -w) return 0.0;
  if (z >= w) return 1.0;
  auto g = [&](double t) { return skewed_kernel(tau, t) / kappa_value; };
  // Integrate over the shorter side for accuracy near either tail.
  double value = 0.0;
  if (z <= 0.0) {
    value = integrate(g, -w, z);
  } else {
    value = 1.0 - integrate(g, z, w);
  }
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace

LocationScale::LocationScale(double theta, double sigma) : theta_(theta), sigma_(sigma) {
  if (!std::isfinite(theta)) throw std::invalid_argument("location must be finite");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("scale must be finite and > 0, got " + std::to_string(sigma));
  }
}

std::string_view to_string(DistKind kind) {
  switch (kind) {
    case DistKind::Cosh:
      return "cosh";
    case DistKind::Cauchy:
      return "cauchy";
    case DistKind::Gaussian:
      return "gaussian";
    case DistKind::SkewedCosh:
      return "skewed";
  }
  return "unknown";
}

DistKind parse_dist_kind(std::string_view name) {
  if (name == "cosh") return DistKind::Cosh;
  if (name == "cauchy") return DistKind::Cauchy;
  if (name == "gaussian" || name == "normal") return DistKind::Gaussian;
  if (name == "skewed" || name == "skewed-cosh") return DistKind::SkewedCosh;
  throw std::invalid_argument("unknown distribution '" + std::string(name) +
                              "' (expected cosh, cauchy, gaussian or skewed)");
}

DistSpec::DistSpec(DistKind kind, LocationScale params, std::optional<double> tau)
    : kind_(kind), params_(params), tau_(tau) {
  if (kind == DistKind::SkewedCosh) {
    if (!tau) throw std::invalid_argument("skewed cosh distribution requires tau");
    check_tau(*tau);
    kappa_ = kappa(*tau);
  } else if (tau) {
    throw std::invalid_argument("tau is only meaningful for the skewed cosh distribution");
  }
}

DistSpec DistSpec::cosh(LocationScale params) { return {DistKind::Cosh, params, std::nullopt}; }
DistSpec DistSpec::cauchy(LocationScale params) { return {DistKind::Cauchy, params, std::nullopt}; }
DistSpec DistSpec::gaussian(LocationScale params) { return {DistKind::Gaussian, params, std::nullopt}; }
DistSpec DistSpec::skewed_cosh(double tau, LocationScale params) {
  return {DistKind::SkewedCosh, params, tau};
}
DistSpec DistSpec::make(DistKind kind, LocationScale params, std::optional<double> tau) {
  return {kind, params, tau};
}

double pdf(const DistSpec& spec, double x) {
  const auto& p = spec.params();
  const double k = spec.kind() == DistKind::SkewedCosh ? skewed_kappa_of(spec) : 1.0;
  return standard_pdf(spec, k, p.standardize(x)) / p.sigma();
}

double cdf(const DistSpec& spec, double x) {
  const double z = spec.params().standardize(x);
  switch (spec.kind()) {
    case DistKind::Cosh:
      // 1/2 + atan(sinh z)/pi == (2/pi) atan(e^z); the latter keeps the lower tail.
      return 2.0 / kPi * std::atan(std::exp(z));
    case DistKind::Cauchy:
      return std::atan2(1.0, -z) / kPi;
    case DistKind::Gaussian:
      return normal_cdf(z);
    case DistKind::SkewedCosh:
      return skewed_standard_cdf(*spec.tau(), skewed_kappa_of(spec), z);
  }
  return 0.0;
}

double inv_cdf(const DistSpec& spec, double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("inverse cdf requires 0 < u < 1, got " + std::to_string(u));
  }
  const auto& p = spec.params();
  double z = 0.0;
  switch (spec.kind()) {
    case DistKind::Cosh:
      z = std::asinh(std::tan((u - 0.5) * kPi));
      break;
    case DistKind::Cauchy:
      z = std::tan((u - 0.5) * kPi);
      break;
    case DistKind::Gaussian:
      z = normal_quantile(u);
      break;
    case DistKind::SkewedCosh: {
      const double tau = *spec.tau();
      const double k = skewed_kappa_of(spec);
      double lo = -skewed_half_width(tau, k);
      double hi = -lo;
      for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (skewed_standard_cdf(tau, k, mid) < u) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      z = 0.5 * (lo + hi);
      break;
    }
  }
  return p.theta() + p.sigma() * z;
}

std::vector<double> sample_from_uniforms(const DistSpec& spec, std::span<const double> uniforms) {
  std::vector<double> out;
  out.reserve(uniforms.size());
  for (double u : uniforms) out.push_back(inv_cdf(spec, u));
  return out;
}

std::vector<double> sample(const DistSpec& spec, std::size_t n, std::uint64_t seed) {
  UniformStream stream(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = inv_cdf(spec, stream.next());
  return out;
}

Moments moments(const DistSpec& spec) {
  const auto& p = spec.params();
  switch (spec.kind()) {
    case DistKind::Cosh:
      return {p.theta(), kPi * kPi * p.sigma() * p.sigma() / 4.0};
    case DistKind::Gaussian:
      return {p.theta(), p.sigma() * p.sigma()};
    case DistKind::Cauchy:
      return {std::nullopt, std::nullopt};
    case DistKind::SkewedCosh: {
      const double m1 = expect_standard(spec, [](double z) { return z; });
      const double m2 = expect_standard(spec, [](double z) { return z * z; });
      const double var = std::max(0.0, m2 - m1 * m1);
      return {p.theta() + p.sigma() * m1, p.sigma() * p.sigma() * var};
    }
  }
  return {};
}

double kappa(double tau) {
  check_tau(tau);
  auto kernel = [tau](double z) { return skewed_kernel(tau, z); };
  // Bound the window with the unnormalized tail (kappa >= pi), then integrate.
  const double w = skewed_half_width(tau, kPi);
  return integrate(kernel, -w, 0.0) + integrate(kernel, 0.0, w);
}

double fisher_information_quadrature(const DistSpec& spec) {
  const double s2 = spec.params().sigma() * spec.params().sigma();
  const double standard = expect_standard(spec, [&](double z) {
    const double s = standard_score(spec, z);
    return s * s;
  });
  return standard / s2;
}

double fisher_information(const DistSpec& spec) {
  switch (spec.kind()) {
    case DistKind::Cosh: {
      const double s = spec.params().sigma();
      return 1.0 / (2.0 * s * s);
    }
    case DistKind::SkewedCosh:
      return fisher_information_quadrature(spec);
    default:
      throw std::invalid_argument("fisher_information is defined here for cosh and skewed cosh only");
  }
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal quantile requires 0 < p < 1, got " + std::to_string(p));
  }
  // Acklam's rational approximation.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x = 0.0;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // One Halley step against the erfc-based cdf.
  const double e = (p < 0.5 ? normal_cdf(x) - p : -(normal_cdf(-x) - (1.0 - p)));
  const double u = e * std::sqrt(2.0 * kPi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

}  // namespace coshfit
