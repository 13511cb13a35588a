#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace coshfit {

/// Location/scale pair. Construction rejects sigma <= 0 or non-finite values.
class LocationScale {
 public:
  LocationScale(double theta, double sigma);

  double theta() const { return theta_; }
  double sigma() const { return sigma_; }

  /// Maps x to the standardized coordinate (x - theta) / sigma.
  double standardize(double x) const { return (x - theta_) / sigma_; }

 private:
  double theta_;
  double sigma_;
};

enum class DistKind { Cosh, Cauchy, Gaussian, SkewedCosh };

std::string_view to_string(DistKind kind);
DistKind parse_dist_kind(std::string_view name);

/**
 * Tagged distribution choice.
 *
 * SkewedCosh is the quantile density exp(-(tau - 1/2) z) / (kappa(tau) cosh z)
 * on z = (x - theta) / sigma; it reduces to Cosh at tau = 1/2. tau is carried
 * only by SkewedCosh and must lie in [0, 1].
 */
class DistSpec {
 public:
  static DistSpec cosh(LocationScale params = {0.0, 1.0});
  static DistSpec cauchy(LocationScale params = {0.0, 1.0});
  static DistSpec gaussian(LocationScale params = {0.0, 1.0});
  static DistSpec skewed_cosh(double tau, LocationScale params = {0.0, 1.0});

  /// Generic factory; throws if tau presence does not match the kind.
  static DistSpec make(DistKind kind, LocationScale params, std::optional<double> tau = std::nullopt);

  DistKind kind() const { return kind_; }
  const LocationScale& params() const { return params_; }
  std::optional<double> tau() const { return tau_; }
  /// kappa(tau) for SkewedCosh (computed once at construction); 0 otherwise.
  double normalizer() const { return kappa_; }

 private:
  DistSpec(DistKind kind, LocationScale params, std::optional<double> tau);

  DistKind kind_;
  LocationScale params_;
  std::optional<double> tau_;
  double kappa_ = 0.0;  // cached normalizer for SkewedCosh
};

/// Mean/variance; std::nullopt marks an undefined moment (Cauchy).
struct Moments {
  std::optional<double> mean;
  std::optional<double> variance;
};

double pdf(const DistSpec& spec, double x);
double cdf(const DistSpec& spec, double x);

/// Inverse cdf. Throws std::domain_error for u outside (0, 1).
double inv_cdf(const DistSpec& spec, double u);

/// Inverse-transform sample of size n, deterministic in (spec, n, seed).
std::vector<double> sample(const DistSpec& spec, std::size_t n, std::uint64_t seed);

/// Applies the inverse transform to caller-supplied uniforms.
std::vector<double> sample_from_uniforms(const DistSpec& spec, std::span<const double> uniforms);

Moments moments(const DistSpec& spec);

/// Normalizer of exp(-(tau - 1/2) x) / cosh x over the real line, by quadrature.
double kappa(double tau);

/// Fisher information for the location parameter. Cosh is analytic 1/(2 sigma^2);
/// SkewedCosh is computed by quadrature. Other kinds throw std::invalid_argument.
double fisher_information(const DistSpec& spec);

/// E[(d/dtheta log f)^2] by quadrature, for any kind.
double fisher_information_quadrature(const DistSpec& spec);

/// Standard normal quantile: rational approximation refined by one Halley step.
double normal_quantile(double p);

/// Standard normal cdf.
double normal_cdf(double z);

}  // namespace coshfit
