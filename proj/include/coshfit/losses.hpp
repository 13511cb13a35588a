#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coshfit {

enum class LossKind { L2, LogCosh, Huber, CauchyLoss, Check, SmoothedCheck, Smrq, Rank };

/// How a Huber threshold is interpreted by the solvers.
enum class HuberScale {
  Unit,  ///< delta applies to raw residuals
  Mad,   ///< delta multiplies a concomitant MAD scale, re-estimated during the fit
};

/**
 * Parameters of the smooth quantile loss
 *
 *   rho(x) = log(cosh(c (x - h))) / (2 c) + (tau - s) x + v
 *
 * Defaults give log(cosh(x / 2)) + (tau - 1/2) x + 1/2, whose asymptotic
 * slopes tau and tau - 1 match the check function.
 */
struct SmrqParams {
  double tau = 0.5;
  double c = 0.5;
  double h = 0.0;
  double s = 0.5;
  double v = 0.5;
};

/// Tagged loss choice. Only the parameters of the chosen kind are stored.
class LossSpec {
 public:
  static LossSpec l2();
  static LossSpec log_cosh();
  static LossSpec huber(double delta, HuberScale scale = HuberScale::Unit);
  static LossSpec cauchy();
  static LossSpec check(double tau);
  static LossSpec smoothed_check(double tau);
  static LossSpec smrq(SmrqParams params);
  static LossSpec rank();

  LossKind kind() const { return kind_; }
  double delta() const;
  HuberScale huber_scale() const;
  double tau() const;
  const SmrqParams& smrq_params() const;

  /// Short identifier such as "logcosh" or "huber(0.1)".
  std::string name() const;

 private:
  explicit LossSpec(LossKind kind) : kind_(kind) {}

  LossKind kind_;
  double delta_ = 0.0;
  HuberScale huber_scale_ = HuberScale::Unit;
  SmrqParams smrq_{};
};

/// Parses l2 | logcosh | huber | cauchy | rank (the pointwise regression losses).
LossSpec parse_loss(std::string_view name, double delta = 1.345,
                    HuberScale scale = HuberScale::Unit);

/// log(cosh(x)) as |x| + log1p(exp(-2|x|)) - log 2; finite for every finite x.
double stable_logcosh(double x);

/// sech^2(x) without overflow.
double sech_squared(double x);

/// Per-residual loss. Throws std::invalid_argument for LossKind::Rank.
double rho(const LossSpec& spec, double x);

/// d rho / dx. Check uses the right-hand slope tau at x = 0.
double psi(const LossSpec& spec, double x);

/// d^2 rho / dx^2. Throws for Rank and Check. Huber at |x| = delta takes the inner value.
double psi_prime(const LossSpec& spec, double x);

/// Wilcoxon scores a_n(i) = phi(i / (n + 1)), phi(u) = 2u - 1.
class RankScores {
 public:
  explicit RankScores(std::size_t n);

  std::size_t size() const { return scores_.size(); }
  std::span<const double> scores() const { return scores_; }

  /// Score of a (possibly fractional mid-) rank in [1, n].
  double at(double rank) const;

 private:
  std::vector<double> scores_;
};

/// Mid-ranks (1-based) of values; ties share the average of their positions.
std::vector<double> mid_ranks(std::span<const double> values);

/// Jaeckel dispersion sum_i r_i a_n(R(r_i)). Requires at least two residuals.
double rank_objective(std::span<const double> residuals);

}  // namespace coshfit
