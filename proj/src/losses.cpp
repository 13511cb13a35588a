#include "coshfit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace coshfit {

namespace {

void require_open_unit(double tau, const char* what) {
  if (!(tau > 0.0 && tau < 1.0)) {
    std::ostringstream msg;
    msg << what << " requires 0 < tau < 1, got " << tau;
    throw std::invalid_argument(msg.str());
  }
}

[[noreturn]] void reject_rank(const char* op) {
  throw std::invalid_argument(std::string(op) +
                              " is not defined pointwise for the rank loss; use rank_objective");
}

}  // namespace

LossSpec LossSpec::l2() { return LossSpec(LossKind::L2); }
LossSpec LossSpec::log_cosh() { return LossSpec(LossKind::LogCosh); }
LossSpec LossSpec::cauchy() { return LossSpec(LossKind::CauchyLoss); }
LossSpec LossSpec::rank() { return LossSpec(LossKind::Rank); }

LossSpec LossSpec::huber(double delta, HuberScale scale) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("huber delta must be finite and > 0");
  }
  LossSpec spec(LossKind::Huber);
  spec.delta_ = delta;
  spec.huber_scale_ = scale;
  return spec;
}

LossSpec LossSpec::check(double tau) {
  require_open_unit(tau, "check loss");
  LossSpec spec(LossKind::Check);
  spec.smrq_.tau = tau;
  return spec;
}

LossSpec LossSpec::smoothed_check(double tau) {
  require_open_unit(tau, "smoothed check loss");
  LossSpec spec(LossKind::SmoothedCheck);
  spec.smrq_.tau = tau;
  return spec;
}

LossSpec LossSpec::smrq(SmrqParams params) {
  require_open_unit(params.tau, "smrq loss");
  if (!(params.c > 0.0) || !std::isfinite(params.c)) {
    throw std::invalid_argument("smrq curvature c must be finite and > 0");
  }
  if (!std::isfinite(params.h) || !std::isfinite(params.s) || !std::isfinite(params.v)) {
    throw std::invalid_argument("smrq parameters h, s, v must be finite");
  }
  LossSpec spec(LossKind::Smrq);
  spec.smrq_ = params;
  return spec;
}

double LossSpec::delta() const {
  if (kind_ != LossKind::Huber) throw std::logic_error("delta is only defined for the huber loss");
  return delta_;
}

HuberScale LossSpec::huber_scale() const {
  if (kind_ != LossKind::Huber) throw std::logic_error("scale mode is only defined for the huber loss");
  return huber_scale_;
}

double LossSpec::tau() const {
  if (kind_ != LossKind::Check && kind_ != LossKind::SmoothedCheck && kind_ != LossKind::Smrq) {
    throw std::logic_error("tau is only defined for quantile losses");
  }
  return smrq_.tau;
}

const SmrqParams& LossSpec::smrq_params() const {
  if (kind_ != LossKind::Smrq) throw std::logic_error("smrq parameters requested for another loss");
  return smrq_;
}

std::string LossSpec::name() const {
  std::ostringstream out;
  switch (kind_) {
    case LossKind::L2:
      return "l2";
    case LossKind::LogCosh:
      return "logcosh";
    case LossKind::Huber:
      out << "huber(" << delta_ << (huber_scale_ == HuberScale::Mad ? ", mad" : "") << ")";
      return out.str();
    case LossKind::CauchyLoss:
      return "cauchy";
    case LossKind::Check:
      out << "check(" << smrq_.tau << ")";
      return out.str();
    case LossKind::SmoothedCheck:
      out << "smoothed-check(" << smrq_.tau << ")";
      return out.str();
    case LossKind::Smrq:
      out << "smrq(tau=" << smrq_.tau << ", c=" << smrq_.c << ", h=" << smrq_.h
          << ", s=" << smrq_.s << ", v=" << smrq_.v << ")";
      return out.str();
    case LossKind::Rank:
      return "rank";
  }
  return "unknown";
}

LossSpec parse_loss(std::string_view name, double delta, HuberScale scale) {
  if (name == "l2" || name == "ls") return LossSpec::l2();
  if (name == "logcosh" || name == "log-cosh") return LossSpec::log_cosh();
  if (name == "huber") return LossSpec::huber(delta, scale);
  if (name == "cauchy") return LossSpec::cauchy();
  if (name == "rank") return LossSpec::rank();
  throw std::invalid_argument("unknown loss '" + std::string(name) +
                              "' (expected l2, logcosh, huber, cauchy or rank)");
}

double stable_logcosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double sech_squared(double x) {
  const double e = std::exp(-2.0 * std::abs(x));
  const double d = 1.0 + e;
  return 4.0 * e / (d * d);
}

double rho(const LossSpec& spec, double x) {
  switch (spec.kind()) {
    case LossKind::L2:
      return 0.5 * x * x;
    case LossKind::LogCosh:
      return stable_logcosh(x);
    case LossKind::Huber: {
      const double d = spec.delta();
      const double a = std::abs(x);
      return a <= d ? 0.5 * x * x : d * (a - 0.5 * d);
    }
    case LossKind::CauchyLoss:
      return std::log1p(x * x);
    case LossKind::Check: {
      const double tau = spec.tau();
      return x < 0.0 ? -(1.0 - tau) * x : tau * x;
    }
    case LossKind::SmoothedCheck:
      return stable_logcosh(x) + (spec.tau() - 0.5) * x;
    case LossKind::Smrq: {
      const auto& p = spec.smrq_params();
      return stable_logcosh(p.c * (x - p.h)) / (2.0 * p.c) + (p.tau - p.s) * x + p.v;
    }
    case LossKind::Rank:
      reject_rank("rho");
  }
  return 0.0;
}

double psi(const LossSpec& spec, double x) {
  switch (spec.kind()) {
    case LossKind::L2:
      return x;
    case LossKind::LogCosh:
      return std::tanh(x);
    case LossKind::Huber: {
      const double d = spec.delta();
      return std::clamp(x, -d, d);
    }
    case LossKind::CauchyLoss:
      return 2.0 * x / (1.0 + x * x);
    case LossKind::Check:
      return x < 0.0 ? spec.tau() - 1.0 : spec.tau();
    case LossKind::SmoothedCheck:
      return std::tanh(x) + spec.tau() - 0.5;
    case LossKind::Smrq: {
      const auto& p = spec.smrq_params();
      return 0.5 * std::tanh(p.c * (x - p.h)) + p.tau - p.s;
    }
    case LossKind::Rank:
      reject_rank("psi");
  }
  return 0.0;
}

double psi_prime(const LossSpec& spec, double x) {
  switch (spec.kind()) {
    case LossKind::L2:
      return 1.0;
    case LossKind::LogCosh:
    case LossKind::SmoothedCheck:
      return sech_squared(x);
    case LossKind::Huber:
      return std::abs(x) <= spec.delta() ? 1.0 : 0.0;
    case LossKind::CauchyLoss: {
      const double d = 1.0 + x * x;
      return 2.0 * (1.0 - x * x) / (d * d);
    }
    case LossKind::Smrq: {
      const auto& p = spec.smrq_params();
      return 0.5 * p.c * sech_squared(p.c * (x - p.h));
    }
    case LossKind::Check:
      throw std::invalid_argument("psi_prime is undefined for the check loss");
    case LossKind::Rank:
      reject_rank("psi_prime");
  }
  return 0.0;
}

RankScores::RankScores(std::size_t n) : scores_(n) {
  if (n == 0) throw std::invalid_argument("rank scores need n >= 1");
  for (std::size_t i = 0; i < n; ++i) scores_[i] = at(static_cast<double>(i + 1));
}

double RankScores::at(double rank) const {
  const double n = static_cast<double>(scores_.size());
  return 2.0 * rank / (n + 1.0) - 1.0;
}

std::vector<double> mid_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 (0-based) tie; their mid-rank is the mean of i+1..j.
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mid;
    i = j;
  }
  return ranks;
}

double rank_objective(std::span<const double> residuals) {
  if (residuals.size() < 2) throw std::invalid_argument("rank objective needs at least two residuals");
  const RankScores scores(residuals.size());
  const auto ranks = mid_ranks(residuals);
  double total = 0.0;
  for (std::size_t i = 0; i < residuals.size(); ++i) total += residuals[i] * scores.at(ranks[i]);
  return total;
}

}  // namespace coshfit
