#include "coshfit/cli.hpp"

#include "coshfit/datasets.hpp"
#include "coshfit/distributions.hpp"
#include "coshfit/inference.hpp"
#include "coshfit/losses.hpp"
#include "coshfit/random.hpp"
#include "coshfit/report.hpp"
#include "coshfit/solvers.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace coshfit::cli {

namespace {

using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    std::string item = text.substr(start, end - start);
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw UsageError(fmt::format("{} expects a comma-separated list of numbers, got '{}'", flag, text));
    }
    values.push_back(v);
    start = end + 1;
  }
  if (values.empty()) throw UsageError(fmt::format("{} must not be empty", flag));
  return values;
}

HuberScale parse_scale(const std::string& s) { return s == "mad" ? HuberScale::Mad : HuberScale::Unit; }

NamedDataset resolve_data(const std::string& data, const std::string& response) {
  const auto names = available_builtins();
  if (std::find(names.begin(), names.end(), data) != names.end()) return builtin(data);
  if (!std::filesystem::exists(data)) {
    throw UsageError(fmt::format("'{}' is neither a builtin dataset ({}) nor an existing file", data,
                                 fmt::join(names, ", ")));
  }
  if (response.empty()) throw UsageError("--response is required for CSV data");
  return load_csv(data, response);
}

std::vector<std::string> coefficient_names(const NamedDataset& d) {
  if (d.X.cols() == 0) return {"theta"};
  std::vector<std::string> names{"(Intercept)"};
  names.insert(names.end(), d.column_names.begin(), d.column_names.end());
  return names;
}

bool location_path(const NamedDataset& d, const LossSpec& spec) {
  return d.X.cols() == 0 && spec.kind() != LossKind::Rank;
}

FitResult fit_dataset(const NamedDataset& d, const LossSpec& spec) {
  if (location_path(d, spec)) {
    return fit_location(std::span<const double>(d.y.data(), static_cast<std::size_t>(d.y.size())), spec);
  }
  return fit_linear(d.to_regression_data(), spec);
}

Json coefficients_json(const std::vector<std::string>& names, const Eigen::VectorXd& beta) {
  Json c = Json::object();
  for (std::size_t j = 0; j < names.size(); ++j) c[names[j]] = beta(static_cast<Eigen::Index>(j));
  return c;
}

Json fit_json(const FitResult& fit, const std::vector<std::string>& names) {
  Json j;
  j["coefficients"] = coefficients_json(names, fit.beta);
  j["objective"] = fit.objective;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  if (std::isfinite(fit.gradient_norm)) j["gradient_norm"] = fit.gradient_norm;
  return j;
}

Json bootstrap_json(const BootstrapReport& b, const std::vector<std::string>& names) {
  Json j;
  j["replicates"] = b.replicates;
  j["seed"] = b.seed;
  j["alpha"] = b.alpha;
  j["failures"] = b.failures;
  Json comps = Json::object();
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    comps[names[k]] = {{"estimate", b.point(i)}, {"se", b.se(i)}, {"ci_lower", b.ci_lower(i)},
                       {"ci_upper", b.ci_upper(i)}};
  }
  j["components"] = comps;
  return j;
}

Json parametric_json(const ParametricBootstrapReport& p) {
  const double sigma = p.report.point(1);
  Json j;
  j["theta"] = p.report.point(0);
  j["sigma"] = sigma;
  j["n"] = p.n;
  j["replicates"] = p.report.replicates;
  j["seed"] = p.report.seed;
  j["theta_hat_mean"] = p.mean_theta;
  j["n_var_theta_hat"] = p.n_var_theta;
  j["n_var_analytic"] = 2.0 * sigma * sigma;
  j["sigma_hat_mean"] = p.mean_sigma;
  j["theta_hat_se"] = p.report.se(0);
  j["theta_hat_ci"] = {p.report.ci_lower(0), p.report.ci_upper(0)};
  j["failures"] = p.report.failures;
  return j;
}

Json gof_json(const GofReport& g) {
  Json j;
  j["dist"] = std::string(to_string(g.kind));
  j["n"] = g.n;
  j["D"] = g.statistic_D;
  j["p_value"] = g.p_value;
  j["fitted_theta"] = g.fitted.theta();
  j["fitted_sigma"] = g.fitted.sigma();
  j["rejected_at_0.05"] = g.p_value < 0.05;
  return j;
}

Eigen::VectorXd residuals_of(const NamedDataset& d, const FitResult& fit) {
  if (d.X.cols() == 0) return d.y.array() - fit.beta(0);
  return d.y - d.to_regression_data().design() * fit.beta;
}

// ---------------------------------------------------------------- dist

struct DistArgs {
  std::string kind = "cosh";
  double theta = 0.0;
  double sigma = 1.0;
  std::optional<double> tau;
  std::optional<double> at;
  std::optional<double> inv;
  std::optional<std::size_t> sample_n;
  std::optional<std::uint64_t> seed;
  bool moments = false;
  bool kappa = false;
  bool fisher = false;
};

int cmd_dist(const DistArgs& a, Report& rep) {
  if (!a.at && !a.inv && !a.sample_n && !a.moments && !a.kappa && !a.fisher) {
    throw UsageError("dist needs at least one of --at, --inv, --sample, --moments, --kappa, --fisher");
  }
  if (a.sample_n && !a.seed) throw UsageError("--sample requires --seed");
  const DistKind kind = parse_dist_kind(a.kind);
  if (a.kappa && kind != DistKind::SkewedCosh) throw UsageError("--kappa requires --kind skewed");
  const DistSpec spec = DistSpec::make(kind, LocationScale(a.theta, a.sigma), a.tau);

  rep.inputs = {{"kind", a.kind}, {"theta", a.theta}, {"sigma", a.sigma}};
  if (a.tau) rep.inputs["tau"] = *a.tau;

  if (a.at) {
    rep.inputs["at"] = *a.at;
    rep.results["pdf"] = pdf(spec, *a.at);
    rep.results["cdf"] = cdf(spec, *a.at);
  }
  if (a.inv) {
    rep.inputs["inv"] = *a.inv;
    rep.results["inv_cdf"] = inv_cdf(spec, *a.inv);
  }
  if (a.sample_n) {
    rep.inputs["sample"] = *a.sample_n;
    rep.inputs["seed"] = *a.seed;
    const auto xs = sample(spec, *a.sample_n, *a.seed);
    rep.results["sample"] = xs;
  }
  if (a.moments) {
    const Moments m = moments(spec);
    rep.results["mean"] = m.mean ? Json(*m.mean) : Json("undefined");
    rep.results["variance"] = m.variance ? Json(*m.variance) : Json("undefined");
  }
  if (a.kappa) rep.results["kappa"] = spec.normalizer();
  if (a.fisher) {
    rep.results["fisher_information"] =
        kind == DistKind::Cosh || kind == DistKind::SkewedCosh ? fisher_information(spec)
                                                                : fisher_information_quadrature(spec);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string data;
  std::string response;
  std::string loss = "logcosh";
  double delta = 1.345;
  std::string huber_scale = "unit";
  int max_iterations = SolverOptions{}.max_iterations;
};

int cmd_fit(const FitArgs& a, Report& rep) {
  const NamedDataset d = resolve_data(a.data, a.response);
  const LossSpec spec = parse_loss(a.loss, a.delta, parse_scale(a.huber_scale));
  rep.inputs = {{"data", a.data}, {"response", d.response_name}, {"loss", spec.name()}};

  SolverOptions options;
  options.max_iterations = a.max_iterations;
  const FitResult fit = location_path(d, spec)
                            ? fit_dataset(d, spec)
                            : fit_linear(d.to_regression_data(), spec, options);
  rep.results["loss"] = spec.name();
  rep.results["n"] = d.y.size();
  rep.results["p"] = d.X.cols();
  rep.results.update(fit_json(fit, coefficient_names(d)));
  return fit.converged ? kExitOk : kExitNotConverged;
}

// ---------------------------------------------------------------- quantile

struct QuantileArgs {
  std::string data;
  std::string response;
  std::string taus = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
  SmrqParams params;
  bool audit = false;
};

int cmd_quantile(const QuantileArgs& a, Report& rep) {
  const NamedDataset d = resolve_data(a.data, a.response);
  const auto taus = parse_list(a.taus, "--taus");
  rep.inputs = {{"data", a.data},    {"response", d.response_name}, {"taus", taus},   {"c", a.params.c},
                {"h", a.params.h},   {"s", a.params.s},             {"v", a.params.v}, {"audit", a.audit}};

  const RegressionData rd = d.to_regression_data();
  const QuantileFit q = fit_quantiles(rd, taus, a.params);
  const auto names = coefficient_names(d);
  Json fits = Json::array();
  bool all_converged = true;
  for (std::size_t k = 0; k < q.taus.size(); ++k) {
    Json f = {{"tau", q.taus[k]}};
    f.update(fit_json(q.fits[k], names));
    fits.push_back(f);
    all_converged = all_converged && q.fits[k].converged;
  }
  rep.results["fits"] = fits;
  if (a.audit) {
    const MonotonicityReport m = monotonicity_audit(q, rd);
    rep.results["audit"] = {{"taus", m.taus}, {"below_fraction", m.below_fraction}, {"violations", m.violations}};
  }
  return all_converged ? kExitOk : kExitNotConverged;
}

// ---------------------------------------------------------------- bootstrap

struct BootstrapArgs {
  bool parametric = false;
  double theta = 0.0;
  double sigma = 1.0;
  std::size_t n = 100;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  std::string data;
  std::string response;
  std::string loss = "logcosh";
  double delta = 1.345;
  std::string huber_scale = "unit";
  std::string resample = "cases";
};

int cmd_bootstrap(const BootstrapArgs& a, Report& rep) {
  rep.inputs = {{"replicates", a.reps}, {"seed", a.seed}, {"alpha", a.alpha}};
  if (a.parametric) {
    if (!a.data.empty()) throw UsageError("--parametric cannot be combined with --data");
    rep.inputs.update({{"parametric", true}, {"theta", a.theta}, {"sigma", a.sigma}, {"n", a.n}});
    rep.results = parametric_json(
        parametric_bootstrap(DistSpec::cosh(LocationScale(a.theta, a.sigma)), a.n, a.reps, a.seed, a.alpha));
    return kExitOk;
  }
  if (a.data.empty()) throw UsageError("bootstrap needs --parametric or --data");
  const NamedDataset d = resolve_data(a.data, a.response);
  const LossSpec spec = parse_loss(a.loss, a.delta, parse_scale(a.huber_scale));
  rep.inputs.update({{"data", a.data}, {"response", d.response_name}, {"loss", spec.name()}});

  BootstrapReport b;
  if (location_path(d, spec)) {
    b = bootstrap_se(std::span<const double>(d.y.data(), static_cast<std::size_t>(d.y.size())), spec, a.reps,
                     a.seed, a.alpha);
  } else {
    const Resampling scheme = a.resample == "residuals" ? Resampling::Residuals : Resampling::Cases;
    rep.inputs["resample"] = a.resample;
    b = bootstrap_se(d.to_regression_data(), spec, a.reps, a.seed, a.alpha, scheme);
  }
  rep.results = bootstrap_json(b, coefficient_names(d));
  return kExitOk;
}

// ---------------------------------------------------------------- gof

struct GofArgs {
  std::string data;
  std::string response;
  std::string fit_loss = "l2";
  double delta = 1.345;
  std::string dist = "cosh";
};

int cmd_gof(const GofArgs& a, Report& rep) {
  const NamedDataset d = resolve_data(a.data, a.response);
  const LossSpec spec = parse_loss(a.fit_loss, a.delta);
  rep.inputs = {{"data", a.data}, {"response", d.response_name}, {"fit_loss", spec.name()}, {"dist", a.dist}};
  const FitResult fit = fit_dataset(d, spec);
  const Eigen::VectorXd r = residuals_of(d, fit);
  rep.results = gof_json(ks_test(std::span<const double>(r.data(), static_cast<std::size_t>(r.size())),
                                 parse_dist_kind(a.dist)));
  return fit.converged ? kExitOk : kExitNotConverged;
}

// ---------------------------------------------------------------- plotdata

struct PlotArgs {
  std::string figure;
  std::string out = "-";
  std::string taus = "0.1,0.25,0.5,0.75,0.9";
  double xmin = -5.0;
  double xmax = 5.0;
  std::size_t points = 201;
  double delta = 1.0;
  SmrqParams params;
  std::size_t n = 200;
  std::uint64_t seed = 1;
};

struct Row {
  double x;
  double value;
  std::string series;
};

std::vector<Row> plot_rows(const PlotArgs& a) {
  std::vector<Row> rows;
  std::vector<double> grid(a.points);
  for (std::size_t i = 0; i < a.points; ++i) {
    grid[i] = a.xmin + (a.xmax - a.xmin) * static_cast<double>(i) / static_cast<double>(a.points - 1);
  }
  auto curve = [&](const std::string& label, auto&& f) {
    for (double x : grid) rows.push_back({x, f(x), label});
  };

  if (a.figure == "loss-curves") {
    const LossSpec huber = LossSpec::huber(a.delta);
    curve("L1", [](double x) { return std::abs(x); });
    curve("L2", [](double x) { return x * x; });
    curve("logcosh", [](double x) { return stable_logcosh(x); });
    curve(huber.name(), [&](double x) { return rho(huber, x); });
    curve("cauchy", [](double x) { return std::log1p(x * x); });
  } else if (a.figure == "psi-curves") {
    const LossSpec huber = LossSpec::huber(a.delta);
    curve("L1", [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
    curve("L2", [](double x) { return x; });
    curve("logcosh", [](double x) { return std::tanh(x); });
    curve(huber.name(), [&](double x) { return psi(huber, x); });
    curve("cauchy", [](double x) { return 2.0 * x / (1.0 + x * x); });
  } else if (a.figure == "pdfs") {
    for (const auto& spec : {DistSpec::cosh(), DistSpec::gaussian(), DistSpec::cauchy()}) {
      curve(std::string(to_string(spec.kind())), [&](double x) { return pdf(spec, x); });
    }
  } else if (a.figure == "check" || a.figure == "smrq") {
    for (double tau : parse_list(a.taus, "--taus")) {
      SmrqParams p = a.params;
      p.tau = tau;
      const LossSpec spec = a.figure == "check" ? LossSpec::check(tau) : LossSpec::smrq(p);
      curve(fmt::format("tau={}", tau), [&](double x) { return rho(spec, x); });
    }
  } else if (a.figure == "qq") {
    auto xs = sample(DistSpec::cosh(), a.n, a.seed);
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(xs.size());
      rows.push_back({normal_quantile(u), xs[i], "cosh-vs-normal"});
    }
  } else {
    throw UsageError("unknown --figure '" + a.figure + "'");
  }
  return rows;
}

int cmd_plotdata(const PlotArgs& a, Report& rep, std::ostream& out, bool& print) {
  if (a.points < 2) throw UsageError("--points must be at least 2");
  if (!(a.xmax > a.xmin)) throw UsageError("--xmax must exceed --xmin");
  const auto rows = plot_rows(a);

  std::string csv = "x,value,series\n";
  for (const auto& r : rows) csv += fmt::format("{:.17g},{:.17g},{}\n", r.x, r.value, r.series);
  if (a.out == "-") {
    out << csv;
    print = false;
  } else {
    std::ofstream file(a.out);
    if (!file) throw std::runtime_error("cannot write '" + a.out + "'");
    file << csv;
    if (!file) throw std::runtime_error("failed while writing '" + a.out + "'");
  }
  std::vector<std::string> series;
  for (const auto& r : rows) {
    if (std::find(series.begin(), series.end(), r.series) == series.end()) series.push_back(r.series);
  }
  rep.inputs = {{"figure", a.figure}, {"out", a.out}};
  rep.results = {{"rows", rows.size()}, {"series", series}};
  return kExitOk;
}

// ---------------------------------------------------------------- repro

struct ReproArgs {
  std::uint64_t seed = 42;
  std::size_t parametric_reps = 10000;
  std::size_t reps = 2000;
  std::string swiss = "data/swiss.csv";
};

int cmd_repro(const ReproArgs& a, Report& rep) {
  rep.inputs = {{"seed", a.seed}, {"parametric_reps", a.parametric_reps}, {"reps", a.reps}, {"swiss", a.swiss}};
  bool ok = true;

  Json cosh_rows = Json::array();
  const std::pair<double, double> configs[] = {{0.0, 1.0}, {0.0, 3.0}, {5.0, 2.0}, {5.0, 3.0}};
  for (std::size_t row = 0; row < 4; ++row) {
    const auto [theta, sigma] = configs[row];
    cosh_rows.push_back(parametric_json(parametric_bootstrap(DistSpec::cosh(LocationScale(theta, sigma)), 100,
                                                          a.parametric_reps, derive_seed(a.seed, row))));
  }
  rep.results["parametric_bootstrap"] = cosh_rows;

  const NamedDataset loc = builtin("location25");
  const std::span<const double> y(loc.y.data(), static_cast<std::size_t>(loc.y.size()));
  Json location_rows = Json::object();
  for (const auto& spec : {LossSpec::l2(), LossSpec::log_cosh(), LossSpec::cauchy()}) {
    const FitResult fit = fit_location(y, spec);
    const BootstrapReport b = bootstrap_se(y, spec, a.reps, a.seed);
    ok = ok && fit.converged;
    location_rows[spec.name()] = {{"theta_hat", fit.beta(0)}, {"se", b.se(0)}, {"converged", fit.converged}};
  }
  rep.results["location25"] = location_rows;

  const NamedDataset tel = builtin("telephone");
  Json telephone_rows = Json::object();
  for (const auto& spec : {LossSpec::l2(), LossSpec::log_cosh(), LossSpec::huber(0.1), LossSpec::rank()}) {
    const FitResult fit = fit_dataset(tel, spec);
    ok = ok && fit.converged;
    telephone_rows[spec.name()] = {{"slope", fit.beta(1)}, {"intercept", fit.beta(0)}, {"converged", fit.converged}};
  }
  rep.results["telephone"] = telephone_rows;

  Json kappas = Json::object();
  for (double tau : {0.0, 0.25, 0.5, 0.75, 1.0}) kappas[fmt::format("{}", tau)] = kappa(tau);
  rep.results["kappa"] = kappas;

  Json fisher = Json::object();
  for (double sigma : {1.0, 2.0, 3.0}) {
    fisher[fmt::format("cosh_sigma_{}", sigma)] = fisher_information_quadrature(DistSpec::cosh(LocationScale(0.0, sigma)));
  }
  for (double tau : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    fisher[fmt::format("skewed_tau_{}", tau)] = fisher_information(DistSpec::skewed_cosh(tau));
  }
  rep.results["fisher_information"] = fisher;

  const FitResult l2 = fit_dataset(tel, LossSpec::l2());
  const Eigen::VectorXd r = residuals_of(tel, l2);
  Json gof = Json::array();
  for (DistKind k : {DistKind::Gaussian, DistKind::Cauchy, DistKind::Cosh}) {
    gof.push_back(gof_json(ks_test(std::span<const double>(r.data(), static_cast<std::size_t>(r.size())), k)));
  }
  rep.results["gof_telephone_l2_residuals"] = gof;

  if (std::filesystem::exists(a.swiss)) {
    const NamedDataset swiss = load_csv(a.swiss, "Fertility");
    const RegressionData rd = swiss.to_regression_data();
    const auto names = coefficient_names(swiss);
    Json swiss_rows = Json::object();
    for (const auto& spec :
         {LossSpec::huber(1.345, HuberScale::Mad), LossSpec::rank(), LossSpec::log_cosh()}) {
      const BootstrapReport b = bootstrap_se(rd, spec, a.reps, a.seed, 0.05, Resampling::Residuals);
      swiss_rows[spec.name()] = bootstrap_json(b, names)["components"];
    }
    rep.results["swiss"] = swiss_rows;

    const std::vector<double> deciles{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    const MonotonicityReport m = monotonicity_audit(fit_quantiles(rd, deciles), rd);
    rep.results["swiss_decile_audit"] = {{"below_fraction", m.below_fraction}, {"violations", m.violations}};
  } else {
    rep.results["swiss"] = "skipped: " + a.swiss + " not found";
  }
  return ok ? kExitOk : kExitNotConverged;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust estimation with the log-cosh loss and the Cosh distribution", "coshfit"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");  // frees -h for the SMRQ shift

  std::string json_path;
  auto add_json = [&](CLI::App* sub) {
    sub->add_option("--json", json_path, "Also write the JSON report to this path ('-' for stdout)");
  };
  auto add_data = [](CLI::App* sub, std::string& data, std::string& response) {
    sub->add_option("--data", data, "Builtin dataset (location25, telephone) or CSV path");
    sub->add_option("--response", response, "Response column for CSV data");
  };
  const auto loss_names = CLI::IsMember({"l2", "logcosh", "huber", "cauchy", "rank"});
  const auto scale_names = CLI::IsMember({"unit", "mad"});

  DistArgs dist_args;
  auto* dist = app.add_subcommand("dist", "Distribution values: pdf/cdf, inverse cdf, samples, moments, kappa");
  dist->add_option("--kind", dist_args.kind, "cosh, cauchy, gaussian or skewed")
      ->check(CLI::IsMember({"cosh", "cauchy", "gaussian", "skewed"}));
  dist->add_option("--theta", dist_args.theta, "Location");
  dist->add_option("--sigma", dist_args.sigma, "Scale (> 0)");
  dist->add_option("--tau", dist_args.tau, "Quantile level for --kind skewed");
  dist->add_option("--at", dist_args.at, "Evaluate pdf and cdf at x");
  dist->add_option("--inv", dist_args.inv, "Inverse cdf at u in (0, 1)");
  dist->add_option("--sample", dist_args.sample_n, "Draw n inverse-transform samples")->check(CLI::PositiveNumber);
  dist->add_option("--seed", dist_args.seed, "Seed for --sample");
  dist->add_flag("--moments", dist_args.moments, "Mean and variance");
  dist->add_flag("--kappa", dist_args.kappa, "Normalizing constant of the skewed density");
  dist->add_flag("--fisher", dist_args.fisher, "Fisher information for the location");
  add_json(dist);

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Location or linear M-estimate");
  add_data(fit, fit_args.data, fit_args.response);
  fit->get_option("--data")->required();
  fit->add_option("--loss", fit_args.loss, "l2, logcosh, huber, cauchy or rank")->check(loss_names);
  fit->add_option("--delta", fit_args.delta, "Huber threshold")->check(CLI::PositiveNumber);
  fit->add_option("--huber-scale", fit_args.huber_scale, "unit: raw residuals; mad: delta times a MAD scale")
      ->check(scale_names);
  fit->add_option("--max-iter", fit_args.max_iterations, "Newton iteration limit for regression fits")
      ->check(CLI::PositiveNumber);
  add_json(fit);

  QuantileArgs q_args;
  auto* quantile = app.add_subcommand("quantile", "Smooth quantile regression over a tau grid");
  add_data(quantile, q_args.data, q_args.response);
  quantile->get_option("--data")->required();
  quantile->add_option("--taus", q_args.taus, "Comma-separated, strictly increasing");
  quantile->add_option("--c", q_args.params.c, "Curvature");
  quantile->add_option("--h", q_args.params.h, "Horizontal shift");
  quantile->add_option("--s", q_args.params.s, "Slope offset");
  quantile->add_option("--v", q_args.params.v, "Vertical shift");
  quantile->add_flag("--audit", q_args.audit, "Report below-fractions and crossing violations");
  add_json(quantile);

  BootstrapArgs b_args;
  auto* boot = app.add_subcommand("bootstrap", "Parametric or case/residual resampling bootstrap");
  boot->add_flag("--parametric", b_args.parametric, "Sample from Cosh(theta, sigma) and refit (theta, sigma)");
  boot->add_option("--theta", b_args.theta, "Location for --parametric");
  boot->add_option("--sigma", b_args.sigma, "Scale for --parametric");
  boot->add_option("--n", b_args.n, "Sample size for --parametric")->check(CLI::Range(2, 100000000));
  boot->add_option("--reps", b_args.reps, "Replicates")->required()->check(CLI::PositiveNumber);
  boot->add_option("--seed", b_args.seed, "Master seed")->required();
  boot->add_option("--alpha", b_args.alpha, "Percentile interval level")->check(CLI::Range(0.0, 1.0));
  add_data(boot, b_args.data, b_args.response);
  boot->add_option("--loss", b_args.loss, "l2, logcosh, huber, cauchy or rank")->check(loss_names);
  boot->add_option("--delta", b_args.delta, "Huber threshold")->check(CLI::PositiveNumber);
  boot->add_option("--huber-scale", b_args.huber_scale, "unit or mad")->check(scale_names);
  boot->add_option("--resample", b_args.resample, "cases or residuals (regression data)")
      ->check(CLI::IsMember({"cases", "residuals"}));
  add_json(boot);

  GofArgs g_args;
  auto* gof = app.add_subcommand("gof", "Kolmogorov-Smirnov test of fit residuals");
  add_data(gof, g_args.data, g_args.response);
  gof->get_option("--data")->required();
  gof->add_option("--fit-loss", g_args.fit_loss, "Loss that produces the residuals")->check(loss_names);
  gof->add_option("--delta", g_args.delta, "Huber threshold")->check(CLI::PositiveNumber);
  gof->add_option("--dist", g_args.dist, "gaussian, cauchy or cosh")
      ->check(CLI::IsMember({"gaussian", "cauchy", "cosh"}));
  add_json(gof);

  PlotArgs p_args;
  auto* plot = app.add_subcommand("plotdata", "CSV series (x, value, series) for loss, psi, pdf, check and Q-Q plots");
  plot->add_option("--figure", p_args.figure, "loss-curves, psi-curves, pdfs, check, smrq or qq")
      ->required()
      ->check(CLI::IsMember({"loss-curves", "psi-curves", "pdfs", "check", "smrq", "qq"}));
  plot->add_option("--out", p_args.out, "Output CSV path ('-' for stdout)");
  plot->add_option("--taus", p_args.taus, "Comma-separated taus for check and smrq");
  plot->add_option("--xmin", p_args.xmin, "Grid start");
  plot->add_option("--xmax", p_args.xmax, "Grid end");
  plot->add_option("--points", p_args.points, "Grid size");
  plot->add_option("--delta", p_args.delta, "Huber threshold in loss and psi curves")->check(CLI::PositiveNumber);
  plot->add_option("--c", p_args.params.c, "SMRQ curvature");
  plot->add_option("--h", p_args.params.h, "SMRQ horizontal shift");
  plot->add_option("--s", p_args.params.s, "SMRQ slope offset");
  plot->add_option("--v", p_args.params.v, "SMRQ vertical shift");
  plot->add_option("--n", p_args.n, "Sample size for qq")->check(CLI::PositiveNumber);
  plot->add_option("--seed", p_args.seed, "Seed for qq");
  add_json(plot);

  ReproArgs r_args;
  auto* repro = app.add_subcommand("repro", "Run every table reproduction and write one report");
  repro->add_option("--seed", r_args.seed, "Master seed");
  repro->add_option("--parametric-reps", r_args.parametric_reps, "Replicates per parametric row")
      ->check(CLI::PositiveNumber);
  repro->add_option("--reps", r_args.reps, "Replicates for resampling s.e.")->check(CLI::PositiveNumber);
  repro->add_option("--swiss", r_args.swiss, "Path to swiss.csv");
  add_json(repro);

  std::vector<const char*> argv{"coshfit"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Report rep;
  int code = kExitOk;
  bool print = true;
  try {
    if (*dist) {
      rep.command = "dist";
      code = cmd_dist(dist_args, rep);
    } else if (*fit) {
      rep.command = "fit";
      code = cmd_fit(fit_args, rep);
    } else if (*quantile) {
      rep.command = "quantile";
      code = cmd_quantile(q_args, rep);
    } else if (*boot) {
      rep.command = "bootstrap";
      code = cmd_bootstrap(b_args, rep);
    } else if (*gof) {
      rep.command = "gof";
      code = cmd_gof(g_args, rep);
    } else if (*plot) {
      rep.command = "plotdata";
      code = cmd_plotdata(p_args, rep, out, print);
    } else if (*repro) {
      rep.command = "repro";
      code = cmd_repro(r_args, rep);
    }
    if (print && json_path != "-") print_report(rep, out);
    if (!json_path.empty()) write_report_json(rep, json_path, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\nRun with --help for more information.\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (code == kExitNotConverged) err << "warning: solver did not converge\n";
  return code;
}

}  // namespace coshfit::cli
