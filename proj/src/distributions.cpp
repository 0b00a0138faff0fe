#include "hilltail/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "hilltail/error.hpp"
#include "hilltail/quadrature.hpp"
#include "hilltail/rng.hpp"

namespace hilltail {

namespace {

constexpr Family kFamilies[] = {Family::PurePareto, Family::Frechet, Family::Student,
                                Family::LogGamma,   Family::Levy,    Family::HDist,
                                Family::ParetoChangePoint};

// ln of the change-point breakpoint on the t scale: U is t^{gamma'} up to
// t = tau^{1/gamma'}.
double change_point_log_t(const DistributionSpec& spec) {
  return std::log(spec.params.tau) / spec.params.gamma_prime;
}

[[noreturn]] void unsupported(const DistributionSpec& spec, std::string_view what) {
  throw Error(ErrorCode::unsupported_for_family,
              std::string(what) + " is not available for " + std::string(to_string(spec.family)));
}

bool has_karamata_form(Family family) {
  return family == Family::PurePareto || family == Family::HDist ||
         family == Family::ParetoChangePoint;
}

// U(e^y), y > 0.
double quantile_at_log(const DistributionSpec& spec, double y) {
  const double g = spec.gamma;
  switch (spec.family) {
    case Family::PurePareto:
      return spec.params.scale * std::exp(g * y);
    case Family::Frechet:
      // F(x) = exp(-x^{-1/gamma}); 1 - 1/t = exp(-x^{-1/gamma}).
      return std::pow(-std::log1p(-std::exp(-y)), -g);
    case Family::LogGamma:
      // ln X ~ Gamma(shape 2, rate 3).
      return std::exp(boost::math::gamma_q_inv(2.0, std::exp(-y)) / 3.0);
    case Family::Levy: {
      // P(1/Z^2 > x) = P(|Z| < x^{-1/2}) = erf(x^{-1/2} / sqrt 2).
      const double z = std::numbers::sqrt2 * boost::math::erf_inv(std::exp(-y));
      return 1.0 / (z * z);
    }
    case Family::HDist:
      // t^gamma exp(int_1^t eta(s)/s ds), eta(s) = -2 ln(s) / s.
      return std::exp(g * y + 2.0 * (y + 1.0) * std::exp(-y) - 2.0);
    case Family::ParetoChangePoint: {
      const double log_t_break = change_point_log_t(spec);
      if (y <= log_t_break) return std::exp(spec.params.gamma_prime * y);
      return spec.params.tau * std::exp(g * (y - log_t_break));
    }
    case Family::Student:
      break;
  }
  unsupported(spec, "tail quantile");
}

double h_eta(double s) { return (2.0 / s) * std::log(1.0 / s); }

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::PurePareto: return "PurePareto";
    case Family::Frechet: return "Frechet";
    case Family::Student: return "Student";
    case Family::LogGamma: return "LogGamma";
    case Family::Levy: return "Levy";
    case Family::HDist: return "HDist";
    case Family::ParetoChangePoint: return "ParetoChangePoint";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  for (Family f : kFamilies) {
    if (to_string(f) == name) return f;
  }
  throw Error(ErrorCode::invalid_argument, "unknown family '" + std::string(name) + "'");
}

void validate(const DistributionSpec& spec) {
  auto check = [](bool ok, const std::string& what) {
    require(ok, ErrorCode::invalid_argument, what);
  };
  check(std::isfinite(spec.gamma) && spec.gamma > 0.0, "gamma must be positive");
  if (spec.rho) check(*spec.rho <= 0.0, "rho must be nonpositive");
  const auto& p = spec.params;
  switch (spec.family) {
    case Family::PurePareto:
      check(p.scale > 0.0, "Pareto scale must be positive");
      break;
    case Family::Student:
      check(p.dof > 0.0, "Student degrees of freedom must be positive");
      check(std::abs(spec.gamma * p.dof - 1.0) < 1e-12, "Student gamma must equal 1/dof");
      break;
    case Family::LogGamma:
      check(std::abs(spec.gamma - 1.0 / 3.0) < 1e-12, "log-gamma has gamma = 1/3");
      break;
    case Family::Levy:
      check(spec.gamma == 2.0, "Levy has gamma = 2");
      break;
    case Family::ParetoChangePoint:
      check(p.tau > 1.0, "change point requires tau > 1");
      check(p.gamma_prime > 0.0, "change point requires gamma' > 0");
      break;
    case Family::Frechet:
    case Family::HDist:
      break;
  }
}

DistributionSpec pure_pareto(double gamma, double scale) {
  DistributionSpec s{Family::PurePareto, gamma, std::nullopt, {}, ""};
  s.params.scale = scale;
  validate(s);
  return s;
}

DistributionSpec frechet(double gamma) {
  DistributionSpec s{Family::Frechet, gamma, -1.0, {}, ""};
  validate(s);
  return s;
}

DistributionSpec student(double dof) {
  DistributionSpec s{Family::Student, 1.0 / dof, -2.0 / dof, {}, ""};
  s.params.dof = dof;
  validate(s);
  return s;
}

DistributionSpec log_gamma() {
  DistributionSpec s{Family::LogGamma, 1.0 / 3.0, 0.0, {}, ""};
  validate(s);
  return s;
}

DistributionSpec levy() {
  DistributionSpec s{Family::Levy, 2.0, -1.0, {}, ""};
  validate(s);
  return s;
}

DistributionSpec h_dist() {
  DistributionSpec s{Family::HDist, 0.5, -1.0, {}, ""};
  validate(s);
  return s;
}

DistributionSpec pareto_change_point(double gamma, double gamma_prime, double tau,
                                     std::optional<double> rho) {
  DistributionSpec s{Family::ParetoChangePoint, gamma, rho, {}, ""};
  s.params.gamma_prime = gamma_prime;
  s.params.tau = tau;
  validate(s);
  return s;
}

const std::vector<DistributionSpec>& benchmark_suite() {
  static const std::vector<DistributionSpec> suite = [] {
    auto named = [](DistributionSpec s, std::string name, std::optional<double> rho) {
      s.name = std::move(name);
      s.rho = rho;
      return s;
    };
    // rho as listed for the benchmark rows (absolute values, stored negated).
    // Change-point breakpoints sit at the 1 - 1/15 and 1 - 1/25 quantiles of
    // the gamma' = 1 branch, i.e. tau = 15 and tau = 25.
    return std::vector<DistributionSpec>{
        named(frechet(0.2), "F0.2", -1.0),
        named(frechet(0.5), "F0.5", -1.0),
        named(frechet(1.0), "F1", -1.0),
        named(student(1.0), "t1", -2.0),
        named(student(2.0), "t2", -1.0),
        named(student(4.0), "t4", -0.5),
        named(student(10.0), "t10", -0.2),
        named(h_dist(), "H", -1.0),
        named(log_gamma(), "log-gamma", 0.0),
        named(levy(), "Stable", -1.0),
        named(pareto_change_point(1.5, 1.0, 15.0), "Pcp", -0.3),
        named(pareto_change_point(1.25, 1.0, 25.0), "Pcp-bis", -0.2),
    };
  }();
  return suite;
}

std::optional<DistributionSpec> find_distribution(std::string_view name) {
  for (const auto& spec : benchmark_suite()) {
    if (spec.name == name) return spec;
  }
  if (name == "Pareto") {
    auto s = pure_pareto(1.0);
    s.name = "Pareto";
    return s;
  }
  return std::nullopt;
}

void to_json(nlohmann::json& j, const DistributionSpec& spec) {
  nlohmann::json params = nlohmann::json::object();
  switch (spec.family) {
    case Family::PurePareto: params["scale"] = spec.params.scale; break;
    case Family::Student: params["dof"] = spec.params.dof; break;
    case Family::ParetoChangePoint:
      params["gamma_prime"] = spec.params.gamma_prime;
      params["tau"] = spec.params.tau;
      break;
    default: break;
  }
  j = nlohmann::json{{"family", to_string(spec.family)},
                     {"gamma", spec.gamma},
                     {"rho", spec.rho ? nlohmann::json(*spec.rho) : nlohmann::json(nullptr)},
                     {"params", params}};
  if (!spec.name.empty()) j["name"] = spec.name;
}

void from_json(const nlohmann::json& j, DistributionSpec& spec) {
  if (!j.is_object() || !j.contains("family")) {
    throw Error(ErrorCode::invalid_argument, "distribution spec needs a 'family' field");
  }
  DistributionSpec s;
  s.family = family_from_string(j.at("family").get<std::string>());
  const nlohmann::json params = j.value("params", nlohmann::json::object());
  switch (s.family) {
    case Family::PurePareto: s = pure_pareto(j.value("gamma", 1.0), params.value("scale", 1.0)); break;
    case Family::Frechet: s = frechet(j.value("gamma", 1.0)); break;
    case Family::Student: s = student(params.at("dof").get<double>()); break;
    case Family::LogGamma: s = log_gamma(); break;
    case Family::Levy: s = levy(); break;
    case Family::HDist: s = h_dist(); break;
    case Family::ParetoChangePoint:
      s = pareto_change_point(j.at("gamma").get<double>(), params.at("gamma_prime").get<double>(),
                              params.at("tau").get<double>());
      break;
  }
  if (j.contains("gamma")) s.gamma = j.at("gamma").get<double>();
  if (j.contains("rho")) {
    s.rho = j.at("rho").is_null() ? std::nullopt : std::optional<double>(j.at("rho").get<double>());
  }
  s.name = j.value("name", std::string{});
  validate(s);
  spec = std::move(s);
}

std::size_t SortedSample::positive_count() const noexcept {
  // values are non-increasing, so positives form a prefix
  auto it = std::partition_point(values.begin(), values.end(), [](double v) { return v > 0.0; });
  return static_cast<std::size_t>(it - values.begin());
}

SortedSample make_sorted_sample(std::vector<double> values) {
  std::stable_sort(values.begin(), values.end(), std::greater<>{});
  return SortedSample{std::move(values)};
}

double tail_quantile(const DistributionSpec& spec, double t) {
  require(t > 1.0, ErrorCode::invalid_argument, "tail quantile needs t > 1");
  if (spec.family == Family::Student) unsupported(spec, "tail quantile");
  if (spec.family == Family::PurePareto) return spec.params.scale * std::pow(t, spec.gamma);
  if (spec.family == Family::ParetoChangePoint) {
    const double t_break = std::pow(spec.params.tau, 1.0 / spec.params.gamma_prime);
    if (t <= t_break) return std::pow(t, spec.params.gamma_prime);
    return spec.params.tau * std::pow(t / t_break, spec.gamma);
  }
  return quantile_at_log(spec, std::log(t));
}

SortedSample sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
  require(n >= 2, ErrorCode::invalid_argument, "sample size must be at least 2");
  validate(spec);
  Engine engine = make_engine(seed);
  std::vector<double> values(n);
  switch (spec.family) {
    case Family::LogGamma: {
      std::exponential_distribution<double> expo(1.0);
      for (auto& v : values) v = std::exp((expo(engine) + expo(engine)) / 3.0);
      break;
    }
    case Family::Levy: {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (auto& v : values) {
        const double z = normal(engine);
        v = 1.0 / (z * z);
      }
      break;
    }
    case Family::Student: {
      std::normal_distribution<double> normal(0.0, 1.0);
      std::chi_squared_distribution<double> chi2(spec.params.dof);
      for (auto& v : values) {
        const double z = normal(engine);
        v = z / std::sqrt(chi2(engine) / spec.params.dof);
      }
      break;
    }
    default: {
      std::exponential_distribution<double> expo(1.0);
      for (auto& v : values) v = quantile_at_log(spec, expo(engine));
      break;
    }
  }
  std::sort(values.begin(), values.end(), std::greater<>{});
  return SortedSample{std::move(values)};
}

double von_mises_eta(const DistributionSpec& spec, double s) {
  require(s > 1.0, ErrorCode::invalid_argument, "von Mises function needs s > 1");
  if (!has_karamata_form(spec.family)) unsupported(spec, "von Mises function");
  return von_mises(spec)(s);
}

double von_mises_eta_bar(const DistributionSpec& spec, double t) {
  switch (spec.family) {
    case Family::PurePareto:
      return 0.0;
    case Family::HDist:
      // |eta(s)| = 2 ln(s) / s peaks at s = e.
      return t <= std::numbers::e ? 2.0 / std::numbers::e : 2.0 * std::log(t) / t;
    case Family::ParetoChangePoint:
      return t <= std::exp(change_point_log_t(spec))
                 ? std::abs(spec.params.gamma_prime - spec.gamma)
                 : 0.0;
    default:
      unsupported(spec, "von Mises function");
  }
}

double bias_b(const DistributionSpec& spec, double t) {
  require(t > 1.0, ErrorCode::invalid_argument, "bias function needs t > 1");
  switch (spec.family) {
    case Family::PurePareto:
      return 0.0;
    case Family::ParetoChangePoint: {
      const double t_break = std::exp(change_point_log_t(spec));
      if (t >= t_break) return 0.0;
      return (spec.params.gamma_prime - spec.gamma) * (1.0 - t / t_break);
    }
    case Family::HDist: {
      // Substituting v = t / w maps t * int_t^inf eta(v)/v^2 dv onto
      // int_0^1 eta(t / w) dw; the integrand vanishes at w = 0.
      auto integrand = [t](double w) { return w <= 0.0 ? 0.0 : h_eta(t / w); };
      return adaptive_simpson(integrand, 0.0, 1.0, 1e-15, 1e-8, 100000).value;
    }
    default:
      unsupported(spec, "bias function");
  }
}

VonMises VonMises::piecewise_constant(std::vector<double> breaks, std::vector<double> levels) {
  require(levels.size() == breaks.size() + 1, ErrorCode::invalid_argument,
          "piecewise von Mises function needs one more level than breaks");
  require(std::is_sorted(breaks.begin(), breaks.end()), ErrorCode::invalid_argument,
          "breaks must be sorted");
  VonMises v;
  v.levels_ = std::move(levels);
  v.log_breaks_.reserve(breaks.size());
  for (double b : breaks) {
    require(b > 0.0, ErrorCode::invalid_argument, "breaks must be positive");
    v.log_breaks_.push_back(std::log(b));
  }
  return v;
}

VonMises VonMises::smooth(std::function<double(double)> eta, double tolerance) {
  VonMises v;
  v.smooth_ = std::move(eta);
  v.tolerance_ = tolerance;
  return v;
}

double VonMises::operator()(double s) const {
  if (smooth_) return smooth_(s);
  const double y = std::log(s);
  const auto it = std::lower_bound(log_breaks_.begin(), log_breaks_.end(), y);
  return levels_[static_cast<std::size_t>(it - log_breaks_.begin())];
}

double VonMises::integrate_log(double a, double b) const {
  if (b <= a) return 0.0;
  if (smooth_) {
    const auto& eta = smooth_;
    auto f = [&eta](double y) { return eta(std::exp(y)); };
    return adaptive_simpson(f, a, b, tolerance_, 0.0, 10000).value;
  }
  double total = 0.0;
  double lo = -INFINITY;
  for (std::size_t j = 0; j < levels_.size(); ++j) {
    const double hi = j < log_breaks_.size() ? log_breaks_[j] : INFINITY;
    const double left = std::max(a, lo), right = std::min(b, hi);
    if (right > left) total += levels_[j] * (right - left);
    lo = hi;
  }
  return total;
}

VonMises von_mises(const DistributionSpec& spec) {
  switch (spec.family) {
    case Family::PurePareto:
      return VonMises::zero();
    case Family::HDist:
      return VonMises::smooth(h_eta);
    case Family::ParetoChangePoint:
      return VonMises::piecewise_constant({std::exp(change_point_log_t(spec))},
                                          {spec.params.gamma_prime - spec.gamma, 0.0});
    default:
      unsupported(spec, "von Mises function");
  }
}

}  // namespace hilltail
