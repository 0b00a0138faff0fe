#include "hilltail/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/special_functions/beta.hpp>

#include "hilltail/error.hpp"
#include "hilltail/hill.hpp"
#include "hilltail/rng.hpp"
#include "hilltail/selection.hpp"
#include "hilltail/stats.hpp"

namespace hilltail {

namespace {

void check_reps(std::size_t reps) {
  require(reps >= 2, ErrorCode::insufficient_reps, "at least two replicates are needed");
}

bool has_karamata_form(const DistributionSpec& spec) {
  return spec.family == Family::PurePareto || spec.family == Family::HDist ||
         spec.family == Family::ParetoChangePoint;
}

void require_karamata(const DistributionSpec& spec) {
  require(has_karamata_form(spec), ErrorCode::unsupported_for_family,
          "check needs a tractable von Mises function, not " + std::string(to_string(spec.family)));
}

double binomial_stderr(double p, std::size_t reps) {
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(reps));
}

// Fills out[r] = body(r) for r < reps; each replicate owns its slot, so the
// result does not depend on scheduling.
template <typename T, typename Body>
std::vector<T> per_replicate(std::size_t reps, Body&& body) {
  std::vector<T> out(reps);
  const auto count = static_cast<std::ptrdiff_t>(reps);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t r = 0; r < count; ++r) out[static_cast<std::size_t>(r)] = body(static_cast<std::size_t>(r));
  return out;
}

struct RepDraw {
  std::vector<double> gamma_hat;  // at each requested k
  std::vector<double> y_next;     // Y_(k+1) at each requested k
};

std::vector<RepDraw> representation_draws(const DistributionSpec& spec,
                                          std::span<const std::size_t> ks, std::size_t n,
                                          std::size_t reps, std::uint64_t seed) {
  require(!ks.empty(), ErrorCode::invalid_argument, "no k requested");
  const std::size_t k_max = *std::max_element(ks.begin(), ks.end());
  require(*std::min_element(ks.begin(), ks.end()) >= 1 && k_max < n,
          ErrorCode::invalid_argument, "need 1 <= k < n");
  const VonMises eta = von_mises(spec);
  return per_replicate<RepDraw>(reps, [&](std::size_t r) {
    const RepresentationDraw draw =
        simulate_representation(spec.gamma, eta, n, k_max, stream_seed(seed, r));
    RepDraw out;
    for (std::size_t k : ks) {
      out.gamma_hat.push_back(draw.trace[k]);
      out.y_next.push_back(draw.y[k]);
    }
    return out;
  });
}

nlohmann::json estimate_json(const stats::MeanEstimate& e) {
  return {{"mean", e.mean}, {"stderr", e.stderr_}};
}

}  // namespace

void to_json(nlohmann::json& j, const CheckReport& report) {
  j = nlohmann::json{{"check", report.check},   {"params", report.params},
                     {"measured", report.measured}, {"bound", report.bound},
                     {"margin", report.margin}, {"pass", report.pass}};
  if (!report.note.empty()) j["note"] = report.note;
}

std::vector<CheckReport> check_variance_bounds(const DistributionSpec& spec,
                                               std::span<const std::size_t> ks, std::size_t n,
                                               std::size_t reps, std::uint64_t seed) {
  require_karamata(spec);
  check_reps(reps);
  const auto draws = representation_draws(spec, ks, n, reps, seed);
  const double g = spec.gamma;

  std::vector<CheckReport> reports;
  for (std::size_t j = 0; j < ks.size(); ++j) {
    const double k = static_cast<double>(ks[j]);
    std::vector<double> est(reps), bar(reps), bar2(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      est[r] = draws[r].gamma_hat[j];
      bar[r] = von_mises_eta_bar(spec, std::exp(draws[r].y_next[j]));
      bar2[r] = bar[r] * bar[r];
    }
    const auto var = stats::variance_with_stderr(est);
    const auto e_bar = stats::mean_with_stderr(bar);
    const auto e_bar2 = stats::mean_with_stderr(bar2);

    const double base = g * g / k;
    const double lower = base - 2.0 * g / k * e_bar.mean;
    const double upper = base + 2.0 * g / k * e_bar.mean + 5.0 / k * e_bar2.mean;
    const double se_lower = 2.0 * g / k * e_bar.stderr_;
    const double se_upper = std::hypot(2.0 * g / k * e_bar.stderr_, 5.0 / k * e_bar2.stderr_);
    const double lower_margin = var.variance - lower + 3.0 * std::hypot(var.stderr_, se_lower);
    const double upper_margin = upper - var.variance + 3.0 * std::hypot(var.stderr_, se_upper);

    CheckReport rep;
    rep.check = "variance_bounds";
    rep.params = {{"spec", spec}, {"k", ks[j]}, {"n", n}, {"reps", reps}, {"seed", seed}};
    rep.measured = {{"variance", var.variance},
                    {"variance_stderr", var.stderr_},
                    {"k_times_variance", k * var.variance},
                    {"E_eta_bar", estimate_json(e_bar)},
                    {"E_eta_bar_sq", estimate_json(e_bar2)}};
    rep.bound = {{"lower", lower}, {"upper", upper}, {"sigma_multiplier", 3}};
    rep.margin = std::min(lower_margin, upper_margin);
    rep.pass = rep.margin >= 0.0;
    reports.push_back(std::move(rep));
  }
  return reports;
}

CheckReport check_variance_bounds(const DistributionSpec& spec, std::size_t k, std::size_t n,
                                  std::size_t reps, std::uint64_t seed) {
  const std::size_t ks[] = {k};
  return check_variance_bounds(spec, ks, n, reps, seed).front();
}

CheckReport check_bias_identity(const DistributionSpec& spec, std::size_t k, std::size_t n,
                                std::size_t reps, std::uint64_t seed) {
  require_karamata(spec);
  check_reps(reps);
  const std::size_t ks[] = {k};
  const auto draws = representation_draws(spec, ks, n, reps, seed);
  std::vector<double> lhs(reps), rhs(reps), diff(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    lhs[r] = draws[r].gamma_hat[0] - spec.gamma;
  }
  // b may need quadrature; evaluate it in parallel as well.
  rhs = per_replicate<double>(reps, [&](std::size_t r) {
    return bias_b(spec, std::exp(draws[r].y_next[0]));
  });
  for (std::size_t r = 0; r < reps; ++r) diff[r] = lhs[r] - rhs[r];
  const auto left = stats::mean_with_stderr(lhs);
  const auto right = stats::mean_with_stderr(rhs);
  const auto paired = stats::mean_with_stderr(diff);
  const double pooled = std::hypot(left.stderr_, right.stderr_);

  CheckReport rep;
  rep.check = "bias_identity";
  rep.params = {{"spec", spec}, {"k", k}, {"n", n}, {"reps", reps}, {"seed", seed}};
  rep.measured = {{"mean_gamma_hat_minus_gamma", estimate_json(left)},
                  {"mean_b", estimate_json(right)},
                  {"difference", left.mean - right.mean},
                  {"paired_stderr", paired.stderr_}};
  rep.bound = {{"pooled_stderr", pooled}, {"sigma_multiplier", 3}};
  rep.margin = 3.0 * pooled - std::abs(left.mean - right.mean);
  rep.pass = rep.margin >= 0.0;
  return rep;
}

CheckReport check_gamma_tail(std::size_t k, std::size_t reps, double delta, std::uint64_t seed) {
  check_reps(reps);
  require(k >= 1, ErrorCode::invalid_argument, "k must be positive");
  require(delta > 0.0 && delta < 1.0, ErrorCode::invalid_argument, "delta must lie in (0, 1)");
  const double kk = static_cast<double>(k);
  const double l = std::log(2.0 / delta);
  const double threshold = (std::sqrt(2.0 * l) + l / std::sqrt(kk)) / std::sqrt(kk);  // gamma = 1
  const DistributionSpec pareto = pure_pareto(1.0);
  // For a pure Pareto sample gamma_hat(k) depends on the top k+1 order
  // statistics only and its law does not involve n, so n = k + 1 suffices.
  const auto exceed = per_replicate<int>(reps, [&](std::size_t r) {
    const HillTrace trace = hill_trace(sample(pareto, k + 1, stream_seed(seed, r)));
    return std::abs(trace[k] - 1.0) >= threshold ? 1 : 0;
  });
  double hits = 0.0;
  for (int e : exceed) hits += e;
  const double freq = hits / static_cast<double>(reps);
  const double target = 2.0 * delta;

  CheckReport rep;
  rep.check = "gamma_tail";
  rep.params = {{"k", k}, {"reps", reps}, {"delta", delta}, {"seed", seed}};
  rep.measured = {{"frequency", freq}, {"threshold", threshold}};
  if (target >= 1.0) {
    rep.bound = {{"max_frequency", target}};
    rep.margin = target - freq;
    rep.pass = true;
    rep.note = "bound is vacuous for delta >= 1/2";
    return rep;
  }
  const double allowed = target + 3.0 * binomial_stderr(target, reps);
  rep.bound = {{"max_frequency", target}, {"allowed", allowed}};
  rep.margin = allowed - freq;
  rep.pass = rep.margin >= 0.0;
  return rep;
}

CheckReport check_order_stat_tail(std::size_t n, std::size_t k, double delta, std::size_t reps,
                                  std::uint64_t seed) {
  check_reps(reps);
  require(k >= 1 && k < n, ErrorCode::invalid_argument, "need 1 <= k < n");
  require(delta > 0.0 && delta < 1.0, ErrorCode::invalid_argument, "delta must lie in (0, 1)");
  const double nn = static_cast<double>(n), kk = static_cast<double>(k);
  const double level = k_delta(kk, delta) / nn;
  // exp(-Y_(k+1)) is the (k+1)-th smallest of n uniforms, Beta(k+1, n-k);
  // the event exp(Y_(k+1)) >= n / k^delta reads U <= k^delta / n.
  const auto hit = per_replicate<int>(reps, [&](std::size_t r) {
    Engine engine = make_engine(stream_seed(seed, r));
    std::gamma_distribution<double> a(kk + 1.0, 1.0), b(nn - kk, 1.0);
    const double ga = a(engine), gb = b(engine);
    return ga / (ga + gb) <= level ? 1 : 0;
  });
  double hits = 0.0;
  for (int h : hit) hits += h;
  const double freq = hits / static_cast<double>(reps);
  const double exact = level >= 1.0 ? 1.0 : boost::math::ibeta(kk + 1.0, nn - kk, level);
  const double allowed = 1.0 - delta - 3.0 * binomial_stderr(1.0 - delta, reps);

  CheckReport rep;
  rep.check = "order_stat_tail";
  rep.params = {{"n", n}, {"k", k}, {"delta", delta}, {"reps", reps}, {"seed", seed}};
  rep.measured = {{"frequency", freq}, {"exact_probability", exact}, {"k_delta", level * nn}};
  rep.bound = {{"min_frequency", 1.0 - delta}, {"allowed", allowed}};
  rep.margin = freq - allowed;
  rep.pass = rep.margin >= 0.0;
  return rep;
}

CheckReport check_maxdev_scaling(std::span<const std::size_t> n_list, std::size_t reps,
                                 std::uint64_t seed) {
  check_reps(reps);
  require(!n_list.empty(), ErrorCode::invalid_argument, "empty n list");
  std::vector<double> x, medians;
  nlohmann::json per_n = nlohmann::json::array();
  const VonMises zero = VonMises::zero();
  for (std::size_t idx = 0; idx < n_list.size(); ++idx) {
    const std::size_t n = n_list[idx];
    const std::size_t top = n / 10;
    require(top >= 30, ErrorCode::invalid_argument, "n / 10 must be at least 30");
    const std::uint64_t n_seed = stream_seed(seed, n);
    const auto z = per_replicate<double>(reps, [&](std::size_t r) {
      const HillTrace trace = hill_from_representation(1.0, zero, n, top, stream_seed(n_seed, r));
      double worst = 0.0;
      for (std::size_t i = 30; i <= top; ++i) {
        worst = std::max(worst, std::sqrt(static_cast<double>(i)) * std::abs(trace[i] - 1.0));
      }
      return worst;
    });
    const double med = stats::median(z);
    const double scale = std::sqrt(2.0 * std::log(std::log(static_cast<double>(n))));
    x.push_back(scale);
    medians.push_back(med);
    per_n.push_back({{"n", n}, {"median_Z", med}, {"sqrt_2_lnln_n", scale}});
  }
  const double slope = stats::origin_slope(x, medians);

  CheckReport rep;
  rep.check = "maxdev_scaling";
  rep.params = {{"n_list", std::vector<std::size_t>(n_list.begin(), n_list.end())},
                {"reps", reps},
                {"seed", seed}};
  rep.measured = {{"slope", slope}, {"per_n", per_n}};
  rep.bound = {{"slope_min", 0.5}, {"slope_max", 1.5}};
  rep.margin = std::min(slope - 0.5, 1.5 - slope);
  rep.pass = rep.margin >= 0.0;
  rep.note = "informational: asymptotic slope is 1";
  return rep;
}

KlDivergence kl_changepoint(double gamma, double gamma_i, double tau_i) {
  require(gamma > 0.0 && gamma_i > 0.0, ErrorCode::invalid_argument, "indices must be positive");
  require(tau_i > 1.0, ErrorCode::invalid_argument, "breakpoint must exceed 1");
  const double mass = std::pow(tau_i, -1.0 / gamma);  // P_0 mass above the breakpoint
  const double x = gamma_i / gamma;
  KlDivergence kl;
  kl.value = mass * (x - 1.0 - std::log(x));
  kl.quadratic_bound = mass * (x - 1.0) * (x - 1.0) / 2.0;
  kl.bound_holds = gamma_i <= gamma || kl.value <= kl.quadratic_bound * (1.0 + 1e-12);
  return kl;
}

KlEstimate kl_changepoint_mc(double gamma, double gamma_i, double tau_i, std::size_t draws,
                             std::uint64_t seed) {
  require(draws >= 2, ErrorCode::insufficient_reps, "need at least two draws");
  const DistributionSpec alt = pareto_change_point(gamma_i, gamma, tau_i);
  const SortedSample xs = sample(alt, draws, seed);
  std::vector<double> llr(draws, 0.0);
  const double shift = std::log(gamma / gamma_i);
  const double slope = 1.0 / gamma - 1.0 / gamma_i;
  for (std::size_t j = 0; j < draws; ++j) {
    const double x = xs.values[j];
    if (x > tau_i) llr[j] = shift + slope * std::log(x / tau_i);
  }
  const auto e = stats::mean_with_stderr(llr);
  return {e.mean, e.stderr_};
}

LowerBoundFamily lower_bound_family(double gamma0, double rho, std::size_t n, double v) {
  using std::numbers::e;
  require(gamma0 > 0.0, ErrorCode::hypotheses_not_met, "gamma > 0");
  require(rho < -1.0, ErrorCode::hypotheses_not_met, "rho < -1");
  require(v > 0.0 && v <= e / (1.0 + 2.0 * e), ErrorCode::hypotheses_not_met,
          "0 < v <= e/(1+2e)");
  const auto M = static_cast<std::size_t>(std::floor(std::log(static_cast<double>(n))));
  require(static_cast<double>(M) > std::exp(1.0 / v), ErrorCode::hypotheses_not_met,
          "M = floor(ln n) > e^{1/v}");

  LowerBoundFamily fam;
  fam.gamma0 = gamma0;
  fam.rho = rho;
  fam.v = v;
  fam.n = n;
  fam.M = M;
  const double m = static_cast<double>(M);
  const double a = 1.0 + 2.0 * std::abs(rho);
  fam.c_rho = 1.0 - std::exp(-1.0 / (2.0 * a * a));
  fam.log_ratio = std::log(static_cast<double>(n) / (v * std::log(m)));
  fam.bracket_holds = m / 2.0 <= fam.log_ratio && fam.log_ratio <= m;

  const double budget = v * std::log(m);
  fam.kl_budget_holds = true;
  for (std::size_t i = 1; i <= M; ++i) {
    Alternative alt;
    alt.rho_i = rho + static_cast<double>(i) / m;
    const double ai = 1.0 + 2.0 * std::abs(alt.rho_i);
    alt.tau_i = std::exp(gamma0 * fam.log_ratio / ai);
    alt.gamma_i = gamma0 + gamma0 * std::exp(alt.rho_i * fam.log_ratio / ai);
    alt.kl_i = kl_changepoint(gamma0, alt.gamma_i, alt.tau_i).value;
    alt.kl_budget_slack = budget - static_cast<double>(n) * alt.kl_i;
    fam.kl_budget_holds = fam.kl_budget_holds && alt.kl_budget_slack >= 0.0;
    fam.alternatives.push_back(alt);
  }

  // |gamma_j - gamma_i| / gamma_i >= (C_rho/2) (n/(v ln M))^{rho_i/(1+2|rho_i|)}, j < i.
  fam.separation_holds = true;
  fam.min_separation_slack = INFINITY;
  for (std::size_t i = 2; i <= M; ++i) {
    const Alternative& ai = fam.alternatives[i - 1];
    const double target = fam.c_rho / 2.0 *
                          std::exp(ai.rho_i * fam.log_ratio / (1.0 + 2.0 * std::abs(ai.rho_i)));
    for (std::size_t j = 1; j < i; ++j) {
      const double gap = std::abs(fam.alternatives[j - 1].gamma_i - ai.gamma_i) / ai.gamma_i;
      fam.min_separation_slack = std::min(fam.min_separation_slack, gap - target);
    }
  }
  if (M < 2) fam.min_separation_slack = 0.0;
  fam.separation_holds = fam.min_separation_slack >= 0.0;
  return fam;
}

double eta_alternative(const LowerBoundFamily& family, std::size_t i, double t) {
  require(i >= 1 && i <= family.M, ErrorCode::invalid_argument, "alternative index out of range");
  const Alternative& alt = family.alternatives[i - 1];
  const double t_break = std::pow(alt.tau_i, 1.0 / family.gamma0);
  return t <= t_break ? family.gamma0 - alt.gamma_i : 0.0;
}

bool eta_bound_holds(const LowerBoundFamily& family, std::size_t i, double t) {
  const double bound = family.gamma0 * std::pow(t, family.alternatives.at(i - 1).rho_i);
  return std::abs(eta_alternative(family, i, t)) <= bound * (1.0 + 1e-12);
}

void to_json(nlohmann::json& j, const LowerBoundFamily& family) {
  nlohmann::json alts = nlohmann::json::array();
  for (std::size_t i = 0; i < family.alternatives.size(); ++i) {
    const auto& a = family.alternatives[i];
    alts.push_back({{"i", i + 1},
                    {"rho_i", a.rho_i},
                    {"tau_i", a.tau_i},
                    {"gamma_i", a.gamma_i},
                    {"kl_i", a.kl_i},
                    {"n_kl_i", static_cast<double>(family.n) * a.kl_i},
                    {"kl_budget_slack", a.kl_budget_slack}});
  }
  j = nlohmann::json{{"gamma0", family.gamma0},
                     {"rho", family.rho},
                     {"v", family.v},
                     {"n", family.n},
                     {"M", family.M},
                     {"c_rho", family.c_rho},
                     {"log_ratio", family.log_ratio},
                     {"kl_budget", family.v * std::log(static_cast<double>(family.M))},
                     {"bracket_holds", family.bracket_holds},
                     {"kl_budget_holds", family.kl_budget_holds},
                     {"separation_holds", family.separation_holds},
                     {"min_separation_slack", family.min_separation_slack},
                     {"alternatives", alts}};
}

}  // namespace hilltail
