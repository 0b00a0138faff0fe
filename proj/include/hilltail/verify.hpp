#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hilltail/distributions.hpp"
#include "json.hpp"

namespace hilltail {

// Outcome of one empirical check. `margin` is the slack left in the
// inequality after Monte-Carlo widening (negative means failure).
struct CheckReport {
  std::string check;
  nlohmann::json params;
  nlohmann::json measured;
  nlohmann::json bound;
  double margin = 0.0;
  bool pass = false;
  std::string note;
};

void to_json(nlohmann::json& j, const CheckReport& report);

// Var[gamma_hat(k)] against
//   gamma^2/k - (2 gamma/k) E[eta_bar(e^{Y_(k+1)})]
//   <= Var <= gamma^2/k + (2 gamma/k) E[eta_bar] + (5/k) E[eta_bar^2],
// every expectation by simulation of the exponential representation; the
// inequalities are widened by three standard errors.
CheckReport check_variance_bounds(const DistributionSpec& spec, std::size_t k, std::size_t n,
                                  std::size_t reps, std::uint64_t seed);
// Same check for several k from one set of replicates (one report per k).
std::vector<CheckReport> check_variance_bounds(const DistributionSpec& spec,
                                               std::span<const std::size_t> ks, std::size_t n,
                                               std::size_t reps, std::uint64_t seed);

// E gamma_hat(k) - gamma = E[b(e^{Y_(k+1)})], both sides from the same
// replicates; passes within three pooled standard errors.
CheckReport check_bias_identity(const DistributionSpec& spec, std::size_t k, std::size_t n,
                                std::size_t reps, std::uint64_t seed);

// Pure Pareto: P{|gamma_hat(k) - gamma| >= (gamma/sqrt k)(sqrt(2 ln(2/d)) + ln(2/d)/sqrt k)}
// <= 2 d, within three binomial standard errors.
CheckReport check_gamma_tail(std::size_t k, std::size_t reps, double delta, std::uint64_t seed);

// P{exp(Y_(k+1)) >= n / k^delta} >= 1 - delta, within three binomial
// standard errors.
CheckReport check_order_stat_tail(std::size_t n, std::size_t k, double delta, std::size_t reps,
                                  std::uint64_t seed);

// Median of max_{30 <= i <= n/10} sqrt(i) |gamma_hat(i) - gamma| / gamma on pure
// Pareto samples, regressed through the origin on sqrt(2 ln ln n). Passes
// when the slope lies in [0.5, 1.5].
CheckReport check_maxdev_scaling(std::span<const std::size_t> n_list, std::size_t reps,
                                 std::uint64_t seed);

// Kullback-Leibler divergence between a change-point law (index gamma below
// the breakpoint tau_i, gamma_i above) and the pure Pareto(gamma) law.
struct KlDivergence {
  double value = 0.0;
  double quadratic_bound = 0.0;  // tau_i^{-1/gamma} (gamma_i/gamma - 1)^2 / 2
  bool bound_holds = true;       // value <= bound; only asserted for gamma_i > gamma
};

KlDivergence kl_changepoint(double gamma, double gamma_i, double tau_i);

// Monte-Carlo estimate of E_{P_i}[ln dP_i/dP_0] from `draws` samples of P_i.
struct KlEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};
KlEstimate kl_changepoint_mc(double gamma, double gamma_i, double tau_i, std::size_t draws,
                             std::uint64_t seed);

struct Alternative {
  double rho_i = 0.0;
  double tau_i = 0.0;
  double gamma_i = 0.0;
  double kl_i = 0.0;
  double kl_budget_slack = 0.0;  // v ln M - n kl_i
};

struct LowerBoundFamily {
  double gamma0 = 0.0;
  double rho = 0.0;
  double v = 0.0;
  std::size_t n = 0;
  std::size_t M = 0;
  double c_rho = 0.0;
  double log_ratio = 0.0;      // ln(n / (v ln M))
  bool bracket_holds = false;  // M/2 <= ln(n / (v ln M)) <= M
  bool kl_budget_holds = false;
  bool separation_holds = false;
  double min_separation_slack = 0.0;
  std::vector<Alternative> alternatives;  // alternatives[i-1] is P_i
};

// Throws hypotheses-not-met naming the failed clause when rho >= -1,
// v is outside (0, e/(1+2e)] or floor(ln n) <= e^{1/v}.
LowerBoundFamily lower_bound_family(double gamma0, double rho, std::size_t n, double v);

// |eta_i(t)| <= gamma t^{rho_i} for the i-th alternative (relative slack 1e-12).
bool eta_bound_holds(const LowerBoundFamily& family, std::size_t i, double t);
double eta_alternative(const LowerBoundFamily& family, std::size_t i, double t);

void to_json(nlohmann::json& j, const LowerBoundFamily& family);

}  // namespace hilltail
