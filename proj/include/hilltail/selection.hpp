#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>
#include <utility>

#include "hilltail/hill.hpp"
#include "json.hpp"

namespace hilltail {

enum class Rule { LepskiPractical, LepskiTheoretical, DreesKaufmann };

std::string_view to_string(Rule rule);
// Accepts the enum names and the CLI spellings lepski, lepski-theoretical, dk.
Rule rule_from_string(std::string_view name);

struct SelectionConfig {
  Rule rule = Rule::LepskiPractical;
  double c = 2.1;               // practical threshold r_n = sqrt(c ln ln n)
  std::size_t k_min = 30;
  double delta = 0.1;           // theoretical rule only, in (2/n, 1/4)
  double c1 = 4.0;
  double c1_prime = 34.0;
  double c2 = 100.0;            // l_n = ceil(c2 ln n)
  double c3 = 2.0;              // theoretical r_n = sqrt(c3 ln ln n)
  double zeta = 0.7;            // Drees-Kaufmann exponent
  double rho_hat_abs = 1.0;     // Drees-Kaufmann |rho|
  // Theoretical rule: compare against i in {l_n..n-1} instead of {l_n..k}.
  bool compare_all_indices = false;
};

void validate(const SelectionConfig& cfg);

struct Witness {
  std::size_t i = 0;
  std::size_t k = 0;
};

struct SelectionResult {
  std::size_t k_hat = 0;
  double gamma_hat = 0.0;
  Rule rule = Rule::LepskiPractical;
  double r_used = 0.0;
  std::optional<Witness> witness;
};

void to_json(nlohmann::json& j, const SelectionResult& result);

// r_n = sqrt(c ln ln n).
double practical_threshold(std::size_t n, double c);

// Smallest k >= k_min admitting i in {k_min..k} with
// |g(i) - g(k)| > r g(i) / sqrt(i), minus one; size() when no k violates.
// O(n) running-band scan.
SelectionResult lepski_with_threshold(const HillTrace& trace, double r, std::size_t k_min);
// Pairwise O(n^2) evaluation of the same rule, kept as the test reference.
SelectionResult lepski_with_threshold_reference(const HillTrace& trace, double r,
                                                std::size_t k_min);

SelectionResult lepski_practical(const HillTrace& trace, double c = 2.1, std::size_t k_min = 30);

// Constants of the theoretical rule for sample size n.
struct TheoreticalConstants {
  std::size_t ell_n = 0;  // ceil(c2 ln n)
  double r_n = 0.0;       // sqrt(c3 ln ln n)
  double xi_n = 0.0;      // c1 sqrt(ln log2 n) + c1'
  double z_bar = 0.0;     // (1 + 3 r_n / sqrt(l_n)) (xi_n + sqrt(8 ln(2/d)) + ln(2/d) / sqrt(l_n))
  double r_delta = 0.0;   // 10 (r_n + z_bar)
};

TheoreticalConstants theoretical_constants(std::size_t n, const SelectionConfig& cfg);

// Largest k in {l_n..n-1} whose estimate stays within r_n(delta) g(i)/sqrt(i)
// of every g(i), i in {l_n..k}.
SelectionResult lepski_theoretical(const HillTrace& trace, const SelectionConfig& cfg);

// k_DK = (2|rho|+1)^{-1/|rho|} (2|rho| g0)^{1/(1+2|rho|)}
//        (k(r^zeta) / k(r)^zeta)^{1/(1-zeta)}, r = 2 n^{1/4},
// g0 = gamma_hat(floor(sqrt n)); rounded half-to-even, clamped to [k_min, n-1].
SelectionResult drees_kaufmann(const HillTrace& trace, const SelectionConfig& cfg);

SelectionResult select(const HillTrace& trace, const SelectionConfig& cfg);

// k^delta = k + sqrt(2 k ln(1/delta)) + 2 ln(1/delta)
double k_delta(double k, double delta);

// max{k in {k_lo..n} : sqrt(k) eta_bar(n / k^delta) <= gamma r_n} for a
// non-increasing eta_bar. Throws no-pivotal-index when k_lo already fails.
std::size_t pivotal_k_n(const std::function<double(double)>& eta_bar, double gamma,
                        std::size_t n, double r_n, double delta, std::size_t k_lo = 1);

}  // namespace hilltail
