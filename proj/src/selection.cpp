#include "hilltail/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hilltail/error.hpp"

namespace hilltail {

namespace {

// |g(i) - g(k)| > r g(i) / sqrt(i), evaluated exactly as written.
bool pair_violates(const HillTrace& trace, std::size_t i, std::size_t k, double r) {
  const double gi = trace[i];
  return std::abs(gi - trace[k]) > r * gi / std::sqrt(static_cast<double>(i));
}

// Intersection of the acceptance intervals [g(i) - r g(i)/sqrt(i),
// g(i) + r g(i)/sqrt(i)] over the indices added so far. A k is out of the
// band exactly when some earlier i violates against it, so the running band
// turns the pairwise rule into one comparison per k.
class Band {
 public:
  Band(const HillTrace& trace, double r) : trace_(trace), r_(r) {}

  void add(std::size_t i) {
    const double g = trace_[i];
    const double half = r_ * g / std::sqrt(static_cast<double>(i));
    if (g - half > lo_) {
      lo_ = g - half;
      lo_i_ = i;
    }
    if (g + half < hi_) {
      hi_ = g + half;
      hi_i_ = i;
    }
    if (first_ == 0) first_ = i;
    last_ = i;
  }

  // Index i in the band's range violating against k, if any. Values within
  // rounding distance of an edge fall back to the pairwise test so the
  // answer always agrees with the rule as written.
  std::optional<std::size_t> violation(std::size_t k) const {
    if (first_ == 0) return std::nullopt;
    const double g = trace_[k];
    const double slack = 1e-12 * std::max({std::abs(g), std::abs(lo_), std::abs(hi_), 1e-300});
    const bool above = g > hi_ + slack, below = g < lo_ - slack;
    if (above || below) {
      const std::size_t i = above ? hi_i_ : lo_i_;
      if (pair_violates(trace_, i, k, r_)) return i;
      return scan(k);
    }
    if (g < hi_ - slack && g > lo_ + slack) return std::nullopt;
    return scan(k);
  }

 private:
  std::optional<std::size_t> scan(std::size_t k) const {
    for (std::size_t i = first_; i <= last_; ++i) {
      if (pair_violates(trace_, i, k, r_)) return i;
    }
    return std::nullopt;
  }

  const HillTrace& trace_;
  double r_;
  double lo_ = -std::numeric_limits<double>::infinity();
  double hi_ = std::numeric_limits<double>::infinity();
  std::size_t lo_i_ = 0, hi_i_ = 0, first_ = 0, last_ = 0;
};

SelectionResult make_result(const HillTrace& trace, std::size_t k_hat, Rule rule, double r,
                            std::optional<Witness> witness) {
  return SelectionResult{k_hat, trace[k_hat], rule, r, witness};
}

void require_length(const HillTrace& trace, std::size_t k_min) {
  require(k_min >= 1, ErrorCode::invalid_argument, "k_min must be at least 1");
  require(trace.size() > k_min, ErrorCode::sample_too_small,
          "trace of length " + std::to_string(trace.size()) + " does not exceed k_min = " +
              std::to_string(k_min));
}

void require_practical_size(const HillTrace& trace) {
  require(trace.sample_size >= 55, ErrorCode::sample_too_small,
          "sample size " + std::to_string(trace.sample_size) + " is below 55");
}

}  // namespace

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::LepskiPractical: return "LepskiPractical";
    case Rule::LepskiTheoretical: return "LepskiTheoretical";
    case Rule::DreesKaufmann: return "DreesKaufmann";
  }
  return "unknown";
}

Rule rule_from_string(std::string_view name) {
  if (name == "lepski" || name == "LepskiPractical") return Rule::LepskiPractical;
  if (name == "lepski-theoretical" || name == "LepskiTheoretical") return Rule::LepskiTheoretical;
  if (name == "dk" || name == "DreesKaufmann") return Rule::DreesKaufmann;
  throw Error(ErrorCode::invalid_argument, "unknown rule '" + std::string(name) + "'");
}

void validate(const SelectionConfig& cfg) {
  auto check = [](bool ok, const char* what) { require(ok, ErrorCode::invalid_argument, what); };
  check(cfg.c > 0.0, "c must be positive");
  check(cfg.k_min >= 1, "k_min must be at least 1");
  check(cfg.delta > 0.0 && cfg.delta < 0.25, "delta must lie in (0, 1/4)");
  check(cfg.c1 > 0.0 && cfg.c1_prime > 0.0 && cfg.c2 > 0.0 && cfg.c3 > 0.0,
        "theoretical constants must be positive");
  check(cfg.zeta > 0.0 && cfg.zeta < 1.0, "zeta must lie in (0, 1)");
  check(cfg.rho_hat_abs > 0.0, "|rho_hat| must be positive");
}

void to_json(nlohmann::json& j, const SelectionResult& result) {
  j = nlohmann::json{{"rule", to_string(result.rule)},
                     {"k_hat", result.k_hat},
                     {"gamma_hat", result.gamma_hat},
                     {"r_used", result.r_used}};
  j["witness"] = result.witness ? nlohmann::json{{"i", result.witness->i}, {"k", result.witness->k}}
                                : nlohmann::json(nullptr);
}

double practical_threshold(std::size_t n, double c) {
  return std::sqrt(c * std::log(std::log(static_cast<double>(n))));
}

SelectionResult lepski_with_threshold(const HillTrace& trace, double r, std::size_t k_min) {
  require_length(trace, k_min);
  Band band(trace, r);
  for (std::size_t k = k_min; k <= trace.size(); ++k) {
    if (auto i = band.violation(k)) {
      return make_result(trace, k - 1, Rule::LepskiPractical, r, Witness{*i, k});
    }
    band.add(k);
  }
  return make_result(trace, trace.size(), Rule::LepskiPractical, r, std::nullopt);
}

SelectionResult lepski_with_threshold_reference(const HillTrace& trace, double r,
                                                std::size_t k_min) {
  require_length(trace, k_min);
  for (std::size_t k = k_min; k <= trace.size(); ++k) {
    for (std::size_t i = k_min; i <= k; ++i) {
      if (pair_violates(trace, i, k, r)) {
        return make_result(trace, k - 1, Rule::LepskiPractical, r, Witness{i, k});
      }
    }
  }
  return make_result(trace, trace.size(), Rule::LepskiPractical, r, std::nullopt);
}

SelectionResult lepski_practical(const HillTrace& trace, double c, std::size_t k_min) {
  require(c > 0.0, ErrorCode::invalid_argument, "c must be positive");
  require_practical_size(trace);
  return lepski_with_threshold(trace, practical_threshold(trace.sample_size, c), k_min);
}

TheoreticalConstants theoretical_constants(std::size_t n, const SelectionConfig& cfg) {
  require(n >= 3, ErrorCode::sample_too_small, "theoretical rule needs n >= 3");
  const double nn = static_cast<double>(n);
  TheoreticalConstants k;
  k.ell_n = static_cast<std::size_t>(std::ceil(cfg.c2 * std::log(nn)));
  k.r_n = std::sqrt(cfg.c3 * std::log(std::log(nn)));
  k.xi_n = cfg.c1 * std::sqrt(std::log(std::log2(nn))) + cfg.c1_prime;
  const double log_2_over_delta = std::log(2.0 / cfg.delta);
  const double sqrt_ell = std::sqrt(static_cast<double>(k.ell_n));
  k.z_bar = (1.0 + 3.0 * k.r_n / sqrt_ell) *
            (k.xi_n + std::sqrt(8.0 * log_2_over_delta) + log_2_over_delta / sqrt_ell);
  k.r_delta = 10.0 * (k.r_n + k.z_bar);
  return k;
}

SelectionResult lepski_theoretical(const HillTrace& trace, const SelectionConfig& cfg) {
  validate(cfg);
  const std::size_t n = trace.sample_size;
  require(cfg.delta > 2.0 / static_cast<double>(n), ErrorCode::invalid_argument,
          "delta must exceed 2/n");
  const TheoreticalConstants constants = theoretical_constants(n, cfg);
  const std::size_t ell = constants.ell_n;
  const std::size_t last = trace.size();
  require(ell < last, ErrorCode::sample_too_small,
          "l_n = " + std::to_string(ell) + " is not below the trace length " +
              std::to_string(last));
  const double r = constants.r_delta;

  std::optional<Witness> witness;
  std::size_t k_hat = ell;
  Band band(trace, r);
  if (cfg.compare_all_indices) {
    for (std::size_t i = ell; i <= last; ++i) band.add(i);
    bool found = false;
    for (std::size_t k = last; k >= ell; --k) {
      const auto i = band.violation(k);
      if (!i) {
        k_hat = k;
        found = true;
        break;
      }
      if (!witness || k < witness->k) witness = Witness{*i, k};
    }
    if (found) witness.reset();
    // No eligible index at all: fall back to l_n and keep the witness.
  } else {
    for (std::size_t k = ell; k <= last; ++k) {
      if (auto i = band.violation(k)) {
        if (!witness) witness = Witness{*i, k};
      } else {
        k_hat = k;
      }
      band.add(k);
    }
  }
  return make_result(trace, k_hat, Rule::LepskiTheoretical, r, witness);
}

SelectionResult drees_kaufmann(const HillTrace& trace, const SelectionConfig& cfg) {
  validate(cfg);
  require_practical_size(trace);
  require_length(trace, cfg.k_min);
  const double n = static_cast<double>(trace.sample_size);
  const auto root = static_cast<std::size_t>(std::floor(std::sqrt(n)));
  require(root >= 1 && root <= trace.size(), ErrorCode::sample_too_small,
          "trace too short for the preliminary estimate at floor(sqrt(n))");

  const double r = 2.0 * std::pow(n, 0.25);
  const SelectionResult coarse = lepski_with_threshold(trace, r, cfg.k_min);
  const SelectionResult fine = lepski_with_threshold(trace, std::pow(r, cfg.zeta), cfg.k_min);

  const double rho = cfg.rho_hat_abs;
  const double gamma0 = trace[root];
  const double ratio = static_cast<double>(fine.k_hat) /
                       std::pow(static_cast<double>(coarse.k_hat), cfg.zeta);
  const double raw = std::pow(2.0 * rho + 1.0, -1.0 / rho) *
                     std::pow(2.0 * rho * gamma0, 1.0 / (1.0 + 2.0 * rho)) *
                     std::pow(ratio, 1.0 / (1.0 - cfg.zeta));

  const double lo = static_cast<double>(cfg.k_min), hi = static_cast<double>(trace.size());
  double rounded = std::nearbyint(raw);  // default rounding mode: half to even
  if (!(rounded >= lo)) rounded = lo;    // also catches NaN
  if (rounded > hi) rounded = hi;
  const auto k_hat = static_cast<std::size_t>(rounded);

  SelectionResult result = make_result(trace, k_hat, Rule::DreesKaufmann, r, coarse.witness);
  return result;
}

SelectionResult select(const HillTrace& trace, const SelectionConfig& cfg) {
  switch (cfg.rule) {
    case Rule::LepskiPractical: return lepski_practical(trace, cfg.c, cfg.k_min);
    case Rule::LepskiTheoretical: return lepski_theoretical(trace, cfg);
    case Rule::DreesKaufmann: return drees_kaufmann(trace, cfg);
  }
  throw Error(ErrorCode::invalid_argument, "unknown rule");
}

double k_delta(double k, double delta) {
  const double l = std::log(1.0 / delta);
  return k + std::sqrt(2.0 * k * l) + 2.0 * l;
}

std::size_t pivotal_k_n(const std::function<double(double)>& eta_bar, double gamma,
                        std::size_t n, double r_n, double delta, std::size_t k_lo) {
  require(k_lo >= 1 && k_lo <= n, ErrorCode::invalid_argument, "need 1 <= k_lo <= n");
  require(delta > 0.0 && delta < 1.0, ErrorCode::invalid_argument, "delta must lie in (0, 1)");
  const double nn = static_cast<double>(n);
  auto admissible = [&](std::size_t k) {
    const double kk = static_cast<double>(k);
    return std::sqrt(kk) * eta_bar(nn / k_delta(kk, delta)) <= gamma * r_n;
  };
  require(admissible(k_lo), ErrorCode::no_pivotal_index,
          "no k in [" + std::to_string(k_lo) + ", n] satisfies the balance inequality");
  // The left side is non-decreasing in k, so admissible indices form a prefix.
  std::size_t good = k_lo, bad = n + 1;
  while (bad - good > 1) {
    const std::size_t mid = good + (bad - good) / 2;
    (admissible(mid) ? good : bad) = mid;
  }
  return good;
}

}  // namespace hilltail
