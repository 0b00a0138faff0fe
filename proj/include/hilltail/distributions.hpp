#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace hilltail {

enum class Family { PurePareto, Frechet, Student, LogGamma, Levy, HDist, ParetoChangePoint };

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);

struct DistributionParams {
  double scale = 1.0;        // pure Pareto: lower support bound
  double dof = 0.0;          // Student: degrees of freedom
  double gamma_prime = 0.0;  // change point: index below the breakpoint
  double tau = 0.0;          // change point: breakpoint (in x units)
};

struct DistributionSpec {
  Family family = Family::PurePareto;
  double gamma = 1.0;         // extreme value index
  std::optional<double> rho;  // second-order parameter, when listed
  DistributionParams params;
  std::string name;  // benchmark row name, empty for ad-hoc specs
};

// Throws Error(invalid_argument) when the spec breaks a family invariant.
void validate(const DistributionSpec& spec);

DistributionSpec pure_pareto(double gamma, double scale = 1.0);
DistributionSpec frechet(double gamma);
DistributionSpec student(double dof);
DistributionSpec log_gamma();
DistributionSpec levy();
DistributionSpec h_dist();
DistributionSpec pareto_change_point(double gamma, double gamma_prime, double tau,
                                     std::optional<double> rho = std::nullopt);

// The twelve benchmark rows, in table order:
// F0.2 F0.5 F1 t1 t2 t4 t10 H log-gamma Stable Pcp Pcp-bis.
const std::vector<DistributionSpec>& benchmark_suite();
// Looks a spec up by row name ("F1", "t4", "Pcp", ...). Also accepts "Pareto"
// (unit Pareto). Returns nullopt for unknown names.
std::optional<DistributionSpec> find_distribution(std::string_view name);

void to_json(nlohmann::json& j, const DistributionSpec& spec);
void from_json(const nlohmann::json& j, DistributionSpec& spec);

// Descending order statistics. Values are strictly positive except for
// Student samples, which keep their negative draws.
struct SortedSample {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  // Number of strictly positive order statistics (a prefix).
  std::size_t positive_count() const noexcept;
};

SortedSample make_sorted_sample(std::vector<double> values);

// U(t) = F^{-1}(1 - 1/t). Unsupported for Student.
double tail_quantile(const DistributionSpec& spec, double t);

SortedSample sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed);

// Von Mises function, on families with a tractable Karamata form
// (PurePareto, HDist, ParetoChangePoint).
double von_mises_eta(const DistributionSpec& spec, double s);
// sup_{u >= t} |eta(u)|
double von_mises_eta_bar(const DistributionSpec& spec, double t);
// b(t) = t * int_t^inf eta(v) / v^2 dv
double bias_b(const DistributionSpec& spec, double t);

// A von Mises function together with the one operation the exponential
// representation needs from it: integrals of eta(e^y) dy. Piecewise-constant
// functions integrate exactly; smooth ones go through adaptive Simpson.
class VonMises {
 public:
  // eta(s) = levels[j] for s in (breaks[j-1], breaks[j]], with breaks sorted
  // and levels.size() == breaks.size() + 1.
  static VonMises piecewise_constant(std::vector<double> breaks, std::vector<double> levels);
  static VonMises zero() { return piecewise_constant({}, {0.0}); }
  static VonMises smooth(std::function<double(double)> eta, double tolerance = 1e-9);

  double operator()(double s) const;
  // int_a^b eta(e^y) dy for a <= b.
  double integrate_log(double a, double b) const;
  bool is_piecewise_constant() const noexcept { return !smooth_; }

 private:
  std::function<double(double)> smooth_;
  double tolerance_ = 1e-9;
  std::vector<double> log_breaks_;
  std::vector<double> levels_;
};

VonMises von_mises(const DistributionSpec& spec);

}  // namespace hilltail
