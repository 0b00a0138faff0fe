#pragma once

#include <functional>
#include <span>
#include <vector>

namespace hilltail::stats {

double mean(std::span<const double> x);
// Unbiased sample variance.
double variance(std::span<const double> x);
// Midpoint of the two central order statistics for even sizes.
double median(std::vector<double> x);

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};
MeanEstimate mean_with_stderr(std::span<const double> x);

// Sample variance with the standard error sqrt((m4 - s^4) / n).
struct VarianceEstimate {
  double variance = 0.0;
  double stderr_ = 0.0;
};
VarianceEstimate variance_with_stderr(std::span<const double> x);

// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// One-sample test against a continuous cdf; asymptotic p-value with
// Stephens' small-sample correction.
KsResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::vector<double> x, std::vector<double> y);

// Least-squares slope of y on x, with intercept.
double ols_slope(std::span<const double> x, std::span<const double> y);
// Least-squares slope of y on x through the origin.
double origin_slope(std::span<const double> x, std::span<const double> y);

}  // namespace hilltail::stats
