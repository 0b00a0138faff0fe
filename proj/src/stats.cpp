#include "hilltail/stats.hpp"

#include <algorithm>
#include <cmath>

#include "hilltail/error.hpp"

namespace hilltail::stats {

double mean(std::span<const double> x) {
  require(!x.empty(), ErrorCode::invalid_argument, "mean of an empty range");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  require(x.size() >= 2, ErrorCode::insufficient_reps, "variance needs two values");
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double median(std::vector<double> x) {
  require(!x.empty(), ErrorCode::invalid_argument, "median of an empty range");
  const std::size_t h = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(h), x.end());
  const double upper = x[h];
  if (x.size() % 2 == 1) return upper;
  const double lower = *std::max_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(h));
  return 0.5 * (lower + upper);
}

MeanEstimate mean_with_stderr(std::span<const double> x) {
  return {mean(x), std::sqrt(variance(x) / static_cast<double>(x.size()))};
}

VarianceEstimate variance_with_stderr(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double m = mean(x);
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = (v - m) * (v - m);
    m2 += d;
    m4 += d * d;
  }
  const double s2 = m2 / (n - 1.0);
  m4 /= n;
  const double biased = m2 / n;
  return {s2, std::sqrt(std::max(0.0, m4 - biased * biased) / n)};
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;  // series converges slowly; the value is 1 to double precision
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

double corrected_p(double d, double effective_n) {
  const double root = std::sqrt(effective_n);
  return kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
}

}  // namespace

KsResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
  require(!x.empty(), ErrorCode::invalid_argument, "KS test on an empty sample");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, corrected_p(d, n)};
}

KsResult ks_two_sample(std::vector<double> x, std::vector<double> y) {
  require(!x.empty() && !y.empty(), ErrorCode::invalid_argument, "KS test on an empty sample");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return {d, corrected_p(d, nx * ny / (nx + ny))};
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorCode::invalid_argument,
          "slope needs two aligned points");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

double origin_slope(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && !x.empty(), ErrorCode::invalid_argument,
          "slope needs aligned points");
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
  }
  return sxy / sxx;
}

}  // namespace hilltail::stats
