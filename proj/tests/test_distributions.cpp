#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <gtest/gtest.h>

#include "hilltail/distributions.hpp"
#include "hilltail/error.hpp"
#include "hilltail/quadrature.hpp"

using namespace hilltail;

namespace {

double empirical_exceedance(const SortedSample& s, double x) {
  const auto count = std::count_if(s.values.begin(), s.values.end(), [x](double v) { return v > x; });
  return static_cast<double>(count) / static_cast<double>(s.size());
}

double binomial_se(double p, std::size_t n) { return std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

}  // namespace

TEST(TailQuantile, ParetoIsIdentityPower) {
  EXPECT_DOUBLE_EQ(tail_quantile(pure_pareto(1.0), 100.0), 100.0);
  EXPECT_NEAR(tail_quantile(pure_pareto(0.5), 100.0), 10.0, 1e-12);
  EXPECT_NEAR(tail_quantile(pure_pareto(1.0, 3.0), 10.0), 30.0, 1e-12);
}

TEST(TailQuantile, ChangePointContinuousAtBreak) {
  const auto pcp = pareto_change_point(1.5, 1.0, 15.0);
  EXPECT_NEAR(tail_quantile(pcp, 15.0), 15.0, 1e-12);
  EXPECT_NEAR(tail_quantile(pcp, 4.0), 4.0, 1e-12);
  // above the break: survival 15^{-1} (x/15)^{-1/1.5}
  const double x = tail_quantile(pcp, 60.0);
  EXPECT_NEAR(std::pow(x / 15.0, -1.0 / 1.5) / 15.0, 1.0 / 60.0, 1e-14);
}

TEST(TailQuantile, HDistAtE) {
  const double e = std::numbers::e;
  const double expected = std::sqrt(e) * std::exp(2.0 * (1.0 / e + 1.0 / e - 1.0));
  EXPECT_NEAR(tail_quantile(h_dist(), e), expected, 1e-12 * expected);
}

TEST(TailQuantile, HDistMatchesQuadratureOfKaramataForm) {
  const auto h = h_dist();
  for (double t : {1.5, 3.0, 20.0, 400.0}) {
    const auto q = adaptive_simpson([](double s) { return (2.0 / s) * std::log(1.0 / s) / s; }, 1.0, t,
                                    1e-13, 1e-13);
    const double expected = std::exp(0.5 * std::log(t) + q.value);
    EXPECT_NEAR(tail_quantile(h, t), expected, 1e-10 * expected) << "t=" << t;
  }
}

TEST(TailQuantile, FrechetInvertsCdf) {
  for (double g : {0.2, 0.5, 1.0}) {
    const auto f = frechet(g);
    for (double t : {1.5, 10.0, 1e4}) {
      const double x = tail_quantile(f, t);
      EXPECT_NEAR(1.0 - std::exp(-std::pow(x, -1.0 / g)), 1.0 / t, 1e-12 / t);
    }
  }
}

TEST(TailQuantile, LevyInvertsCdf) {
  // P(1/Z^2 > x) = P(|Z| < x^{-1/2}) = erf(1/sqrt(2x))
  for (double t : {2.0, 10.0, 1000.0}) {
    const double x = tail_quantile(levy(), t);
    EXPECT_NEAR(std::erf(1.0 / std::sqrt(2.0 * x)), 1.0 / t, 1e-12);
  }
}

TEST(TailQuantile, MonotoneOnMonotoneFamilies) {
  for (const auto& spec : {pure_pareto(1.0), frechet(0.5), log_gamma(), levy(),
                           pareto_change_point(1.25, 1.0, 25.0)}) {
    double prev = 0.0;
    for (double t = 1.01; t < 1e6; t *= 1.1) {
      const double u = tail_quantile(spec, t);
      EXPECT_GE(u, prev) << to_string(spec.family) << " t=" << t;
      prev = u;
    }
  }
}

TEST(TailQuantile, Rejections) {
  EXPECT_THROW(tail_quantile(pure_pareto(1.0), 1.0), Error);
  try {
    tail_quantile(student(2.0), 10.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unsupported_for_family);
  }
}

TEST(Sample, SortedAndDeterministic) {
  for (const auto& spec : benchmark_suite()) {
    const auto a = sample(spec, 2000, 17);
    const auto b = sample(spec, 2000, 17);
    EXPECT_EQ(a.values, b.values) << spec.name;
    EXPECT_TRUE(std::is_sorted(a.values.rbegin(), a.values.rend())) << spec.name;
    if (spec.family != Family::Student) {
      EXPECT_GT(a.values.back(), 0.0) << spec.name;
      EXPECT_EQ(a.positive_count(), a.size());
    }
  }
  EXPECT_NE(sample(frechet(1.0), 100, 1).values, sample(frechet(1.0), 100, 2).values);
}

TEST(Sample, ParetoExceedance) {
  const auto s = sample(pure_pareto(1.0), 100000, 3);
  EXPECT_NEAR(empirical_exceedance(s, 10.0), 0.1, 3.0 * binomial_se(0.1, s.size()));
}

TEST(Sample, CauchyExceedsOneWithQuarterProbability) {
  const auto s = sample(student(1.0), 100000, 4);
  EXPECT_NEAR(empirical_exceedance(s, 1.0), 0.25, 3.0 * binomial_se(0.25, s.size()));
  EXPECT_LT(s.positive_count(), s.size());
}

TEST(Sample, LevyMedian) {
  const auto s = sample(levy(), 100000, 5);
  const double q = boost::math::quantile(boost::math::normal(), 0.75);
  const double expected = 1.0 / (q * q);
  // the median is within the 0.5 +- 3 se order statistics
  const double se = 3.0 * binomial_se(0.5, s.size());
  const double lo = tail_quantile(levy(), 1.0 / (0.5 + se));
  const double hi = tail_quantile(levy(), 1.0 / (0.5 - se));
  const double median = s.values[s.size() / 2];
  EXPECT_GT(median, lo);
  EXPECT_LT(median, hi);
  EXPECT_NEAR(tail_quantile(levy(), 2.0), expected, 1e-10);
}

TEST(Sample, QuantileConsistency) {
  const std::size_t n = 100000;
  for (const auto& spec : {pure_pareto(1.0), frechet(0.5), log_gamma(), levy(),
                           pareto_change_point(1.5, 1.0, 15.0)}) {
    const auto s = sample(spec, n, 11);
    for (double t : {2.0, 10.0, 100.0}) {
      const double p = 1.0 / t;
      const double se = binomial_se(p, n);
      const double u = tail_quantile(spec, t);
      const double freq = empirical_exceedance(s, u);
      EXPECT_NEAR(freq, p, 3.5 * se) << to_string(spec.family) << " t=" << t;
    }
  }
  // the H sample is exact in its upper tail only
  const auto s = sample(h_dist(), n, 12);
  EXPECT_NEAR(empirical_exceedance(s, tail_quantile(h_dist(), 100.0)), 0.01, 3.5 * binomial_se(0.01, n));
}

TEST(VonMisesEta, KnownValues) {
  EXPECT_EQ(von_mises_eta(pure_pareto(1.0), 7.0), 0.0);
  EXPECT_NEAR(von_mises_eta(h_dist(), std::numbers::e), -2.0 / std::numbers::e, 1e-15);
  const auto pcp = pareto_change_point(1.5, 1.0, 15.0);
  EXPECT_DOUBLE_EQ(von_mises_eta(pcp, 14.0), -0.5);
  EXPECT_DOUBLE_EQ(von_mises_eta(pcp, 16.0), 0.0);
  for (const auto& spec : {frechet(1.0), student(2.0), log_gamma(), levy()}) {
    try {
      von_mises_eta(spec, 2.0);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::unsupported_for_family);
    }
  }
}

TEST(VonMisesEta, KaramataIdentity) {
  // d/dy ln U(e^y) = gamma + eta(e^y)
  for (const auto& spec : {h_dist(), pareto_change_point(1.5, 1.0, 15.0), pure_pareto(0.7)}) {
    for (int j = 0; j < 20; ++j) {
      const double y = 0.2 + 0.4 * j;  // log-spaced t from 1.2 to ~2700
      if (spec.family == Family::ParetoChangePoint && std::abs(y - std::log(15.0)) < 0.01) continue;
      const double h = 1e-5;
      const double d = (std::log(tail_quantile(spec, std::exp(y + h))) -
                        std::log(tail_quantile(spec, std::exp(y - h)))) / (2.0 * h);
      EXPECT_NEAR(d, spec.gamma + von_mises_eta(spec, std::exp(y)), 1e-6)
          << to_string(spec.family) << " y=" << y;
    }
  }
}

TEST(BiasB, ClosedForms) {
  EXPECT_EQ(bias_b(pure_pareto(2.0), 5.0), 0.0);
  const auto pcp = pareto_change_point(1.5, 1.0, 15.0);
  EXPECT_NEAR(bias_b(pcp, 5.0), -0.5 * (1.0 - 5.0 / 15.0), 1e-15);
  EXPECT_EQ(bias_b(pcp, 20.0), 0.0);
  const double t = 10.0;
  EXPECT_NEAR(bias_b(h_dist(), t), -std::log(t) / t - 1.0 / (2.0 * t), 1e-8);
}

TEST(BiasB, HDistMatchesBruteForceQuadrature) {
  // t int_t^inf (2/v^3) ln(1/v) dv, substituting v = t/w
  const double t = 10.0;
  const auto q = adaptive_simpson(
      [t](double w) {
        if (w <= 0.0) return 0.0;
        const double v = t / w;
        return (2.0 / (v * v * v)) * std::log(1.0 / v) * t / (w * w);
      },
      0.0, 1.0, 1e-14, 1e-14);
  EXPECT_NEAR(bias_b(h_dist(), t), t * q.value, 1e-8);
}

TEST(BiasB, DerivativeIdentity) {
  // b'(t) = (b(t) - eta(t)) / t
  for (const auto& spec : {h_dist(), pareto_change_point(1.5, 1.0, 15.0)}) {
    for (double t : {2.0, 5.0, 9.0, 40.0}) {
      const double h = 1e-4 * t;
      const double d = (bias_b(spec, t + h) - bias_b(spec, t - h)) / (2.0 * h);
      EXPECT_NEAR(d, (bias_b(spec, t) - von_mises_eta(spec, t)) / t, 1e-6) << t;
    }
  }
}

TEST(VonMisesFunction, PiecewiseIntegralIsExact) {
  const auto eta = von_mises(pareto_change_point(1.5, 1.0, 15.0));
  ASSERT_TRUE(eta.is_piecewise_constant());
  const double lb = std::log(15.0);
  EXPECT_NEAR(eta.integrate_log(0.0, 5.0), -0.5 * lb, 1e-14);
  EXPECT_NEAR(eta.integrate_log(1.0, 2.0), -0.5, 1e-14);
  EXPECT_EQ(eta.integrate_log(3.0, 4.0), 0.0);
  EXPECT_DOUBLE_EQ(eta(14.0), -0.5);
  EXPECT_DOUBLE_EQ(eta(16.0), 0.0);
}

TEST(VonMisesFunction, SmoothIntegralMatchesClosedForm) {
  const auto eta = von_mises(h_dist());
  ASSERT_FALSE(eta.is_piecewise_constant());
  // int_a^b -2 y e^{-y} dy = 2[(y + 1) e^{-y}]_a^b
  const double a = 0.3, b = 4.0;
  const double expected = 2.0 * ((b + 1.0) * std::exp(-b) - (a + 1.0) * std::exp(-a));
  EXPECT_NEAR(eta.integrate_log(a, b), expected, 1e-9);
}

TEST(DistributionSpec, SuiteRows) {
  const auto& suite = benchmark_suite();
  ASSERT_EQ(suite.size(), 12u);
  const std::vector<std::string> names = {"F0.2", "F0.5", "F1",        "t1",     "t2",  "t4",
                                          "t10",  "H",    "log-gamma", "Stable", "Pcp", "Pcp-bis"};
  for (std::size_t i = 0; i < names.size(); ++i) EXPECT_EQ(suite[i].name, names[i]);
  EXPECT_DOUBLE_EQ(find_distribution("t4")->gamma, 0.25);
  EXPECT_DOUBLE_EQ(*find_distribution("t4")->rho, -0.5);
  EXPECT_DOUBLE_EQ(*find_distribution("F1")->rho, -1.0);
  EXPECT_DOUBLE_EQ(find_distribution("Stable")->gamma, 2.0);
  EXPECT_DOUBLE_EQ(find_distribution("Pcp-bis")->params.tau, 25.0);
  EXPECT_FALSE(find_distribution("nope").has_value());
}

TEST(DistributionSpec, JsonRoundTrip) {
  for (const auto& spec : benchmark_suite()) {
    const nlohmann::json j = spec;
    const auto back = j.get<DistributionSpec>();
    EXPECT_EQ(nlohmann::json(back), j);
    EXPECT_TRUE(j.contains("family") && j.contains("gamma") && j.contains("rho") && j.contains("params"));
  }
}

TEST(DistributionSpec, Validation) {
  EXPECT_THROW(pure_pareto(-1.0), Error);
  EXPECT_THROW(pareto_change_point(1.5, 1.0, 0.5), Error);
  EXPECT_THROW(pareto_change_point(1.5, -1.0, 15.0), Error);
  EXPECT_THROW(student(0.0), Error);
}
