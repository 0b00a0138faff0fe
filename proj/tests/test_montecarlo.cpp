#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "hilltail/distributions.hpp"
#include "hilltail/error.hpp"
#include "hilltail/montecarlo.hpp"
#include "hilltail/stats.hpp"

using namespace hilltail;

TEST(RmseProfile, PureParetoAtK100) {
  // gamma_hat(100) ~ Gamma(100, 1)/100: unbiased, rmse 1/sqrt(100)
  const auto p = rmse_profile(pure_pareto(1.0), 10000, 5000, 12, {100});
  ASSERT_EQ(p.k_grid.size(), 1u);
  EXPECT_NEAR(p.rmse[0], 0.1, 3.0 * p.stderr_[0]);
  EXPECT_GT(p.stderr_[0], 0.0);
}

TEST(RmseProfile, PureParetoDecaysAsInverseRoot) {
  const std::size_t n = 2000;
  std::vector<std::size_t> grid;
  for (std::size_t k = 10; k <= n / 10; k += 5) grid.push_back(k);
  const auto p = rmse_profile(pure_pareto(0.5), n, 400, 3, grid);
  std::vector<double> lx, ly;
  for (std::size_t j = 0; j < p.k_grid.size(); ++j) {
    lx.push_back(std::log(static_cast<double>(p.k_grid[j])));
    ly.push_back(std::log(p.rmse[j]));
  }
  EXPECT_NEAR(stats::ols_slope(lx, ly), -0.5, 0.05);
}

TEST(RmseProfile, ParallelMatchesSerial) {
  const auto spec = frechet(0.5);
  const auto par = rmse_profile(spec, 1000, 150, 9, full_grid(1000), 3);
  const auto ser = rmse_profile_serial(spec, 1000, 150, 9, full_grid(1000));
  ASSERT_EQ(par.k_grid, ser.k_grid);
  for (std::size_t j = 0; j < par.rmse.size(); ++j) {
    EXPECT_NEAR(par.rmse[j], ser.rmse[j], 1e-12 * ser.rmse[j]);
    EXPECT_NEAR(par.stderr_[j], ser.stderr_[j], 1e-9 * ser.stderr_[j] + 1e-15);
  }
}

TEST(RmseProfile, IdenticalAcrossWorkerCounts) {
  const auto spec = find_distribution("t2").value();
  const auto a = rmse_profile(spec, 1500, 130, 4, full_grid(1500), 1);
  const auto b = rmse_profile(spec, 1500, 130, 4, full_grid(1500), 4);
  const auto c = rmse_profile(spec, 1500, 130, 4, full_grid(1500), 8);
  EXPECT_EQ(a.rmse, b.rmse);
  EXPECT_EQ(a.rmse, c.rmse);
  EXPECT_EQ(a.k_grid, c.k_grid);
  // Student samples keep only their positive part
  EXPECT_LT(a.k_grid.back(), 1499u);
}

TEST(RmseProfile, InsufficientReps) {
  try {
    rmse_profile(pure_pareto(1.0), 100, 1, 1, {10});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::insufficient_reps);
  }
}

TEST(OracleIndex, SyntheticProfile) {
  RmseProfile p;
  for (std::size_t k = 1; k <= 40; ++k) {
    p.k_grid.push_back(k);
    const double d = static_cast<double>(k) - 12.0;
    p.rmse.push_back(1.0 + d * d);
  }
  const auto o = oracle_index(p);
  EXPECT_EQ(o.k_star, 12u);
  EXPECT_DOUBLE_EQ(o.rmse_star, 1.0);
  p.rmse[20] = 1.0;  // tie at k = 21
  EXPECT_EQ(oracle_index(p).k_star, 12u);
}

TEST(OracleIndex, MinimumOfEstimatedProfile) {
  const auto p = rmse_profile(find_distribution("H").value(), 2000, 200, 5, full_grid(2000));
  const auto o = oracle_index(p);
  for (double r : p.rmse) EXPECT_LE(o.rmse_star, r);
}

TEST(Compare, PureParetoRatiosAtLeastOne) {
  auto spec = pure_pareto(1.0);
  spec.name = "Pareto";
  const auto row = compare_selectors(spec, 2000, 200, 7, CompareConfig{});
  EXPECT_EQ(row.k_lepski.size(), 200u);
  EXPECT_GE(row.k_star, 1u);
  EXPECT_LE(row.k_star, 1999u);
  EXPECT_GE(row.ratio_rmse_lepski, 1.0);
  EXPECT_GE(row.mse_ratio_lepski, 1.0);
  EXPECT_GT(row.ratio_k_lepski, 0.0);
}

TEST(Compare, RowsIndependentOfCampaign) {
  const auto f1 = find_distribution("F1").value();
  const auto h = find_distribution("H").value();
  const auto alone = run_campaign({f1}, 1000, 40, 11, CompareConfig{});
  const auto both = run_campaign({h, f1}, 1000, 40, 11, CompareConfig{});
  EXPECT_EQ(alone.rows[0].k_lepski, both.rows[1].k_lepski);
  EXPECT_EQ(alone.rows[0].k_star, both.rows[1].k_star);
  EXPECT_THROW(run_campaign({}, 1000, 40, 11, CompareConfig{}), Error);
}

TEST(Compare, ReportSchemas) {
  const auto report = run_campaign({find_distribution("t4").value()}, 1000, 30, 2, CompareConfig{});
  std::ostringstream csv;
  write_report_csv(csv, report);
  std::istringstream lines(csv.str());
  std::string meta, header, row;
  std::getline(lines, meta);
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_EQ(meta.rfind("# {", 0), 0u);
  EXPECT_EQ(header,
            "name,gamma,k_star,rmse_star,median_k_lepski,median_k_dk,ratio_k_lepski,ratio_k_dk,"
            "ratio_rmse_lepski,ratio_rmse_dk,mse_ratio_lepski,mse_ratio_dk,median_ratio_lepski,"
            "median_ratio_dk");
  EXPECT_EQ(row.rfind("t4,0.25,", 0), 0u);
  EXPECT_EQ(csv.str().find('\r'), std::string::npos);

  const auto meta_json = nlohmann::json::parse(meta.substr(2));
  for (const char* key : {"version", "n", "reps", "master_seed", "config"}) EXPECT_TRUE(meta_json.contains(key));
  EXPECT_FALSE(meta_json.contains("workers"));

  const auto j = report_to_json(report);
  ASSERT_TRUE(j.contains("rows"));
  for (const char* key : {"name", "k_star", "rmse_star", "median_k_lepski", "median_k_dk", "ratio_k_lepski",
                          "ratio_k_dk", "ratio_rmse_lepski", "ratio_rmse_dk"}) {
    EXPECT_TRUE(j["rows"][0].contains(key)) << key;
  }

  std::ostringstream prof;
  write_profile_csv(prof, report.rows[0].profile, report.metadata);
  EXPECT_NE(prof.str().find("\nk,rmse,stderr\n1,"), std::string::npos);
}

TEST(Compare, ByteIdenticalAcrossWorkers) {
  std::vector<DistributionSpec> specs = {find_distribution("F0.5").value(), find_distribution("Pcp").value()};
  std::string first;
  for (int workers : {1, 4, 8}) {
    std::ostringstream csv;
    write_report_csv(csv, run_campaign(specs, 800, 70, 5, CompareConfig{}, workers));
    if (first.empty()) first = csv.str();
    EXPECT_EQ(csv.str(), first) << workers;
  }
}
