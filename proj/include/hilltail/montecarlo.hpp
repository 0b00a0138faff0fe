#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "hilltail/distributions.hpp"
#include "hilltail/selection.hpp"
#include "json.hpp"

namespace hilltail {

// Standardised RMSE E[(gamma_hat(k)/gamma - 1)^2]^{1/2} per k.
struct RmseProfile {
  DistributionSpec spec;
  std::size_t n = 0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> k_grid;
  std::vector<double> rmse;
  std::vector<double> stderr_;  // delta-method Monte-Carlo standard error
};

// k = 1..n-1.
std::vector<std::size_t> full_grid(std::size_t n);

// Replicates are split into at most 64 contiguous blocks whose boundaries
// depend on reps only; blocks run in parallel and are reduced in block
// order, so the output is bit-identical for every worker count. Grid points
// beyond the trace length of some replicate (Student samples keep only their
// positive part) are dropped from the returned grid. workers = 0 uses the
// OpenMP default.
RmseProfile rmse_profile(const DistributionSpec& spec, std::size_t n, std::size_t reps,
                         std::uint64_t seed, std::vector<std::size_t> k_grid, int workers = 0);

// Single-threaded, unblocked accumulation. Agrees with rmse_profile up to
// floating-point reassociation.
RmseProfile rmse_profile_serial(const DistributionSpec& spec, std::size_t n, std::size_t reps,
                                std::uint64_t seed, std::vector<std::size_t> k_grid);

struct OracleIndex {
  std::size_t k_star = 0;
  double rmse_star = 0.0;
};

// Argmin of the profile, ties toward the smaller k.
OracleIndex oracle_index(const RmseProfile& profile);

struct CompareConfig {
  double c = 2.1;
  std::size_t k_min = 30;
  SelectionConfig dk;  // zeta and |rho_hat| for the Drees-Kaufmann rule
};

nlohmann::json to_json_config(const CompareConfig& cfg);

struct ExperimentRow {
  std::string name;
  double gamma = 0.0;
  std::size_t k_star = 0;
  double rmse_star = 0.0;
  double median_k_lepski = 0.0;
  double median_k_dk = 0.0;
  double ratio_k_lepski = 0.0;
  double ratio_k_dk = 0.0;
  // med |gamma_hat(k_hat)/gamma - 1| / med |gamma_hat(k*)/gamma - 1|
  double ratio_rmse_lepski = 0.0;
  double ratio_rmse_dk = 0.0;
  // root-mean-square variant: RMSE at k_hat over RMSE at k*
  double mse_ratio_lepski = 0.0;
  double mse_ratio_dk = 0.0;
  // median over replicates of |err(k_hat)| / |err(k*)|
  double median_ratio_lepski = 0.0;
  double median_ratio_dk = 0.0;
  RmseProfile profile;
  std::vector<std::size_t> k_lepski, k_dk;        // per replicate
  std::vector<double> err_lepski, err_dk, err_star;  // gamma_hat/gamma - 1 per replicate
};

// Runs both selectors on every replicate, estimates the oracle index from
// the same replicates over the full grid, then replays the replicates to
// read off gamma_hat(k*).
ExperimentRow compare_selectors(const DistributionSpec& spec, std::size_t n, std::size_t reps,
                                std::uint64_t seed, const CompareConfig& cfg, int workers = 0);

struct ExperimentReport {
  std::vector<ExperimentRow> rows;
  nlohmann::json metadata;
};

// Each row's replicate seed derives from (master_seed, row name), so a row
// does not depend on which other rows are in the campaign.
ExperimentReport run_campaign(const std::vector<DistributionSpec>& specs, std::size_t n,
                              std::size_t reps, std::uint64_t master_seed,
                              const CompareConfig& cfg, int workers = 0);

std::uint64_t row_seed(std::uint64_t master_seed, const std::string& name);

nlohmann::json report_metadata(std::size_t n, std::size_t reps, std::uint64_t master_seed,
                               const CompareConfig& cfg);

// CSV: '#' metadata line, header row, one row per distribution; LF endings.
void write_report_csv(std::ostream& out, const ExperimentReport& report);
nlohmann::json report_to_json(const ExperimentReport& report);
// CSV: '#' metadata line, then "k,rmse,stderr".
void write_profile_csv(std::ostream& out, const RmseProfile& profile,
                       const nlohmann::json& metadata);

}  // namespace hilltail
