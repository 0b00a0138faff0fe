#include "hilltail/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include <omp.h>

#include "hilltail/error.hpp"
#include "hilltail/format.hpp"
#include "hilltail/hill.hpp"
#include "hilltail/rng.hpp"
#include "hilltail/stats.hpp"

namespace hilltail {

namespace {

constexpr std::size_t kMaxBlocks = 64;

struct BlockRange {
  std::size_t begin, end;
};

std::vector<BlockRange> make_blocks(std::size_t reps) {
  const std::size_t count = std::min(reps, kMaxBlocks);
  std::vector<BlockRange> blocks(count);
  for (std::size_t b = 0; b < count; ++b) blocks[b] = {b * reps / count, (b + 1) * reps / count};
  return blocks;
}

// Runs body(block_index, range) over all blocks on `workers` threads and
// rethrows the exception of the lowest failing block, if any.
template <typename Body>
void for_each_block(const std::vector<BlockRange>& blocks, int workers, Body&& body) {
  const int threads = workers > 0 ? workers : omp_get_max_threads();
  std::vector<std::exception_ptr> failures(blocks.size());
  const auto count = static_cast<std::ptrdiff_t>(blocks.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t b = 0; b < count; ++b) {
    try {
      body(static_cast<std::size_t>(b), blocks[static_cast<std::size_t>(b)]);
    } catch (...) {
      failures[static_cast<std::size_t>(b)] = std::current_exception();
    }
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

// Sums of squared and fourth-power standardised errors per grid point.
struct ErrorMoments {
  std::vector<double> sq, quad;
  std::vector<std::size_t> count;

  explicit ErrorMoments(std::size_t size) : sq(size, 0.0), quad(size, 0.0), count(size, 0) {}

  void add(const HillTrace& trace, double gamma, const std::vector<std::size_t>& grid) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const std::size_t k = grid[g];
      if (k > trace.size()) break;  // grid is sorted
      const double e = trace[k] / gamma - 1.0;
      const double e2 = e * e;
      sq[g] += e2;
      quad[g] += e2 * e2;
      ++count[g];
    }
  }

  void merge(const ErrorMoments& other) {
    for (std::size_t g = 0; g < sq.size(); ++g) {
      sq[g] += other.sq[g];
      quad[g] += other.quad[g];
      count[g] += other.count[g];
    }
  }
};

void check_grid(std::vector<std::size_t>& grid, std::size_t n) {
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  require(!grid.empty() && grid.front() >= 1 && grid.back() <= n - 1, ErrorCode::invalid_argument,
          "k grid must be a non-empty subset of [1, n-1]");
}

RmseProfile finish_profile(const DistributionSpec& spec, std::size_t n, std::size_t reps,
                           std::uint64_t seed, const std::vector<std::size_t>& grid,
                           const ErrorMoments& m) {
  RmseProfile p{spec, n, reps, seed, {}, {}, {}};
  const double r = static_cast<double>(reps);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (m.count[g] != reps) continue;
    const double mse = m.sq[g] / r;
    const double var_sq = std::max(0.0, (m.quad[g] / r - mse * mse) * r / (r - 1.0));
    const double rmse = std::sqrt(mse);
    p.k_grid.push_back(grid[g]);
    p.rmse.push_back(rmse);
    p.stderr_.push_back(rmse > 0.0 ? std::sqrt(var_sq / r) / (2.0 * rmse) : 0.0);
  }
  require(!p.k_grid.empty(), ErrorCode::insufficient_positive_data,
          "no grid point is covered by every replicate");
  return p;
}

void check_reps(std::size_t reps, std::size_t n) {
  require(reps >= 2, ErrorCode::insufficient_reps, "at least two replicates are needed");
  require(n >= 2, ErrorCode::invalid_argument, "sample size must be at least 2");
}

HillTrace replicate_trace(const DistributionSpec& spec, std::size_t n, std::uint64_t seed,
                          std::size_t r) {
  return hill_trace(sample(spec, n, stream_seed(seed, r)));
}

}  // namespace

std::vector<std::size_t> full_grid(std::size_t n) {
  std::vector<std::size_t> grid(n > 1 ? n - 1 : 0);
  for (std::size_t k = 1; k < n; ++k) grid[k - 1] = k;
  return grid;
}

RmseProfile rmse_profile(const DistributionSpec& spec, std::size_t n, std::size_t reps,
                         std::uint64_t seed, std::vector<std::size_t> k_grid, int workers) {
  check_reps(reps, n);
  check_grid(k_grid, n);
  const auto blocks = make_blocks(reps);
  std::vector<ErrorMoments> partial(blocks.size(), ErrorMoments(k_grid.size()));
  for_each_block(blocks, workers, [&](std::size_t b, BlockRange range) {
    for (std::size_t r = range.begin; r < range.end; ++r) {
      partial[b].add(replicate_trace(spec, n, seed, r), spec.gamma, k_grid);
    }
  });
  ErrorMoments total(k_grid.size());
  for (const auto& p : partial) total.merge(p);
  return finish_profile(spec, n, reps, seed, k_grid, total);
}

RmseProfile rmse_profile_serial(const DistributionSpec& spec, std::size_t n, std::size_t reps,
                                std::uint64_t seed, std::vector<std::size_t> k_grid) {
  check_reps(reps, n);
  check_grid(k_grid, n);
  ErrorMoments total(k_grid.size());
  for (std::size_t r = 0; r < reps; ++r) {
    total.add(replicate_trace(spec, n, seed, r), spec.gamma, k_grid);
  }
  return finish_profile(spec, n, reps, seed, k_grid, total);
}

OracleIndex oracle_index(const RmseProfile& profile) {
  require(!profile.k_grid.empty(), ErrorCode::invalid_argument, "empty profile");
  std::size_t best = 0;
  for (std::size_t g = 1; g < profile.rmse.size(); ++g) {
    if (profile.rmse[g] < profile.rmse[best]) best = g;
  }
  return {profile.k_grid[best], profile.rmse[best]};
}

nlohmann::json to_json_config(const CompareConfig& cfg) {
  return nlohmann::json{{"c", cfg.c},
                        {"k_min", cfg.k_min},
                        {"dk_zeta", cfg.dk.zeta},
                        {"dk_rho_hat_abs", cfg.dk.rho_hat_abs},
                        {"dk_r", "2 n^(1/4)"},
                        {"change_point_tau", "tau = 15 (Pcp) and 25 (Pcp-bis): quantiles of order "
                                             "1-1/15 and 1-1/25 of the gamma'=1 branch"}};
}

ExperimentRow compare_selectors(const DistributionSpec& spec, std::size_t n, std::size_t reps,
                                std::uint64_t seed, const CompareConfig& cfg, int workers) {
  check_reps(reps, n);
  SelectionConfig dk_cfg = cfg.dk;
  dk_cfg.rule = Rule::DreesKaufmann;
  dk_cfg.k_min = cfg.k_min;
  validate(dk_cfg);

  ExperimentRow row;
  row.name = spec.name.empty() ? std::string(to_string(spec.family)) : spec.name;
  row.gamma = spec.gamma;
  row.k_lepski.resize(reps);
  row.k_dk.resize(reps);
  row.err_lepski.resize(reps);
  row.err_dk.resize(reps);
  row.err_star.resize(reps);

  const auto grid = full_grid(n);
  const auto blocks = make_blocks(reps);
  std::vector<ErrorMoments> partial(blocks.size(), ErrorMoments(grid.size()));
  for_each_block(blocks, workers, [&](std::size_t b, BlockRange range) {
    for (std::size_t r = range.begin; r < range.end; ++r) {
      const HillTrace trace = replicate_trace(spec, n, seed, r);
      partial[b].add(trace, spec.gamma, grid);
      const SelectionResult lep = lepski_practical(trace, cfg.c, cfg.k_min);
      const SelectionResult dk = drees_kaufmann(trace, dk_cfg);
      row.k_lepski[r] = lep.k_hat;
      row.k_dk[r] = dk.k_hat;
      row.err_lepski[r] = lep.gamma_hat / spec.gamma - 1.0;
      row.err_dk[r] = dk.gamma_hat / spec.gamma - 1.0;
    }
  });
  ErrorMoments total(grid.size());
  for (const auto& p : partial) total.merge(p);
  row.profile = finish_profile(spec, n, reps, seed, grid, total);
  const OracleIndex oracle = oracle_index(row.profile);
  row.k_star = oracle.k_star;
  row.rmse_star = oracle.rmse_star;

  for_each_block(blocks, workers, [&](std::size_t, BlockRange range) {
    for (std::size_t r = range.begin; r < range.end; ++r) {
      row.err_star[r] = replicate_trace(spec, n, seed, r)[row.k_star] / spec.gamma - 1.0;
    }
  });

  auto to_double = [](const std::vector<std::size_t>& v) {
    return std::vector<double>(v.begin(), v.end());
  };
  auto abs_all = [](std::vector<double> v) {
    for (auto& x : v) x = std::abs(x);
    return v;
  };
  auto rms = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
  };
  auto per_replicate_ratio = [&](const std::vector<double>& err) {
    std::vector<double> q(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      const double denom = std::abs(row.err_star[r]);
      q[r] = denom > 0.0 ? std::abs(err[r]) / denom : std::numeric_limits<double>::infinity();
    }
    return stats::median(std::move(q));
  };

  const double k_star = static_cast<double>(row.k_star);
  row.median_k_lepski = stats::median(to_double(row.k_lepski));
  row.median_k_dk = stats::median(to_double(row.k_dk));
  row.ratio_k_lepski = row.median_k_lepski / k_star;
  row.ratio_k_dk = row.median_k_dk / k_star;
  const double med_star = stats::median(abs_all(row.err_star));
  row.ratio_rmse_lepski = stats::median(abs_all(row.err_lepski)) / med_star;
  row.ratio_rmse_dk = stats::median(abs_all(row.err_dk)) / med_star;
  const double rms_star = rms(row.err_star);
  row.mse_ratio_lepski = rms(row.err_lepski) / rms_star;
  row.mse_ratio_dk = rms(row.err_dk) / rms_star;
  row.median_ratio_lepski = per_replicate_ratio(row.err_lepski);
  row.median_ratio_dk = per_replicate_ratio(row.err_dk);
  return row;
}

std::uint64_t row_seed(std::uint64_t master_seed, const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return stream_seed(master_seed, h);
}

nlohmann::json report_metadata(std::size_t n, std::size_t reps, std::uint64_t master_seed,
                               const CompareConfig& cfg) {
  return nlohmann::json{{"version", kVersion},
                        {"n", n},
                        {"reps", reps},
                        {"master_seed", master_seed},
                        {"config", to_json_config(cfg)}};
}

ExperimentReport run_campaign(const std::vector<DistributionSpec>& specs, std::size_t n,
                              std::size_t reps, std::uint64_t master_seed,
                              const CompareConfig& cfg, int workers) {
  require(!specs.empty(), ErrorCode::invalid_argument, "empty distribution list");
  ExperimentReport report;
  report.metadata = report_metadata(n, reps, master_seed, cfg);
  nlohmann::json names = nlohmann::json::array();
  for (const auto& spec : specs) {
    ExperimentRow row = compare_selectors(spec, n, reps, row_seed(master_seed, spec.name), cfg,
                                          workers);
    names.push_back(row.name);
    report.rows.push_back(std::move(row));
  }
  report.metadata["distributions"] = names;
  return report;
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  out << "# " << report.metadata.dump() << '\n';
  out << "name,gamma,k_star,rmse_star,median_k_lepski,median_k_dk,ratio_k_lepski,ratio_k_dk,"
         "ratio_rmse_lepski,ratio_rmse_dk,mse_ratio_lepski,mse_ratio_dk,median_ratio_lepski,"
         "median_ratio_dk\n";
  for (const auto& r : report.rows) {
    out << r.name << ',' << format_double(r.gamma) << ',' << r.k_star << ','
        << format_double(r.rmse_star) << ',' << format_double(r.median_k_lepski) << ','
        << format_double(r.median_k_dk) << ',' << format_double(r.ratio_k_lepski) << ','
        << format_double(r.ratio_k_dk) << ',' << format_double(r.ratio_rmse_lepski) << ','
        << format_double(r.ratio_rmse_dk) << ',' << format_double(r.mse_ratio_lepski) << ','
        << format_double(r.mse_ratio_dk) << ',' << format_double(r.median_ratio_lepski) << ','
        << format_double(r.median_ratio_dk) << '\n';
  }
}

nlohmann::json report_to_json(const ExperimentReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"name", r.name},
                    {"spec", r.profile.spec},
                    {"k_star", r.k_star},
                    {"rmse_star", r.rmse_star},
                    {"median_k_lepski", r.median_k_lepski},
                    {"median_k_dk", r.median_k_dk},
                    {"ratio_k_lepski", r.ratio_k_lepski},
                    {"ratio_k_dk", r.ratio_k_dk},
                    {"ratio_rmse_lepski", r.ratio_rmse_lepski},
                    {"ratio_rmse_dk", r.ratio_rmse_dk},
                    {"mse_ratio_lepski", r.mse_ratio_lepski},
                    {"mse_ratio_dk", r.mse_ratio_dk},
                    {"median_ratio_lepski", r.median_ratio_lepski},
                    {"median_ratio_dk", r.median_ratio_dk}});
  }
  return nlohmann::json{{"metadata", report.metadata}, {"rows", rows}};
}

void write_profile_csv(std::ostream& out, const RmseProfile& profile,
                       const nlohmann::json& metadata) {
  out << "# " << metadata.dump() << '\n';
  out << "k,rmse,stderr\n";
  for (std::size_t g = 0; g < profile.k_grid.size(); ++g) {
    out << profile.k_grid[g] << ',' << format_double(profile.rmse[g]) << ','
        << format_double(profile.stderr_[g]) << '\n';
  }
}

}  // namespace hilltail
