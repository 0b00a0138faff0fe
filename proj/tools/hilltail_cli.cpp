// hilltail: tail-index estimation, simulation campaigns and verification runs.
//
// Exit codes: 0 ok, 2 input parse error, 3 data error (sample too small),
// 4 configuration error.

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hilltail/distributions.hpp"
#include "hilltail/error.hpp"
#include "hilltail/format.hpp"
#include "hilltail/hill.hpp"
#include "hilltail/montecarlo.hpp"
#include "hilltail/rng.hpp"
#include "hilltail/selection.hpp"
#include "hilltail/verify.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;
using namespace hilltail;

constexpr int kExitParse = 2;
constexpr int kExitData = 3;
constexpr int kExitConfig = 4;

struct ExitError {
  int code;
  std::string message;
};

struct Options {
  std::string config_path;
  std::string input;
  std::vector<std::string> dists;
  std::size_t n = 10000;
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  std::string rule = "lepski";
  double c = 2.1;
  double delta = 0.1;
  std::size_t k_min = 30;
  std::string out;
  std::string trace_csv;
  int workers = 0;
  bool paper_tables = false;
  bool profile = false;
  // verify
  std::string check = "all";
  std::vector<std::size_t> ks;
  std::vector<std::size_t> n_list;
  // lowerbound
  double gamma = 1.0;
  double rho = -1.5;
  double v = std::numbers::e / (1.0 + 2.0 * std::numbers::e);
  std::size_t mc_draws = 0;
};

// Values from a JSON config file fill every option not given on the command
// line.
void apply_config_file(const Options& cli, Options& opt, const CLI::App& app) {
  if (cli.config_path.empty()) return;
  std::ifstream in(cli.config_path);
  if (!in) throw ExitError{kExitConfig, "cannot open config file " + cli.config_path};
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw ExitError{kExitConfig, std::string("malformed config file: ") + e.what()};
  }
  if (!cfg.is_object()) throw ExitError{kExitConfig, "config file must hold a JSON object"};

  const std::map<std::string, std::function<void(const json&)>> setters = {
      {"in", [&](const json& j) { opt.input = j.get<std::string>(); }},
      {"dist",
       [&](const json& j) {
         opt.dists = j.is_array() ? j.get<std::vector<std::string>>()
                                  : std::vector<std::string>{j.get<std::string>()};
       }},
      {"n", [&](const json& j) { opt.n = j.get<std::size_t>(); }},
      {"reps", [&](const json& j) { opt.reps = j.get<std::size_t>(); }},
      {"seed", [&](const json& j) { opt.seed = j.get<std::uint64_t>(); }},
      {"rule", [&](const json& j) { opt.rule = j.get<std::string>(); }},
      {"c", [&](const json& j) { opt.c = j.get<double>(); }},
      {"delta", [&](const json& j) { opt.delta = j.get<double>(); }},
      {"k-min", [&](const json& j) { opt.k_min = j.get<std::size_t>(); }},
      {"out", [&](const json& j) { opt.out = j.get<std::string>(); }},
      {"trace-csv", [&](const json& j) { opt.trace_csv = j.get<std::string>(); }},
      {"workers", [&](const json& j) { opt.workers = j.get<int>(); }},
      {"paper-tables", [&](const json& j) { opt.paper_tables = j.get<bool>(); }},
      {"profile", [&](const json& j) { opt.profile = j.get<bool>(); }},
      {"check", [&](const json& j) { opt.check = j.get<std::string>(); }},
      {"k", [&](const json& j) { opt.ks = j.get<std::vector<std::size_t>>(); }},
      {"n-list", [&](const json& j) { opt.n_list = j.get<std::vector<std::size_t>>(); }},
      {"gamma", [&](const json& j) { opt.gamma = j.get<double>(); }},
      {"rho", [&](const json& j) { opt.rho = j.get<double>(); }},
      {"v", [&](const json& j) { opt.v = j.get<double>(); }},
      {"mc-draws", [&](const json& j) { opt.mc_draws = j.get<std::size_t>(); }},
  };
  const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
  for (const auto& [key, value] : cfg.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ExitError{kExitConfig, "unknown config key '" + key + "'"};
    bool on_command_line = false;
    for (const CLI::App* a : {&app, sub}) {
      try {
        if (a->get_option("--" + key)->count() > 0) on_command_line = true;
      } catch (const CLI::OptionNotFound&) {
      }
    }
    if (on_command_line) continue;
    try {
      it->second(value);
    } catch (const json::exception& e) {
      throw ExitError{kExitConfig, "bad value for '" + key + "': " + e.what()};
    }
  }
}

SelectionConfig selection_config(const Options& opt) {
  SelectionConfig cfg;
  try {
    cfg.rule = rule_from_string(opt.rule);
  } catch (const Error& e) {
    throw ExitError{kExitConfig, e.what()};
  }
  cfg.c = opt.c;
  cfg.delta = opt.delta;
  cfg.k_min = opt.k_min;
  return cfg;
}

json selection_config_json(const SelectionConfig& cfg) {
  return {{"rule", to_string(cfg.rule)}, {"c", cfg.c},   {"k_min", cfg.k_min},
          {"delta", cfg.delta},           {"c1", cfg.c1}, {"c1_prime", cfg.c1_prime},
          {"c2", cfg.c2},                 {"c3", cfg.c3}, {"zeta", cfg.zeta},
          {"rho_hat_abs", cfg.rho_hat_abs}};
}

std::vector<DistributionSpec> resolve_distributions(const Options& opt) {
  if (opt.paper_tables) return benchmark_suite();
  std::vector<DistributionSpec> specs;
  for (const auto& item : opt.dists) {
    std::stringstream ss(item);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (name.empty()) continue;
      auto spec = find_distribution(name);
      if (!spec) throw ExitError{kExitConfig, "unknown distribution '" + name + "'"};
      specs.push_back(*spec);
    }
  }
  if (specs.empty()) throw ExitError{kExitConfig, "no distribution given (use --dist or --paper-tables)"};
  return specs;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExitError{kExitConfig, "cannot write " + path};
  out << text;
}

json envelope(const json& config, std::optional<std::uint64_t> seed) {
  return {{"version", kVersion},
          {"config", config},
          {"seed", seed ? json(*seed) : json(nullptr)}};
}

std::vector<double> read_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ExitError{kExitParse, "cannot open input file " + path};
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const char* begin = line.data() + first;
    const char* end = line.data() + last + 1;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
      throw ExitError{kExitParse, path + ":" + std::to_string(line_no) + ": cannot parse '" +
                                      std::string(begin, end) + "' as a finite real"};
    }
    values.push_back(v);
  }
  return values;
}

int run_estimate(const Options& opt) {
  if (opt.input.empty()) throw ExitError{kExitConfig, "estimate needs --in"};
  const SelectionConfig cfg = selection_config(opt);
  const std::vector<double> values = read_values(opt.input);
  const SortedSample data = make_sorted_sample(values);
  if (data.size() < 55) {
    throw ExitError{kExitData, "sample-too-small: need at least 55 values, got " +
                                   std::to_string(data.size())};
  }
  if (data.positive_count() < 31) {
    throw ExitError{kExitData, "sample-too-small: need at least 31 positive values, got " +
                                   std::to_string(data.positive_count())};
  }
  const HillTrace trace = hill_trace(data);
  if (cfg.rule == Rule::LepskiTheoretical) {
    const auto constants = theoretical_constants(data.size(), cfg);
    const std::size_t typical = lepski_practical(trace, cfg.c, cfg.k_min).k_hat;
    if (constants.ell_n >= typical) {
      std::cerr << "warning: l_n = " << constants.ell_n << " is not below the practical rule's index "
                << typical << "; the theoretical rule only considers k >= l_n (lower c2 to change this)\n";
    }
  }
  const SelectionResult result = select(trace, cfg);
  json config = selection_config_json(cfg);
  config["input"] = opt.input;
  json doc = envelope(config, std::nullopt);
  doc["n"] = data.size();
  doc["n_positive"] = data.positive_count();
  doc["result"] = result;
  write_text(opt.out, doc.dump(2) + "\n");
  if (!opt.trace_csv.empty()) {
    std::ostringstream csv;
    csv << "# " << envelope(config, std::nullopt).dump() << '\n';
    write_trace_csv(csv, trace);
    write_text(opt.trace_csv, csv.str());
  }
  return 0;
}

CompareConfig compare_config(const Options& opt) {
  CompareConfig cfg;
  cfg.c = opt.c;
  cfg.k_min = opt.k_min;
  return cfg;
}

void require_sizes(const Options& opt) {
  if (opt.n < 55) throw ExitError{kExitConfig, "--n must be at least 55"};
  if (opt.reps < 2) throw ExitError{kExitConfig, "--reps must be at least 2"};
}

int run_profile(const Options& opt) {
  require_sizes(opt);
  const auto specs = resolve_distributions(opt);
  if (specs.size() != 1) throw ExitError{kExitConfig, "profile takes exactly one distribution"};
  const auto& spec = specs.front();
  const RmseProfile profile =
      rmse_profile(spec, opt.n, opt.reps, row_seed(opt.seed, spec.name), full_grid(opt.n), opt.workers);
  json meta = report_metadata(opt.n, opt.reps, opt.seed, compare_config(opt));
  meta["distribution"] = spec;
  const OracleIndex oracle = oracle_index(profile);
  meta["k_star"] = oracle.k_star;
  meta["rmse_star"] = oracle.rmse_star;
  std::ostringstream csv;
  write_profile_csv(csv, profile, meta);
  write_text(opt.out, csv.str());
  return 0;
}

int run_compare(const Options& opt) {
  require_sizes(opt);
  const auto specs = resolve_distributions(opt);
  const ExperimentReport report =
      run_campaign(specs, opt.n, opt.reps, opt.seed, compare_config(opt), opt.workers);
  std::ostringstream csv;
  write_report_csv(csv, report);
  if (opt.out.empty() || opt.out == "-") {
    std::cout << csv.str();
  } else {
    write_text(opt.out + ".csv", csv.str());
    write_text(opt.out + ".json", report_to_json(report).dump(2) + "\n");
  }
  if (opt.profile) {
    for (const auto& row : report.rows) {
      json meta = report.metadata;
      meta["distribution"] = row.profile.spec;
      meta["k_star"] = row.k_star;
      meta["rmse_star"] = row.rmse_star;
      std::ostringstream pcsv;
      write_profile_csv(pcsv, row.profile, meta);
      const std::string base = opt.out.empty() || opt.out == "-" ? std::string("compare") : opt.out;
      write_text(base + "." + row.name + ".profile.csv", pcsv.str());
    }
  }
  return 0;
}

DistributionSpec single_distribution(const Options& opt, const std::string& fallback) {
  Options copy = opt;
  if (copy.dists.empty()) copy.dists = {fallback};
  const auto specs = resolve_distributions(copy);
  if (specs.size() != 1) throw ExitError{kExitConfig, "this check takes exactly one distribution"};
  return specs.front();
}

int run_verify(const Options& opt) {
  json reports = json::array();
  const std::string& check = opt.check;
  const bool all = check == "all";
  bool known = all;
  auto ks_or = [&](std::vector<std::size_t> fallback) { return opt.ks.empty() ? fallback : opt.ks; };

  if (all || check == "variance") {
    known = true;
    const auto spec = single_distribution(opt, "Pcp");
    const auto ks = ks_or({50, 100, 500});
    for (const auto& r : check_variance_bounds(spec, ks, opt.n, opt.reps, opt.seed)) reports.push_back(r);
  }
  if (all || check == "bias") {
    known = true;
    const auto spec = single_distribution(opt, "Pcp");
    for (std::size_t k : ks_or({100})) reports.push_back(check_bias_identity(spec, k, opt.n, opt.reps, opt.seed));
  }
  if (all || check == "gamma-tail") {
    known = true;
    for (std::size_t k : ks_or({10, 100})) reports.push_back(check_gamma_tail(k, opt.reps, opt.delta, opt.seed));
  }
  if (all || check == "order-stat") {
    known = true;
    for (std::size_t k : ks_or({100})) {
      reports.push_back(check_order_stat_tail(opt.n, k, opt.delta, opt.reps, opt.seed));
    }
  }
  if (all || check == "maxdev") {
    known = true;
    const auto n_list = opt.n_list.empty() ? std::vector<std::size_t>{1000, 10000} : opt.n_list;
    reports.push_back(check_maxdev_scaling(n_list, opt.reps, opt.seed));
  }
  if (!known) throw ExitError{kExitConfig, "unknown check '" + check + "'"};

  json config = {{"check", check}, {"n", opt.n}, {"reps", opt.reps}, {"delta", opt.delta}};
  if (!opt.dists.empty()) config["dist"] = opt.dists;
  if (!opt.ks.empty()) config["k"] = opt.ks;
  json doc = envelope(config, opt.seed);
  doc["reports"] = reports;
  write_text(opt.out, doc.dump(2) + "\n");
  return 0;
}

int run_lowerbound(const Options& opt) {
  const LowerBoundFamily family = lower_bound_family(opt.gamma, opt.rho, opt.n, opt.v);
  json doc = envelope({{"gamma", opt.gamma}, {"rho", opt.rho}, {"n", opt.n}, {"v", opt.v},
                       {"mc_draws", opt.mc_draws}},
                      opt.mc_draws > 0 ? std::optional<std::uint64_t>(opt.seed) : std::nullopt);
  doc["family"] = family;
  bool eta_ok = true;
  for (std::size_t i = 1; i <= family.M; ++i) {
    const double t_break = std::pow(family.alternatives[i - 1].tau_i, 1.0 / family.gamma0);
    for (double t : {1.5, t_break}) eta_ok = eta_ok && eta_bound_holds(family, i, t);
  }
  doc["eta_bound_holds"] = eta_ok;
  if (opt.mc_draws > 0) {
    json mc = json::array();
    for (std::size_t i = 1; i <= family.M; ++i) {
      const auto& a = family.alternatives[i - 1];
      const auto est = kl_changepoint_mc(family.gamma0, a.gamma_i, a.tau_i, opt.mc_draws,
                                         stream_seed(opt.seed, i));
      mc.push_back(json{{"i", i}, {"kl", a.kl_i}, {"mc_mean", est.mean}, {"mc_stderr", est.stderr_}});
    }
    doc["kl_monte_carlo"] = mc;
  }
  write_text(opt.out, doc.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive Hill estimation: estimate, simulate, verify"};
  app.require_subcommand(1);
  Options cli;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", cli.config_path, "JSON config file; command-line flags take precedence");
    sub->add_option("--out", cli.out, "Output path ('-' or empty for stdout)");
    sub->add_option("--seed", cli.seed, "Master seed");
    sub->add_option("--workers", cli.workers, "Worker threads (0: OpenMP default)");
  };
  auto add_sizes = [&](CLI::App* sub) {
    sub->add_option("--n", cli.n, "Sample size");
    sub->add_option("--reps", cli.reps, "Monte-Carlo replicates");
  };
  auto add_rule = [&](CLI::App* sub) {
    sub->add_option("--rule", cli.rule, "lepski | lepski-theoretical | dk");
    sub->add_option("--c", cli.c, "Practical threshold constant, r_n = sqrt(c ln ln n)");
    sub->add_option("--delta", cli.delta, "Confidence parameter");
    sub->add_option("--k-min", cli.k_min, "Smallest candidate index");
  };

  auto* estimate = app.add_subcommand("estimate", "Select k and estimate gamma from a data file");
  add_common(estimate);
  add_rule(estimate);
  estimate->add_option("--in", cli.input, "Newline-delimited reals");
  estimate->add_option("--trace-csv", cli.trace_csv, "Also write the (k, gamma_hat) trace");

  auto* profile = app.add_subcommand("profile", "Standardised RMSE profile of one distribution");
  add_common(profile);
  add_sizes(profile);
  profile->add_option("--dist", cli.dists, "Distribution row name");
  profile->add_flag("--paper-tables", cli.paper_tables, "Use the benchmark suite");
  profile->add_option("--c", cli.c, "Recorded in metadata");
  profile->add_option("--k-min", cli.k_min, "Recorded in metadata");

  auto* compare = app.add_subcommand("compare", "Compare Lepski and Drees-Kaufmann selection");
  add_common(compare);
  add_sizes(compare);
  compare->add_option("--dist", cli.dists, "Distribution row names (comma separated)");
  compare->add_flag("--paper-tables", cli.paper_tables, "Run the twelve-distribution benchmark suite");
  compare->add_flag("--profile", cli.profile, "Also write each RMSE profile");
  compare->add_option("--c", cli.c, "Practical threshold constant");
  compare->add_option("--k-min", cli.k_min, "Smallest candidate index");
  compare->add_option("--rule", cli.rule, "Ignored: compare always runs both rules");

  auto* verify = app.add_subcommand("verify", "Empirical checks of the estimator's properties");
  add_common(verify);
  add_sizes(verify);
  verify->add_option("--check", cli.check, "variance | bias | gamma-tail | order-stat | maxdev | all");
  verify->add_option("--dist", cli.dists, "Distribution for variance/bias checks");
  verify->add_option("--k", cli.ks, "Indices to check");
  verify->add_option("--delta", cli.delta, "Confidence parameter");
  verify->add_option("--n-list", cli.n_list, "Sample sizes for maxdev");

  auto* lower = app.add_subcommand("lowerbound", "Build the change-point lower-bound family");
  add_common(lower);
  lower->add_option("--gamma", cli.gamma, "Index of the pure Pareto centre");
  lower->add_option("--rho", cli.rho, "Second-order parameter (< -1)");
  lower->add_option("--n", cli.n, "Sample size");
  lower->add_option("--v", cli.v, "KL budget factor in (0, e/(1+2e)]");
  lower->add_option("--mc-draws", cli.mc_draws, "Monte-Carlo draws per KL cross-check (0: skip)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    Options opt = cli;
    apply_config_file(cli, opt, app);
    if (estimate->parsed()) return run_estimate(opt);
    if (profile->parsed()) return run_profile(opt);
    if (compare->parsed()) return run_compare(opt);
    if (verify->parsed()) return run_verify(opt);
    if (lower->parsed()) return run_lowerbound(opt);
  } catch (const ExitError& e) {
    std::cerr << "error: " << e.message << '\n';
    return e.code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::sample_too_small:
      case ErrorCode::insufficient_positive_data:
        return kExitData;
      default:
        return kExitConfig;
    }
  }
  return kExitConfig;
}
