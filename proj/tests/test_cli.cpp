#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "hilltail/distributions.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hilltail_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliResult run(const std::string& args) {
    const auto out = dir_ / "stdout.txt";
    const auto err = dir_ / "stderr.txt";
    const std::string cmd = std::string(HILLTAIL_CLI) + " " + args + " > " + out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    return {WEXITSTATUS(status), slurp(out), slurp(err)};
  }

  fs::path write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

  fs::path write_sample(const std::string& name, std::size_t n, std::uint64_t seed) {
    const auto s = hilltail::sample(hilltail::frechet(0.5), n, seed);
    std::ostringstream text;
    text.precision(17);
    for (double v : s.values) text << v << '\n';
    return write(name, text.str());
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, EstimateWritesResult) {
  const auto in = write_sample("x.txt", 2000, 1);
  const auto r = run("estimate --in " + in.string() + " --trace-csv " + (dir_ / "trace.csv").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["version"], "0.1.0");
  EXPECT_TRUE(j.contains("config") && j.contains("seed"));
  EXPECT_EQ(j["result"]["rule"], "LepskiPractical");
  EXPECT_GE(j["result"]["k_hat"].template get<int>(), 30);
  EXPECT_EQ(j["n"], 2000);
  const auto trace = slurp(dir_ / "trace.csv");
  EXPECT_NE(trace.find("\nk,gamma_hat\n1,"), std::string::npos);
}

TEST_F(Cli, EstimateRules) {
  const auto in = write_sample("x.txt", 5000, 2);
  for (const char* rule : {"lepski", "dk", "lepski-theoretical"}) {
    const auto r = run(std::string("estimate --rule ") + rule + " --in " + in.string());
    EXPECT_EQ(r.code, 0) << rule << r.err;
  }
  EXPECT_EQ(run("estimate --rule lepski-theoretical --in " + in.string()).err.find("warning"), std::string::npos);
  // l_n = ceil(100 ln 1000) = 691 sits above the index the practical rule picks
  const auto small = write_sample("y.txt", 1000, 3);
  const auto r = run("estimate --rule lepski-theoretical --in " + small.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST_F(Cli, ParseErrorCitesLine) {
  const auto in = write("bad.txt", "1.5\n2.5\nabc\n4\n");
  const auto r = run("estimate --in " + in.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(":3:"), std::string::npos) << r.err;
  EXPECT_EQ(run("estimate --in " + write("nan.txt", "1\nnan\n").string()).code, 2);
}

TEST_F(Cli, DataErrors) {
  std::string small;
  for (int i = 1; i <= 54; ++i) small += std::to_string(i) + "\n";
  EXPECT_EQ(run("estimate --in " + write("small.txt", small).string()).code, 3);
  std::string few_positive;
  for (int i = 1; i <= 100; ++i) few_positive += std::to_string(i <= 30 ? i : -i) + "\n";
  const auto r = run("estimate --in " + write("neg.txt", few_positive).string());
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("sample-too-small"), std::string::npos);
}

TEST_F(Cli, ConfigErrors) {
  EXPECT_EQ(run("compare --dist nope --n 500 --reps 10").code, 4);
  EXPECT_EQ(run("compare --n 500 --reps 10").code, 4);
  EXPECT_EQ(run("compare --dist , --n 500 --reps 10").code, 4);
  EXPECT_EQ(run("estimate --bogus").code, 4);
  EXPECT_EQ(run("").code, 4);
  EXPECT_EQ(run("estimate --rule nope --in x").code, 4);
  EXPECT_EQ(run("compare --config " + write("c.json", "{\"unknown\": 1}").string()).code, 4);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, ConfigFilePrecedence) {
  const auto cfg = write("c.json", R"({"dist": "H", "n": 600, "reps": 20, "seed": 5})");
  const auto a = run("compare --config " + cfg.string());
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("\"n\":600"), std::string::npos);
  EXPECT_NE(a.out.find("\nH,"), std::string::npos);
  const auto b = run("compare --config " + cfg.string() + " --n 700 --dist t4");
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_NE(b.out.find("\"n\":700"), std::string::npos);
  EXPECT_NE(b.out.find("\nt4,"), std::string::npos);
  EXPECT_NE(b.out.find("\"master_seed\":5"), std::string::npos);
}

TEST_F(Cli, CompareWritesCsvAndJson) {
  const auto prefix = (dir_ / "report").string();
  const auto r = run("compare --dist F1,Pcp --n 600 --reps 12 --seed 3 --profile --out " + prefix);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(prefix + ".csv");
  EXPECT_NE(csv.find("\nF1,"), std::string::npos);
  EXPECT_NE(csv.find("\nPcp,"), std::string::npos);
  const auto j = nlohmann::json::parse(slurp(prefix + ".json"));
  EXPECT_EQ(j["metadata"]["master_seed"], 3);
  EXPECT_TRUE(fs::exists(prefix + ".F1.profile.csv"));
}

TEST_F(Cli, PaperTablesDeterministicAcrossWorkers) {
  std::string first;
  for (int w : {1, 4, 8}) {
    const auto r = run("compare --paper-tables --n 400 --reps 8 --seed 2 --workers " + std::to_string(w));
    ASSERT_EQ(r.code, 0) << r.err;
    if (first.empty()) first = r.out;
    EXPECT_EQ(r.out, first) << w;
  }
}

TEST_F(Cli, ProfileVerifyLowerbound) {
  const auto p = run("profile --dist t4 --n 500 --reps 10");
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_NE(p.out.find("\nk,rmse,stderr\n"), std::string::npos);

  const auto v = run("verify --check gamma-tail --k 10 --reps 500 --seed 4");
  ASSERT_EQ(v.code, 0) << v.err;
  const auto vj = nlohmann::json::parse(v.out);
  EXPECT_EQ(vj["seed"], 4);
  EXPECT_EQ(vj["reports"][0]["check"], "gamma_tail");
  EXPECT_EQ(run("verify --check nope").code, 4);

  const auto l = run("lowerbound --n 1000000 --rho -1.5 --mc-draws 1000");
  ASSERT_EQ(l.code, 0) << l.err;
  const auto lj = nlohmann::json::parse(l.out);
  EXPECT_EQ(lj["family"]["M"], 13);
  EXPECT_EQ(lj["kl_monte_carlo"].size(), 13u);
  const auto bad = run("lowerbound --rho -0.5");
  EXPECT_EQ(bad.code, 4);
  EXPECT_NE(bad.err.find("rho < -1"), std::string::npos);
}
