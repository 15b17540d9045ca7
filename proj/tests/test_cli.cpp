#include <gtest/gtest.h>

#include <clocale>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <locale>
#include <sstream>
#include <string>
#include <vector>

#include "gkd/cli.hpp"
#include "json.hpp"

using namespace gkd;
using json = nlohmann::ordered_json;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "gkd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("gkd_test_" + name);
}

}  // namespace

TEST(Analyze, ReferencePoint) {
  const CliRun r = run({"analyze", "--lambda", "1.5", "--cx", "1", "--cp", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_TRUE(j["nppt"].get<bool>());
  EXPECT_TRUE(j["individual_secure"].get<bool>());
  EXPECT_TRUE(j["physical"].get<bool>());
  EXPECT_GT(j["rate_lb"].get<double>(), 0.0);
  EXPECT_NEAR(j["lambda"].get<double>(), 1.5, 0.0);
}

TEST(Analyze, SchemaIsExactlyTheDocumentedKeys) {
  const json j = json::parse(run({"analyze"}).out);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  const std::vector<std::string> expected{"lambda",    "c_x",         "c_p",
                                          "physical",  "nppt",        "eps_ab_at_best_x0",
                                          "eve_overlap", "individual_secure", "coherent_ad_secure",
                                          "rate_lb",   "best_x0"};
  EXPECT_EQ(keys, expected);
}

TEST(Analyze, UnphysicalInputIsDomainError) {
  const CliRun r = run({"analyze", "--lambda", "1.5", "--cx", "1.3", "--cp", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("unphysical parameters"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
}

TEST(Analyze, Vacuum) {
  const CliRun r = run({"analyze", "--lambda", "1", "--cx", "0", "--cp", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_FALSE(j["nppt"].get<bool>());
  EXPECT_LE(j["rate_lb"].get<double>(), 0.0);
}

TEST(Analyze, CsvOutput) {
  const CliRun r = run({"analyze", "--format", "csv"});
  ASSERT_EQ(r.code, 0);
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].size(), 11u);
  EXPECT_EQ(rows[1].size(), 11u);
  EXPECT_EQ(rows[0][0], "lambda");
  EXPECT_EQ(rows[1][0], "1.5");
}

TEST(ParseErrors, ExitOne) {
  EXPECT_EQ(run({"analyze", "--lambda", "abc"}).code, 1);
  EXPECT_EQ(run({"analyze", "--bogus", "1"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frontier", "--attack", "sneaky"}).code, 1);
  EXPECT_EQ(run({"simulate", "--format", "xml"}).code, 1);
  const CliRun r = run({"analyze", "--lambda", "abc"});
  EXPECT_FALSE(r.err.empty());
}

TEST(ParseErrors, HelpIsSuccess) { EXPECT_EQ(run({"--help"}).code, 0); }

TEST(Frontier, IndividualMatchesDashedCurve) {
  const CliRun r = run({"frontier", "--attack", "individual", "--steps", "5", "--c-min", "0.1", "--c-max", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"c", "lambda_star", "solid", "dashed"}));
  for (std::size_t i = 1; i < rows.size(); ++i)
    EXPECT_NEAR(std::stod(rows[i][1]), std::stod(rows[i][3]), 1e-5) << "row " << i;
}

TEST(Frontier, GeneralLiesBetweenReferenceCurves) {
  const CliRun r = run({"frontier", "--attack", "general", "--steps", "4", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json arr = json::parse(r.out);
  ASSERT_EQ(arr.size(), 4u);
  for (const auto& row : arr) {
    EXPECT_LT(row["solid"].get<double>(), row["lambda_star"].get<double>());
    EXPECT_LT(row["lambda_star"].get<double>(), row["dashed"].get<double>());
  }
}

TEST(Frontier, MinimalRun) {
  const CliRun r = run({"frontier", "--steps", "2", "--attack", "individual"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& row : rows) EXPECT_EQ(row.size(), 4u);
  EXPECT_EQ(rows[1][0], "0.1");
  EXPECT_EQ(rows[2][0], "3");
}

TEST(Frontier, BadGridIsDomainError) {
  EXPECT_EQ(run({"frontier", "--steps", "1"}).code, 2);
  EXPECT_EQ(run({"frontier", "--c-min", "2", "--c-max", "1"}).code, 2);
}

TEST(Simulate, ByteIdenticalForFixedSeed) {
  const std::vector<std::string> args{"simulate", "--pairs", "2000000", "--window", "0.05", "--block-n", "2",
                                      "--seed", "17"};
  const CliRun a = run(args);
  const CliRun b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  auto threaded = args;
  threaded.insert(threaded.end(), {"--workers", "3"});
  EXPECT_EQ(run(threaded).out, a.out);
  auto other = args;
  other.back() = "18";
  EXPECT_NE(run(other).out, a.out);
}

TEST(Simulate, ReferenceErrorRate) {
  const CliRun r = run({"simulate", "--pairs", "10000000", "--window", "0.01", "--block-n", "2", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["eps_theory"].get<double>(), 0.03917, 1e-5);
  const double se = j["stderr_estimates"]["eps_empirical"].get<double>();
  EXPECT_GT(se, 0.0);
  EXPECT_LT(std::abs(j["eps_empirical"].get<double>() - 0.03917), 3.0 * se);
  EXPECT_EQ(j["block_n"].get<int>(), 2);
  EXPECT_NEAR(j["eps_n_theory"].get<double>(), 0.001659, 1e-6);
}

TEST(Simulate, SingleBitBlocksEchoSiftedError) {
  const CliRun r = run({"simulate", "--pairs", "1000000", "--window", "0.05", "--block-n", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["eps_n_empirical"], j["eps_empirical"]);
  EXPECT_EQ(j["eps_n_theory"], j["eps_theory"]);
  EXPECT_EQ(j["stderr_estimates"]["eps_n_empirical"], j["stderr_estimates"]["eps_empirical"]);
  EXPECT_EQ(j["blocks"], j["accepted"]);
}

TEST(Simulate, WideWindowWarnsButRuns) {
  const CliRun r = run({"simulate", "--pairs", "10000", "--window", "0.3"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST(Simulate, DomainErrors) {
  EXPECT_EQ(run({"simulate", "--lambda", "1.5", "--cx", "1.3"}).code, 2);
  EXPECT_EQ(run({"simulate", "--window", "0"}).code, 2);
  EXPECT_EQ(run({"simulate", "--pairs", "10", "--block-n", "5"}).code, 2);
}

TEST(Config, FileValuesAndFlagPrecedence) {
  const auto path = temp_file("config.ini");
  {
    std::ofstream f(path);
    f << "lambda=2\ncx=1.2\ncp=0.5\nx0-max=4\n";
  }
  const json from_file = json::parse(run({"analyze", "--config", path.string()}).out);
  EXPECT_EQ(from_file["lambda"].get<double>(), 2.0);
  EXPECT_EQ(from_file["c_x"].get<double>(), 1.2);
  const json overridden = json::parse(run({"analyze", "--config", path.string(), "--lambda", "2.5"}).out);
  EXPECT_EQ(overridden["lambda"].get<double>(), 2.5);
  EXPECT_EQ(overridden["c_p"].get<double>(), 0.5);
  std::filesystem::remove(path);
}

TEST(Config, UnknownKeyRejected) {
  const auto path = temp_file("bad.ini");
  {
    std::ofstream f(path);
    f << "lambda=2\ncolour=blue\n";
  }
  EXPECT_EQ(run({"analyze", "--config", path.string()}).code, 1);
  std::filesystem::remove(path);
}

TEST(Output, WritesFile) {
  const auto path = temp_file("out.json");
  const CliRun r = run({"analyze", "--out", path.string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(ss.str(), run({"analyze"}).out);
  std::filesystem::remove(path);
}

TEST(Output, DecimalPointIgnoresLocale) {
  const std::string before = run({"frontier", "--steps", "2", "--attack", "individual"}).out;
  if (std::setlocale(LC_ALL, "de_DE.UTF-8") == nullptr) GTEST_SKIP() << "de_DE locale not installed";
  const std::string after = run({"frontier", "--steps", "2", "--attack", "individual"}).out;
  std::setlocale(LC_ALL, "C");
  EXPECT_EQ(before, after);
}

TEST(Output, DecimalPointIgnoresStreamLocale) {
  struct Comma : std::numpunct<char> {
    char do_decimal_point() const override { return ','; }
  };
  const std::string before = run({"simulate", "--pairs", "100000", "--window", "0.1"}).out;
  const std::locale previous = std::locale::global(std::locale(std::locale::classic(), new Comma));
  const std::string after = run({"simulate", "--pairs", "100000", "--window", "0.1"}).out;
  std::locale::global(previous);
  EXPECT_EQ(before, after);
  EXPECT_NE(before.find('.'), std::string::npos);
}

TEST(Output, TwelveSignificantDigits) {
  EXPECT_EQ(cli::format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(cli::format_number(2.0), "2");
  EXPECT_EQ(cli::format_number(-3.2e-16), "-3.2e-16");
}

TEST(OracleCheck, QuickIsFastAndPasses) {
  const auto start = std::chrono::steady_clock::now();
  const CliRun r = run({"oracle-check", "--level", "quick"});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_LT(secs, 10.0);
  const json j = json::parse(r.out);
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_FALSE(j["checks"].empty());
}

TEST(OracleCheck, TamperedPhaseFailsWithNumericalExit) {
  cli::RunConfig cfg;
  cfg.command = "oracle-check";
  cfg.level = "full";
  const auto res = cli::cmd_oracle_check(cfg, [](const RealMatrix& cm, const std::vector<double>& a,
                                                 const std::vector<double>& b) {
    return std::conj(pure_overlap(cm, a, b));
  });
  EXPECT_EQ(res.exit_code, 3);
  ASSERT_FALSE(res.diagnostics.empty());
  EXPECT_NE(res.diagnostics.front().find("expected"), std::string::npos);
  EXPECT_NE(res.diagnostics.front().find("tolerance"), std::string::npos);
}

TEST(Executable, ExitCodesFromProcess) {
  const std::string exe = GKD_CLI_PATH;
  auto status = [&](const std::string& args) {
    const int s = std::system((exe + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(s);
  };
  EXPECT_EQ(status("analyze --lambda 1.5 --cx 1 --cp 1"), 0);
  EXPECT_EQ(status("analyze --lambda 1.5 --cx 1.3 --cp 1"), 2);
  EXPECT_EQ(status("analyze --lambda nope"), 1);
}
