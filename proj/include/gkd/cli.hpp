#pragma once

// Command-line front end: analyze, frontier, simulate and oracle-check.
// Options may also come from a key=value config file; flags on the command
// line take precedence over the file, which takes precedence over defaults.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gkd/errors.hpp"
#include "gkd/gaussian.hpp"
#include "gkd/oracle_check.hpp"
#include "gkd/protocol.hpp"
#include "gkd/security.hpp"

namespace gkd::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDomain = 2, kNumerical = 3 };

struct RunConfig {
  std::string command;
  SymmetricStateParams params{1.5, 1.0, 1.0};
  double x0 = 1.0;
  double x0_max = 5.0;
  std::string attack = "general";
  std::size_t n_e = 1;
  double window = 0.01;
  std::uint64_t pairs = 1'000'000;
  std::size_t block_n = 1;
  std::uint64_t seed = 0;
  std::size_t steps = 30;
  double c_min = 0.1;
  double c_max = 3.0;
  std::string out;
  std::string format;  // empty: command default
  unsigned workers = 1;
  std::string level = "quick";

  std::string output_format() const {
    if (!format.empty()) return format;
    return command == "frontier" ? "csv" : "json";
  }
};

struct CommandResult {
  int exit_code = kOk;
  std::string output;
  std::vector<std::string> diagnostics;  // for stderr
};

/// Twelve significant digits, '.' decimal separator.
inline std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

namespace detail {

using Json = nlohmann::ordered_json;

inline Json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return std::stod(format_number(x));
}

inline std::string render_json(const Json& j) { return j.dump(2) + "\n"; }

/// Header line plus one line per row.
inline std::string render_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string s;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
    s += "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return s;
}

inline std::string cell(double x) { return format_number(x); }
inline std::string cell(bool b) { return b ? "true" : "false"; }
inline std::string cell(std::uint64_t n) { return std::to_string(n); }

/// Renders one flat record as a JSON object or a two-line CSV.
struct Record {
  std::vector<std::string> keys;
  Json json = Json::object();
  std::vector<std::string> cells;

  template <class T>
  void add(const std::string& key, T value) {
    keys.push_back(key);
    if constexpr (std::is_same_v<T, double>) {
      json[key] = number(value);
    } else {
      json[key] = value;
    }
    cells.push_back(cell(value));
  }
  std::string render(const std::string& format) const {
    return format == "csv" ? render_csv(keys, {cells}) : render_json(json);
  }
};

}  // namespace detail

inline CommandResult cmd_analyze(const RunConfig& cfg) {
  const SecurityReport r = analyze(cfg.params, cfg.x0_max, cfg.n_e);
  detail::Record rec;
  rec.add("lambda", r.params.lambda);
  rec.add("c_x", r.params.c_x);
  rec.add("c_p", r.params.c_p);
  rec.add("physical", r.physical);
  rec.add("nppt", r.nppt);
  rec.add("eps_ab_at_best_x0", r.eps_ab);
  rec.add("eve_overlap", r.eve_overlap);
  rec.add("individual_secure", r.individual_secure);
  rec.add("coherent_ad_secure", r.coherent_ad_secure);
  rec.add("rate_lb", r.rate_lb);
  rec.add("best_x0", r.best_x0);
  return {kOk, rec.render(cfg.output_format()), {}};
}

inline std::vector<double> linspace(double lo, double hi, std::size_t steps) {
  std::vector<double> g(steps);
  for (std::size_t i = 0; i < steps; ++i) g[i] = lo + (hi - lo) * double(i) / double(steps - 1);
  return g;
}

inline CommandResult cmd_frontier(const RunConfig& cfg) {
  if (!(cfg.c_min < cfg.c_max)) throw InvalidInput("frontier needs c_min < c_max");
  if (cfg.steps < 2) throw InvalidInput("frontier needs steps >= 2");
  const AttackModel attack = AttackModel::parse(cfg.attack, cfg.n_e);
  const auto points = security_frontier(linspace(cfg.c_min, cfg.c_max, cfg.steps), attack, cfg.x0_max);

  const std::vector<std::string> header{"c", "lambda_star", "solid", "dashed"};
  std::vector<std::vector<std::string>> rows;
  detail::Json arr = detail::Json::array();
  for (const auto& pt : points) {
    const double solid = std::sqrt(1.0 + pt.c * pt.c);
    const double dashed = pt.c + 1.0;
    rows.push_back({format_number(pt.c), format_number(pt.lambda_star), format_number(solid), format_number(dashed)});
    detail::Json row = detail::Json::object();
    row["c"] = detail::number(pt.c);
    row["lambda_star"] = detail::number(pt.lambda_star);
    row["solid"] = detail::number(solid);
    row["dashed"] = detail::number(dashed);
    arr.push_back(row);
  }
  if (cfg.output_format() == "csv") return {kOk, detail::render_csv(header, rows), {}};
  return {kOk, detail::render_json(arr), {}};
}

/// Stream of the seed reserved for advantage distillation, far above the
/// chunk streams used by sifting.
inline constexpr std::uint64_t kDistillationStream = std::uint64_t{1} << 23;

inline CommandResult cmd_simulate(const RunConfig& cfg) {
  ProtocolConfig pc;
  pc.x0 = cfg.x0;
  pc.window = cfg.window;
  pc.n_pairs = cfg.pairs;
  pc.block_n = cfg.block_n;
  pc.seed = cfg.seed;
  CommandResult res;
  for (auto& w : pc.validate()) res.diagnostics.push_back("warning: " + w);

  const SiftedBits bits = simulate_sifting(cfg.params, pc, Rng(cfg.seed), cfg.workers);
  if (bits.size() < pc.block_n) throw InvalidInput("too few accepted pairs for one distillation block");
  Rng ad_rng(cfg.seed, kDistillationStream);
  const DistillationOutcome ad = simulate_advantage_distillation(bits, pc.block_n, ad_rng);

  const double eps = error_probability(cfg.params, cfg.x0);
  const double eps_emp = bits.error_rate();
  const double n_acc = double(bits.size());

  detail::Json j = detail::Json::object();
  j["accepted"] = bits.size();
  j["acceptance_rate"] = detail::number(bits.acceptance_rate);
  j["eps_empirical"] = detail::number(eps_emp);
  j["eps_theory"] = detail::number(eps);
  j["block_n"] = pc.block_n;
  j["blocks"] = ad.blocks_consumed;
  j["blocks_kept"] = ad.kept_bits_alice.size();
  j["eps_n_empirical"] = detail::number(ad.empirical_error);
  j["eps_n_theory"] = detail::number(ad_error(eps, pc.block_n));
  detail::Json se = detail::Json::object();
  se["eps_empirical"] = detail::number(std::sqrt(eps_emp * (1.0 - eps_emp) / n_acc));
  se["eps_n_empirical"] = detail::number(ad.standard_error);
  j["stderr_estimates"] = se;

  if (cfg.output_format() == "csv") {
    const std::vector<std::string> header{"accepted", "acceptance_rate", "eps_empirical", "eps_theory", "block_n",
                                          "blocks", "blocks_kept", "eps_n_empirical", "eps_n_theory",
                                          "stderr_eps_empirical", "stderr_eps_n_empirical"};
    res.output = detail::render_csv(
        header, {{std::to_string(bits.size()), format_number(bits.acceptance_rate), format_number(eps_emp),
                  format_number(eps), std::to_string(pc.block_n), std::to_string(ad.blocks_consumed),
                  std::to_string(ad.kept_bits_alice.size()), format_number(ad.empirical_error),
                  format_number(ad_error(eps, pc.block_n)), format_number(se["eps_empirical"].get<double>()),
                  format_number(ad.standard_error)}});
  } else {
    res.output = detail::render_json(j);
  }
  return res;
}

inline CommandResult cmd_oracle_check(const RunConfig& cfg, const OverlapFn& overlap = default_overlap()) {
  OracleLevel level;
  if (cfg.level == "quick") {
    level = OracleLevel::Quick;
  } else if (cfg.level == "full") {
    level = OracleLevel::Full;
  } else {
    throw InvalidInput("oracle-check level must be quick or full");
  }
  const auto results = run_oracle_checks(level, overlap);
  CommandResult res;
  bool all = true;
  detail::Json checks = detail::Json::array();
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : results) {
    all = all && r.pass;
    if (!r.pass)
      res.diagnostics.push_back("FAIL " + r.name + ": observed " + format_number(r.observed) + ", expected " +
                                format_number(r.expected) + ", tolerance " + format_number(r.tolerance));
    detail::Json c = detail::Json::object();
    c["name"] = r.name;
    c["observed"] = detail::number(r.observed);
    c["expected"] = detail::number(r.expected);
    c["tolerance"] = detail::number(r.tolerance);
    c["pass"] = r.pass;
    checks.push_back(c);
    rows.push_back({r.name, format_number(r.observed), format_number(r.expected), format_number(r.tolerance),
                    detail::cell(r.pass)});
  }
  if (cfg.output_format() == "csv") {
    res.output = detail::render_csv({"name", "observed", "expected", "tolerance", "pass"}, rows);
  } else {
    detail::Json j = detail::Json::object();
    j["level"] = cfg.level;
    j["passed"] = all;
    j["checks"] = checks;
    res.output = detail::render_json(j);
  }
  res.exit_code = all ? kOk : kNumerical;
  return res;
}

/// Dispatches on cfg.command and maps library exceptions to exit codes.
inline CommandResult run_command(const RunConfig& cfg) {
  try {
    if (cfg.command == "analyze") return cmd_analyze(cfg);
    if (cfg.command == "frontier") return cmd_frontier(cfg);
    if (cfg.command == "simulate") return cmd_simulate(cfg);
    if (cfg.command == "oracle-check") return cmd_oracle_check(cfg);
    return {kUsage, "", {"unknown command: " + cfg.command}};
  } catch (const InvalidInput& e) {
    return {kDomain, "", {e.what()}};
  } catch (const DegenerateParams& e) {
    return {kDomain, "", {e.what()}};
  } catch (const std::exception& e) {
    return {kNumerical, "", {std::string("numerical failure: ") + e.what()}};
  }
}

/// Parses argv, runs the command and writes to the given streams (or to
/// --out). Returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Secret-key distillation analysis for symmetric two-mode Gaussian states", "gkd"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);

  RunConfig cfg;
  app.add_option("--lambda", cfg.params.lambda, "local variance lambda");
  app.add_option("--cx", cfg.params.c_x, "X correlation c_x");
  app.add_option("--cp", cfg.params.c_p, "P anticorrelation c_p");
  app.add_option("--x0", cfg.x0, "postselection threshold");
  app.add_option("--x0-max", cfg.x0_max, "upper end of the x0 scan");
  app.add_option("--attack", cfg.attack, "attack model")
      ->check(CLI::IsMember({"individual", "finite-coherent", "coherent-ad", "general"}));
  app.add_option("--ne", cfg.n_e, "symbols Eve measures jointly (finite-coherent)")->check(CLI::PositiveNumber);
  app.add_option("--window", cfg.window, "postselection half-width");
  app.add_option("--pairs", cfg.pairs, "Monte-Carlo pairs")->check(CLI::PositiveNumber);
  app.add_option("--block-n", cfg.block_n, "advantage-distillation block size")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "RNG seed");
  app.add_option("--steps", cfg.steps, "frontier grid points");
  app.add_option("--c-min", cfg.c_min, "frontier lower c");
  app.add_option("--c-max", cfg.c_max, "frontier upper c");
  app.add_option("--out", cfg.out, "output file (default stdout)");
  app.add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--workers", cfg.workers, "Monte-Carlo threads")->check(CLI::PositiveNumber);
  app.add_option("--level", cfg.level, "oracle-check level")->check(CLI::IsMember({"quick", "full"}));

  for (const char* name : {"analyze", "frontier", "simulate", "oracle-check"}) {
    app.add_subcommand(name, "")->fallthrough()->callback([&cfg, name] { cfg.command = name; });
  }
  app.get_subcommand("analyze")->description("physicality, entanglement, security verdicts and the key-rate bound");
  app.get_subcommand("frontier")->description("security frontier lambda*(c) with reference curves");
  app.get_subcommand("simulate")->description("Monte-Carlo sifting and advantage distillation");
  app.get_subcommand("oracle-check")->description("agreement suite against the grid-wavefunction oracle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  const CommandResult res = run_command(cfg);
  for (const auto& d : res.diagnostics) err << d << "\n";
  if (!cfg.out.empty() && !res.output.empty()) {
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) {
      err << "cannot open output file " << cfg.out << "\n";
      return kUsage;
    }
    f << res.output;
  } else {
    out << res.output;
  }
  return res.exit_code;
}

}  // namespace gkd::cli
