// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "gkd/cli.hpp"
#include "gkd/gaussian.hpp"
#include "gkd/oracle.hpp"
#include "gkd/protocol.hpp"
#include "gkd/security.hpp"

using namespace gkd;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

SymmetricStateParams random_physical(Rng& rng) {
  for (;;) {
    const double lambda = uniform(rng, 1.0, 4.0);
    const double cx = uniform(rng, 0.0, lambda);
    const double cp = uniform(rng, 0.0, cx);
    if (physical_symmetric({lambda, cx, cp})) return {lambda, cx, cp};
  }
}

// Sifted stream shared by criteria 3 and 4.
const SiftedBits& reference_stream() {
  static const SiftedBits bits = [] {
    ProtocolConfig cfg;
    cfg.window = 0.01;
    cfg.n_pairs = 100'000'000;
    return simulate_sifting({1.5, 1.0, 1.0}, cfg, Rng(2024));
  }();
  return bits;
}

Outcome nppt_equals_individual() {
  Rng rng(1);
  const auto grid = x0_grid(5.0, 20);
  int mismatches = 0, banded = 0;
  for (int i = 0; i < 10000; ++i) {
    const SymmetricStateParams p = random_physical(rng);
    const double margin = p.lambda * (p.c_x + p.c_p) - (p.lambda * p.lambda + p.c_x * p.c_p - 1.0);
    if (std::abs(margin) < 1e-9) {
      ++banded;
      continue;
    }
    const EveModel model(p);
    bool secure = false;
    for (double x0 : grid) secure = secure || individual_attack_secure(model, x0);
    if (secure != npt_symmetric(p)) ++mismatches;
  }
  return {mismatches == 0, fmt("%.0f mismatches, %.0f points in band", mismatches, banded)};
}

Outcome boundary_equality() {
  double worst = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double lambda = 1.0 + 2.0 * i / 100.0;
    const SymmetricStateParams p{lambda, lambda - 1.0, lambda - 1.0};
    const EveModel model(p);
    for (double x0 : {0.5, 1.0, 2.0}) {
      const double eps = error_probability(p, x0);
      const double overlap = std::exp(model.ensemble(x0).log_overlap_pp_mm);
      worst = std::max(worst, std::abs(eps / (1.0 - eps) - overlap));
    }
  }
  return {worst < 1e-12, fmt("max deviation %.3g", worst)};
}

Outcome sifted_error_rate() {
  const SiftedBits& bits = reference_stream();
  const double n = double(bits.size());
  const double target = 0.03917;
  const double sigma = std::sqrt(target * (1.0 - target) / n);
  const double dev = std::abs(bits.error_rate() - target);
  return {n >= 1e4 && dev < 3.0 * sigma,
          fmt("accepted %.0f, error %.5f, %.2f sigma", n, bits.error_rate(), dev / sigma)};
}

Outcome advantage_distillation() {
  const SiftedBits& bits = reference_stream();
  const double eps = error_probability({1.5, 1.0, 1.0}, 1.0);
  bool ok = true;
  std::string detail;
  for (std::size_t n : {2u, 3u}) {
    Rng rng(2024, cli::kDistillationStream);
    const auto out = simulate_advantage_distillation(bits, n, rng);
    const double target = ad_error(eps, n);
    const double kept = double(out.kept_bits_alice.size());
    const double sigma = std::sqrt(target * (1.0 - target) / kept);
    const bool within = std::abs(out.empirical_error - target) < 3.0 * sigma;
    const bool bounded = target <= ad_error_bound(eps, n);
    ok = ok && within && bounded;
    detail += fmt("N=%.0f: %.3g vs %.3g", double(n), out.empirical_error, target) + (n == 2 ? "; " : "");
  }
  return {ok, detail};
}

Outcome eve_state_closed_form() {
  Rng rng(5);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const SymmetricStateParams p = random_physical(rng);
    const EveModel model(p);
    const double det = p.lambda * p.lambda - p.c_x * p.c_x;
    const RealMatrix expected{{p.lambda, p.c_x, 0, 0},
                              {p.c_x, p.lambda, 0, 0},
                              {0, 0, p.lambda / det, -p.c_x / det},
                              {0, 0, -p.c_x / det, p.lambda / det}};
    const double amp =
        -std::sqrt(p.lambda * p.lambda + p.lambda * (p.c_x - p.c_p) - p.c_x * p.c_p - 1.0) / (p.lambda + p.c_x);
    for (double x0 : {0.5, 1.0}) {
      const GaussianState e = model.ensemble(x0).states[kPP].state;
      const RealMatrix cm = to_xxpp(e.cm);
      const auto dv = to_xxpp(e.dv);
      const std::vector<double> dv_expected{0.0, 0.0, amp * x0, amp * x0};
      for (std::size_t r = 0; r < 4; ++r) {
        worst = std::max(worst, std::abs(dv[r] - dv_expected[r]));
        for (std::size_t c = 0; c < 4; ++c)
          worst = std::max(worst, std::abs(cm(r, c) - expected(r, c)) / std::max(1.0, std::abs(expected(r, c))));
      }
    }
  }
  return {worst < 1e-12, fmt("max deviation %.3g", worst)};
}

Outcome grid_overlap_oracle() {
  const SymmetricStateParams p{1.5, 1.0, 1.0};
  const GaussianState g = purify(symmetric_embed(p));
  const auto psi = oracle::wavefunction_from_pure(g.cm, g.dv, oracle::GridAxis::symmetric(20.0 / 3.0, 41));
  const auto pp = oracle::grid_condition_on_x(psi, {0, 1}, {1.0, 1.0}).psi;
  const auto mm = oracle::grid_condition_on_x(psi, {0, 1}, {-1.0, -1.0}).psi;
  const double grid = std::norm(oracle::grid_overlap(pp, mm));
  const double closed = std::exp(-4.0 * (p.lambda * p.lambda + p.lambda * (p.c_x - p.c_p) - p.c_x * p.c_p - 1.0) /
                                 (p.lambda + p.c_x));
  return {std::abs(grid - closed) < 1e-3, fmt("grid %.6f, closed form %.6f", grid, closed)};
}

RealMatrix random_cm(std::size_t n, Rng& rng) {
  // Random mixed state: thermal diagonal dressed by random passive and squeezing layers.
  RealMatrix s = RealMatrix::identity(2 * n);
  for (int round = 0; round < 4; ++round) {
    for (std::size_t k = 0; k < n; ++k) {
      RealMatrix g = RealMatrix::identity(2 * n);
      const double th = uniform(rng, 0.0, 2.0 * std::numbers::pi), r = uniform(rng, -0.7, 0.7);
      g(2 * k, 2 * k) = std::exp(r) * std::cos(th);
      g(2 * k, 2 * k + 1) = -std::exp(r) * std::sin(th);
      g(2 * k + 1, 2 * k) = std::exp(-r) * std::sin(th);
      g(2 * k + 1, 2 * k + 1) = std::exp(-r) * std::cos(th);
      s = g * s;
    }
    if (n == 2) {
      const double phi = uniform(rng, 0.0, std::numbers::pi / 2);
      RealMatrix bs = RealMatrix::identity(4);
      for (std::size_t q = 0; q < 2; ++q) {
        bs(q, q) = bs(2 + q, 2 + q) = std::cos(phi);
        bs(q, 2 + q) = std::sin(phi);
        bs(2 + q, q) = -std::sin(phi);
      }
      s = bs * s;
    }
  }
  std::vector<double> d;
  for (std::size_t k = 0; k < n; ++k) {
    const double nu = uniform(rng, 1.0, 4.0);
    d.insert(d.end(), {nu, nu});
  }
  const RealMatrix cm = s * RealMatrix::diagonal(std::span<const double>(d)) * s.transpose();
  return 0.5 * (cm + cm.transpose());
}

Outcome purification_contract() {
  Rng rng(7);
  double worst_spectrum = 0.0, worst_trace = 0.0;
  for (std::size_t n : {1u, 2u}) {
    for (int i = 0; i < 100; ++i) {
      const GaussianState state(random_cm(n, rng));
      const GaussianState pure = purify(state);
      for (double nu : symplectic_spectrum(pure.cm)) worst_spectrum = std::max(worst_spectrum, std::abs(nu - 1.0));
      ModeSet keep;
      for (std::size_t k = 0; k < n; ++k) keep.push_back(k);
      worst_trace = std::max(worst_trace, max_abs_diff(reduce(pure, keep).cm, state.cm));
    }
  }
  return {worst_spectrum < 1e-9 && worst_trace == 0.0,
          fmt("max |nu - 1| %.3g, partial-trace deviation %.3g", worst_spectrum, worst_trace)};
}

Outcome frontier_reproduction() {
  const auto c_grid = cli::linspace(0.1, 3.0, 30);
  const auto individual = security_frontier(c_grid, AttackModel::individual());
  const auto general = security_frontier(c_grid, AttackModel::general());
  double worst_dashed = 0.0;
  bool between = true, monotone = true;
  for (std::size_t i = 0; i < c_grid.size(); ++i) {
    const double c = c_grid[i];
    worst_dashed = std::max(worst_dashed, std::abs(individual[i].lambda_star - (c + 1.0)));
    between = between && std::sqrt(1.0 + c * c) < general[i].lambda_star && general[i].lambda_star < c + 1.0;
    if (i > 0)
      monotone = monotone && individual[i].lambda_star >= individual[i - 1].lambda_star &&
                 general[i].lambda_star >= general[i - 1].lambda_star;
  }
  const SymmetricStateParams witness{3.0, 2.2, 2.2};
  const EveModel model(witness);
  bool ad_secure_somewhere = false;
  for (double x0 : x0_grid(5.0, 20)) ad_secure_somewhere = ad_secure_somewhere || coherent_ad_secure(model, x0);
  const bool counterexample = npt_symmetric(witness) && !ad_secure_somewhere;
  return {worst_dashed < 1e-5 && between && monotone && counterexample,
          fmt("individual vs c+1 %.3g", worst_dashed) +
              (between ? ", general strictly inside" : ", general NOT strictly inside") +
              (monotone ? ", monotone" : ", NOT monotone") +
              (counterexample ? ", NPPT (3, 2.2, 2.2) fails coherent-AD" : ", no coherent-AD counterexample")};
}

Outcome effective_state_sanity() {
  double worst_s = 0.0, worst_r = 0.0, best_product = -1.0;
  for (double lambda : {1.2, 1.5, 2.0, 3.0}) {
    const double c = std::sqrt(lambda * lambda - 1.0);
    const EveModel model({lambda, c, c});
    for (double x0 : {0.5, 1.0, 2.0}) {
      const Effective2x2 s = effective_state(model, x0);
      const double entropy = entropy_bits(s);
      worst_s = std::max(worst_s, entropy);
      worst_r = std::max(worst_r, std::abs(rate_lower_bound(model, x0) - (1.0 - binary_entropy(s.eps_ab))));
    }
  }
  for (double lambda : {1.0, 2.0}) {
    const EveModel model({lambda, 0.0, 0.0});
    for (double x0 : {0.5, 1.0, 2.0}) best_product = std::max(best_product, rate_lower_bound(model, x0));
  }
  return {worst_s < 1e-9 && worst_r < 1e-9 && best_product <= 0.0,
          fmt("max S %.3g, max |R - (1 - h)| %.3g, product R %.3g", worst_s, worst_r, best_product)};
}

Outcome simulate_determinism() {
  cli::RunConfig cfg;
  cfg.command = "simulate";
  cfg.pairs = 3'000'000;
  cfg.window = 0.05;
  cfg.block_n = 2;
  cfg.seed = 99;
  const std::string first = cli::cmd_simulate(cfg).output;
  bool same = cli::cmd_simulate(cfg).output == first;
  for (unsigned w : {2u, 4u}) {
    cfg.workers = w;
    same = same && cli::cmd_simulate(cfg).output == first;
  }
  return {same && !first.empty(), same ? "identical across runs and 1/2/4 workers" : "outputs differ"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"NPPT iff individual-attack secure", nppt_equals_individual},
      {"boundary equality eps/(1-eps) = |<e++|e-->|", boundary_equality},
      {"Monte-Carlo sifted error rate", sifted_error_rate},
      {"advantage distillation N=2,3", advantage_distillation},
      {"Eve conditional state closed form", eve_state_closed_form},
      {"grid oracle Eve overlap", grid_overlap_oracle},
      {"purification contract", purification_contract},
      {"security frontiers", frontier_reproduction},
      {"effective-state sanity", effective_state_sanity},
      {"simulate determinism", simulate_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("%s %zu: %s (%s) [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
