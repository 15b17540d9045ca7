#pragma once

// Alice/Bob measurement statistics and the classical advantage-distillation
// layer: closed-form error rates plus a Monte-Carlo simulator of
// postselected X-homodyne sifting followed by repetition-code advantage
// distillation.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "gkd/errors.hpp"
#include "gkd/gaussian.hpp"
#include "gkd/matkit.hpp"

namespace gkd {

namespace detail {
inline void require_physical(const SymmetricStateParams& p) {
  if (!physical_symmetric(p)) throw InvalidInput("unphysical parameters");
}
}  // namespace detail

/// Covariance of the pair (x_A, x_B): half of [[lambda, c_x], [c_x, lambda]].
inline RealMatrix x_quadrature_covariance(const SymmetricStateParams& p) {
  return RealMatrix{{0.5 * p.lambda, 0.5 * p.c_x}, {0.5 * p.c_x, 0.5 * p.lambda}};
}

/// table[i][j]: probability that Alice reads bit i and Bob bit j given
/// |x_A| = |x_B| = x0 (bit 0 for a positive outcome).
inline std::array<std::array<double, 2>, 2> joint_sign_distribution(const SymmetricStateParams& p,
                                                                    double x0) {
  detail::require_physical(p);
  if (!(x0 >= 0.0)) throw InvalidInput("x0 must be non-negative");
  // Exponent of the bivariate density, x^T cov^-1 x / 2, at (s_A x0, s_B x0).
  const double det = p.lambda * p.lambda - p.c_x * p.c_x;
  auto exponent = [&](double sa, double sb) {
    const double xa = sa * x0;
    const double xb = sb * x0;
    return (p.lambda * xa * xa - 2.0 * p.c_x * xa * xb + p.lambda * xb * xb) / det;
  };
  const double same = exponent(1, 1);
  const double diff = exponent(1, -1);
  const double ref = std::min(same, diff);
  const double w_same = std::exp(-(same - ref));
  const double w_diff = std::exp(-(diff - ref));
  const double total = 2.0 * (w_same + w_diff);
  return {{{w_same / total, w_diff / total}, {w_diff / total, w_same / total}}};
}

/// log(eps / (1 - eps)) = -4 c_x x0^2 / (lambda^2 - c_x^2).
inline double log_error_odds(const SymmetricStateParams& p, double x0) {
  detail::check_ordering(p);
  if (p.lambda == p.c_x) throw DegenerateParams("lambda equals c_x: error probability has a pole");
  detail::require_physical(p);
  return -4.0 * p.c_x * x0 * x0 / (p.lambda * p.lambda - p.c_x * p.c_x);
}

/// Probability that Alice's and Bob's sign bits disagree after postselection.
inline double error_probability(const SymmetricStateParams& p, double x0) {
  return 1.0 / (1.0 + std::exp(-log_error_odds(p, x0)));
}

/// Error rate after advantage distillation over blocks of n bits.
inline double ad_error(double eps, std::size_t n) {
  if (!(eps >= 0.0 && eps < 1.0)) throw InvalidInput("ad_error: eps must lie in [0, 1)");
  if (n == 0) throw InvalidInput("ad_error: block size must be at least 1");
  const double r = std::pow(eps / (1.0 - eps), static_cast<double>(n));
  return r / (1.0 + r);
}

/// (eps / (1 - eps))^n, the large-n limit and an upper bound of ad_error.
inline double ad_error_bound(double eps, std::size_t n) {
  if (!(eps >= 0.0 && eps < 1.0)) throw InvalidInput("ad_error: eps must lie in [0, 1)");
  return std::pow(eps / (1.0 - eps), static_cast<double>(n));
}

/// Probability that a block of n bits is accepted: (1-eps)^n + eps^n.
inline double ad_acceptance(double eps, std::size_t n) {
  return std::pow(1.0 - eps, static_cast<double>(n)) + std::pow(eps, static_cast<double>(n));
}

struct ProtocolConfig {
  double x0 = 1.0;
  double window = 0.01;
  std::uint64_t n_pairs = 1'000'000;
  std::size_t block_n = 1;
  std::uint64_t seed = 0;

  /// Throws on invalid values; returns advisory warnings.
  std::vector<std::string> validate() const {
    if (!(x0 > 0.0) || !std::isfinite(x0)) throw InvalidInput("x0 must be positive");
    if (!(window > 0.0) || !std::isfinite(window)) throw InvalidInput("window must be positive");
    if (n_pairs == 0) throw InvalidInput("n_pairs must be at least 1");
    if (block_n == 0) throw InvalidInput("block_n must be at least 1");
    std::vector<std::string> warnings;
    if (window > x0 / 5.0) warnings.emplace_back("acceptance window is wider than x0/5");
    return warnings;
  }
};

struct SiftedBits {
  std::vector<std::uint8_t> alice;
  std::vector<std::uint8_t> bob;
  double acceptance_rate = 0.0;

  std::size_t size() const { return alice.size(); }
  std::size_t errors() const {
    std::size_t e = 0;
    for (std::size_t i = 0; i < alice.size(); ++i) e += alice[i] != bob[i];
    return e;
  }
  double error_rate() const { return alice.empty() ? 0.0 : double(errors()) / double(alice.size()); }
};

struct DistillationOutcome {
  std::vector<std::uint8_t> kept_bits_alice;
  std::vector<std::uint8_t> kept_bits_bob;
  double empirical_error = 0.0;
  double standard_error = 0.0;
  std::size_t blocks_consumed = 0;

  double acceptance() const {
    return blocks_consumed ? double(kept_bits_alice.size()) / double(blocks_consumed) : 0.0;
  }
};

/// Pairs per Monte-Carlo chunk; chunk k draws from stream k of the seed.
inline constexpr std::uint64_t kSiftChunk = std::uint64_t{1} << 20;

/// Draws n_pairs outcomes (x_A, x_B), keeps those with ||x| - x0| <= window
/// on both sides and records the sign bits. Work is split into fixed chunks
/// with their own RNG streams, so the result does not depend on `workers`.
inline SiftedBits simulate_sifting(const SymmetricStateParams& p, const ProtocolConfig& cfg,
                                   const Rng& rng, unsigned workers = 1) {
  detail::require_physical(p);
  cfg.validate();
  const RealMatrix cov = x_quadrature_covariance(p);
  MvnSampler prototype(cov);

  const std::uint64_t chunks = (cfg.n_pairs + kSiftChunk - 1) / kSiftChunk;
  std::vector<SiftedBits> parts(chunks);
  auto run_chunk = [&](std::uint64_t c) {
    MvnSampler sampler = prototype;
    Rng local = rng.stream(c);
    const std::uint64_t begin = c * kSiftChunk;
    const std::uint64_t end = std::min(cfg.n_pairs, begin + kSiftChunk);
    std::array<double, 2> x{};
    SiftedBits& out = parts[c];
    for (std::uint64_t i = begin; i < end; ++i) {
      sampler.draw(local, x);
      if (std::abs(std::abs(x[0]) - cfg.x0) <= cfg.window &&
          std::abs(std::abs(x[1]) - cfg.x0) <= cfg.window) {
        out.alice.push_back(x[0] < 0.0 ? 1 : 0);
        out.bob.push_back(x[1] < 0.0 ? 1 : 0);
      }
    }
  };

  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::uint64_t>(chunks, 1))));
  if (workers == 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::uint64_t c = w; c < chunks; c += workers) run_chunk(c);
      });
    for (auto& t : pool) t.join();
  }

  SiftedBits merged;
  for (const auto& part : parts) {
    merged.alice.insert(merged.alice.end(), part.alice.begin(), part.alice.end());
    merged.bob.insert(merged.bob.end(), part.bob.begin(), part.bob.end());
  }
  merged.acceptance_rate = double(merged.size()) / double(cfg.n_pairs);
  return merged;
}

/// Repetition-code advantage distillation over consecutive disjoint blocks.
/// Per block Alice draws a secret bit b and announces b XOR a_i for each of
/// her symbols; Bob accepts iff every b_i XOR his symbol gives the same b'.
inline DistillationOutcome simulate_advantage_distillation(const SiftedBits& bits, std::size_t block_n,
                                                           Rng& rng) {
  if (bits.alice.empty()) throw InvalidInput("advantage distillation needs a non-empty bit list");
  if (bits.alice.size() != bits.bob.size()) throw InvalidInput("sifted bit lists differ in length");
  if (block_n == 0) throw InvalidInput("block size must be at least 1");
  if (block_n > bits.size()) throw InvalidInput("block size exceeds the number of sifted bits");

  DistillationOutcome out;
  const std::size_t blocks = bits.size() / block_n;
  std::size_t errors = 0;
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    const std::uint8_t b = static_cast<std::uint8_t>(rng.bit());
    const std::size_t base = blk * block_n;
    bool agree = true;
    std::uint8_t b_bob = 0;
    for (std::size_t i = 0; i < block_n; ++i) {
      const std::uint8_t announced = b ^ bits.alice[base + i];
      const std::uint8_t guess = announced ^ bits.bob[base + i];
      if (i == 0) {
        b_bob = guess;
      } else if (guess != b_bob) {
        agree = false;
        break;
      }
    }
    if (!agree) continue;
    out.kept_bits_alice.push_back(b);
    out.kept_bits_bob.push_back(b_bob);
    errors += b != b_bob;
  }
  out.blocks_consumed = blocks;
  const double kept = double(out.kept_bits_alice.size());
  if (kept > 0) {
    out.empirical_error = double(errors) / kept;
    out.standard_error = std::sqrt(out.empirical_error * (1.0 - out.empirical_error) / kept);
  }
  return out;
}

}  // namespace gkd
