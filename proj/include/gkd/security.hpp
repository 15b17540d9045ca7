#pragma once

// Eavesdropper-side analysis of the postselected protocol: Eve's conditional
// states, overlap-based security conditions for each attack model, the
// effective two-qubit state shared by Alice and Bob and the one-way key-rate
// lower bound I(A:B) - S(rho_AB), plus frontier scans over the c_x = c_p
// family.

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "gkd/errors.hpp"
#include "gkd/gaussian.hpp"
#include "gkd/matkit.hpp"
#include "gkd/protocol.hpp"

namespace gkd {

struct AttackModel {
  enum class Kind { Individual, FiniteCoherent, CoherentAD, GeneralOneWay };

  Kind kind = Kind::Individual;
  std::size_t n_e = 1;  // only meaningful for FiniteCoherent

  static AttackModel individual() { return {Kind::Individual, 1}; }
  static AttackModel finite_coherent(std::size_t n_e) {
    if (n_e == 0) throw InvalidInput("finite coherent attack needs n_e >= 1");
    return {Kind::FiniteCoherent, n_e};
  }
  static AttackModel coherent_ad() { return {Kind::CoherentAD, 1}; }
  static AttackModel general() { return {Kind::GeneralOneWay, 1}; }

  static AttackModel parse(std::string_view name, std::size_t n_e = 1) {
    if (name == "individual") return individual();
    if (name == "finite-coherent") return finite_coherent(n_e);
    if (name == "coherent-ad") return coherent_ad();
    if (name == "general") return general();
    throw InvalidInput("unknown attack model: " + std::string(name));
  }

  std::string_view name() const {
    switch (kind) {
      case Kind::Individual: return "individual";
      case Kind::FiniteCoherent: return "finite-coherent";
      case Kind::CoherentAD: return "coherent-ad";
      case Kind::GeneralOneWay: return "general";
    }
    return "unknown";
  }
};

/// Postselection sectors, indexed 2 * (Alice negative) + (Bob negative).
enum Sector : std::size_t { kPP = 0, kPM = 1, kMP = 2, kMM = 3 };

inline constexpr std::array<double, 4> kSectorSignA{1.0, 1.0, -1.0, -1.0};
inline constexpr std::array<double, 4> kSectorSignB{1.0, -1.0, 1.0, -1.0};

struct EveEnsemble {
  std::array<ConditionalGaussian, 4> states;  // by Sector
  ComplexMatrix gram;                         // gram(i, j) = <e_i|e_j>
  double log_overlap_pp_mm = 0.0;             // log |<e_++|e_-->|
};

/// Gram matrix of displaced copies of one pure state; purity is checked once.
inline ComplexMatrix overlap_gram(const RealMatrix& cm, const std::vector<std::vector<double>>& dvs) {
  if (!is_pure(cm, 1e-6)) throw InvalidInput("overlap_gram: covariance matrix is not pure");
  const RealMatrix inv = inverse_spd(cm);
  const std::size_t k = dvs.size();
  ComplexMatrix g(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    g(i, i) = 1.0;
    for (std::size_t j = i + 1; j < k; ++j) {
      std::vector<double> delta(dvs[i].size());
      for (std::size_t t = 0; t < delta.size(); ++t) delta[t] = dvs[j][t] - dvs[i][t];
      const std::vector<double> w = inv * delta;
      double q = 0.0;
      for (std::size_t t = 0; t < delta.size(); ++t) q += delta[t] * w[t];
      g(i, j) = std::polar(std::exp(-0.25 * q), overlap_phase(dvs[i], dvs[j]));
      g(j, i) = std::conj(g(i, j));
    }
  }
  return g;
}

/// Purified symmetric state with Eve holding the two purifying modes. Built
/// once per parameter point and reused across x0 values.
class EveModel {
 public:
  explicit EveModel(const SymmetricStateParams& p) : params_(p), global_(purify(symmetric_embed(p))) {}

  const SymmetricStateParams& params() const { return params_; }
  const GaussianState& global_state() const { return global_; }

  EveEnsemble ensemble(double x0) const {
    if (!(x0 > 0.0) || !std::isfinite(x0)) throw InvalidInput("x0 must be positive");
    EveEnsemble e;
    std::vector<std::vector<double>> dvs;
    for (std::size_t s = 0; s < 4; ++s) {
      e.states[s] = condition_on_x(global_, {0, 1}, std::vector<double>{kSectorSignA[s] * x0, kSectorSignB[s] * x0});
      dvs.push_back(e.states[s].state.dv);
    }
    const RealMatrix& cm = e.states[kPP].state.cm;
    e.gram = overlap_gram(cm, dvs);
    e.log_overlap_pp_mm = log_overlap_magnitude(cm, dvs[kPP], dvs[kMM]);
    return e;
  }

 private:
  SymmetricStateParams params_;
  GaussianState global_;
};

inline EveEnsemble eve_ensemble(const SymmetricStateParams& p, double x0) { return EveModel(p).ensemble(x0); }

namespace detail {
// Strict inequalities are decided with a small relative margin so that points
// sitting exactly on a boundary are reported as insecure.
inline bool strictly_less(double lhs, double rhs) {
  return lhs < rhs - 1e-12 * std::max(1.0, std::abs(rhs));
}
}  // namespace detail

/// eps/(1-eps) < |<e_++|e_-->|, evaluated in log form.
inline bool individual_attack_secure(const EveModel& model, double x0) {
  return detail::strictly_less(log_error_odds(model.params(), x0), model.ensemble(x0).log_overlap_pp_mm);
}

/// eps/(1-eps) < |<e_++|e_-->|^2.
inline bool coherent_ad_secure(const EveModel& model, double x0) {
  return detail::strictly_less(log_error_odds(model.params(), x0), 2.0 * model.ensemble(x0).log_overlap_pp_mm);
}

/// Finite coherent attacks before reconciliation share the individual-attack
/// limit; n_e is only validated.
inline bool finite_coherent_secure(const EveModel& model, double x0, std::size_t n_e) {
  if (n_e == 0) throw InvalidInput("finite coherent attack needs n_e >= 1");
  return individual_attack_secure(model, x0);
}

inline bool individual_attack_secure(const SymmetricStateParams& p, double x0) {
  return individual_attack_secure(EveModel(p), x0);
}
inline bool coherent_ad_secure(const SymmetricStateParams& p, double x0) {
  return coherent_ad_secure(EveModel(p), x0);
}
inline bool finite_coherent_secure(const SymmetricStateParams& p, double x0, std::size_t n_e) {
  return finite_coherent_secure(EveModel(p), x0, n_e);
}

struct Effective2x2 {
  ComplexMatrix rho;  // basis |++>, |+->, |-+>, |-->
  double eps_ab = 0.0;
};

/// Alice and Bob's sign qubits after tracing out Eve:
///   <ij|rho|kl> = c_ij c_kl <e_kl|e_ij>,
/// with c = sqrt((1-eps)/2) on agreeing signs and sqrt(eps/2) otherwise.
inline Effective2x2 effective_state(double eps, const ComplexMatrix& gram) {
  if (gram.rows() != 4 || gram.cols() != 4) throw InvalidInput("effective_state: Gram matrix must be 4x4");
  const double agree = std::sqrt((1.0 - eps) / 2.0);
  const double disagree = std::sqrt(eps / 2.0);
  const std::array<double, 4> c{agree, disagree, disagree, agree};
  ComplexMatrix rho(4, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < 4; ++k) rho(i, k) = c[i] * c[k] * gram(k, i);
  return {ComplexHermitian(rho).matrix(), eps};
}

inline Effective2x2 effective_state(const EveModel& model, double x0) {
  return effective_state(error_probability(model.params(), x0), model.ensemble(x0).gram);
}
inline Effective2x2 effective_state(const SymmetricStateParams& p, double x0) {
  return effective_state(EveModel(p), x0);
}

inline double entropy_bits(const Effective2x2& s) {
  const auto values = eigh(ComplexHermitian(s.rho)).values;
  return von_neumann_entropy(values);
}

/// (1 - h(eps_AB)) - S(rho_AB). Not clamped: negative values certify nothing.
inline double rate_lower_bound(const EveModel& model, double x0) {
  const Effective2x2 s = effective_state(model, x0);
  return 1.0 - binary_entropy(s.eps_ab) - entropy_bits(s);
}
inline double rate_lower_bound(const SymmetricStateParams& p, double x0) {
  return rate_lower_bound(EveModel(p), x0);
}

struct RateOptimum {
  double best_x0;
  double best_rate;
};

inline RateOptimum optimize_rate(const EveModel& model, double x0_max = 5.0) {
  if (!(x0_max > 0.0) || !std::isfinite(x0_max)) throw InvalidInput("x0_max must be positive");
  const auto m = minimize_scalar([&](double x0) { return -rate_lower_bound(model, x0); }, 1e-3 * x0_max,
                                 x0_max, 1e-7 * x0_max);
  return {m.x, -m.fx};
}
inline RateOptimum optimize_rate(const SymmetricStateParams& p, double x0_max = 5.0) {
  return optimize_rate(EveModel(p), x0_max);
}

/// Smallest optimized rate (bits per accepted symbol) counted as a positive
/// key rate. At large x0 the bound is a difference of quantities close to 1
/// and rounding leaves residues of order 1e-16 of either sign.
inline constexpr double kRateThreshold = 1e-10;

/// Uniform x0 grid (x0_max/points, ..., x0_max].
inline std::vector<double> x0_grid(double x0_max = 5.0, std::size_t points = 20) {
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) g[i] = x0_max * double(i + 1) / double(points);
  return g;
}

/// Whether some x0 in (0, x0_max] makes the protocol secure under `attack`.
/// Overlap conditions are checked on the x0 grid; the general bound uses the
/// optimized rate.
inline bool secure_for_some_x0(const EveModel& model, const AttackModel& attack, double x0_max = 5.0) {
  if (attack.kind == AttackModel::Kind::GeneralOneWay) return optimize_rate(model, x0_max).best_rate > kRateThreshold;
  for (double x0 : x0_grid(x0_max)) {
    switch (attack.kind) {
      case AttackModel::Kind::Individual:
        if (individual_attack_secure(model, x0)) return true;
        break;
      case AttackModel::Kind::FiniteCoherent:
        if (finite_coherent_secure(model, x0, attack.n_e)) return true;
        break;
      case AttackModel::Kind::CoherentAD:
        if (coherent_ad_secure(model, x0)) return true;
        break;
      case AttackModel::Kind::GeneralOneWay:
        break;
    }
  }
  return false;
}

struct FrontierPoint {
  double c;
  double lambda_star;
};

inline constexpr double kFrontierTolerance = 1e-6;

/// For each c (with c_x = c_p = c) bisects lambda over the physical,
/// entangled range [sqrt(1 + c^2), c + 1]: states below lambda* are secure.
inline std::vector<FrontierPoint> security_frontier(const std::vector<double>& c_grid, const AttackModel& attack,
                                                    double x0_max = 5.0) {
  if (c_grid.empty()) throw InvalidInput("security_frontier: empty c grid");
  for (std::size_t i = 0; i < c_grid.size(); ++i) {
    if (!(c_grid[i] > 0.0)) throw InvalidInput("security_frontier: c values must be positive");
    if (i > 0 && !(c_grid[i] > c_grid[i - 1])) throw InvalidInput("security_frontier: c grid must ascend");
  }
  std::vector<FrontierPoint> out;
  out.reserve(c_grid.size());
  for (double c : c_grid) {
    double lo = std::sqrt(1.0 + c * c);
    double hi = c + 1.0;
    while (hi - lo > kFrontierTolerance) {
      const double mid = 0.5 * (lo + hi);
      if (secure_for_some_x0(EveModel({mid, c, c}), attack, x0_max)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    out.push_back({c, 0.5 * (lo + hi)});
  }
  return out;
}

struct SecurityReport {
  SymmetricStateParams params;
  bool physical = false;
  bool nppt = false;
  bool individual_secure = false;
  bool finite_coherent_secure = false;
  bool coherent_ad_secure = false;
  bool general_secure = false;
  std::size_t n_e = 1;
  double best_x0 = 0.0;
  double rate_lb = 0.0;
  double eps_ab = 0.5;
  double eve_overlap = 1.0;  // |<e_++|e_-->| at best_x0
};

/// Full analysis of one parameter point. Throws InvalidInput for unphysical
/// parameters.
inline SecurityReport analyze(const SymmetricStateParams& p, double x0_max = 5.0, std::size_t n_e = 1) {
  SecurityReport r;
  r.params = p;
  r.physical = physical_symmetric(p);
  if (!r.physical) throw InvalidInput("unphysical parameters");
  r.nppt = npt_symmetric(p);
  r.n_e = n_e;
  const EveModel model(p);
  r.individual_secure = secure_for_some_x0(model, AttackModel::individual(), x0_max);
  r.finite_coherent_secure = secure_for_some_x0(model, AttackModel::finite_coherent(n_e), x0_max);
  r.coherent_ad_secure = secure_for_some_x0(model, AttackModel::coherent_ad(), x0_max);
  const RateOptimum opt = optimize_rate(model, x0_max);
  r.best_x0 = opt.best_x0;
  r.rate_lb = opt.best_rate;
  r.general_secure = opt.best_rate > kRateThreshold;
  r.eps_ab = error_probability(p, opt.best_x0);
  r.eve_overlap = std::exp(model.ensemble(opt.best_x0).log_overlap_pp_mm);
  return r;
}

}  // namespace gkd
