#pragma once

// Agreement suite between the covariance-matrix pipeline and the
// grid-wavefunction oracle. The overlap function under test is injectable so
// that a deliberately broken implementation can be shown to fail.

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "gkd/gaussian.hpp"
#include "gkd/matkit.hpp"
#include "gkd/oracle.hpp"
#include "gkd/protocol.hpp"
#include "gkd/security.hpp"

namespace gkd {

enum class OracleLevel { Quick, Full };

struct OracleCheckResult {
  std::string name;
  double observed = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

using OverlapFn = std::function<cplx(const RealMatrix&, const std::vector<double>&, const std::vector<double>&)>;

inline OverlapFn default_overlap() {
  return [](const RealMatrix& cm, const std::vector<double>& d1, const std::vector<double>& d2) {
    return pure_overlap(cm, d1, d2);
  };
}

/// Default grids: 201 points on [-8, 8] for one and two modes; 41 points on
/// [-20/3, 20/3] for four modes, so that x0 = 1 falls on a node.
inline oracle::GridAxis small_mode_axis() { return oracle::GridAxis::symmetric(8.0, 201); }
inline oracle::GridAxis four_mode_axis() { return oracle::GridAxis::symmetric(20.0 / 3.0, 41); }

namespace detail {

inline RealMatrix rotated_squeezed(double theta, double s) {
  const double c = std::cos(theta), sn = std::sin(theta);
  const RealMatrix r{{c, -sn}, {sn, c}};
  return r * RealMatrix::diagonal({s, 1.0 / s}) * r.transpose();
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

class CheckLog {
 public:
  void add(std::string name, double observed, double expected, double tol) {
    const bool ok = std::isfinite(observed) && std::abs(observed - expected) <= tol;
    results_.push_back({std::move(name), observed, expected, tol, ok});
  }
  std::vector<OracleCheckResult> take() { return std::move(results_); }

 private:
  std::vector<OracleCheckResult> results_;
};

inline void quick_checks(CheckLog& log, const OverlapFn& overlap) {
  using namespace oracle;
  const GridAxis axis = small_mode_axis();

  const RealMatrix vac = RealMatrix::identity(2);
  const auto vac_psi = wavefunction_from_pure(vac, {0.0, 0.0}, axis);
  log.add("vacuum norm", grid_norm(vac_psi), 1.0, 1e-6);
  log.add("vacuum X variance", grid_moments(vac_psi).cm(0, 0) / 2.0, 0.5, 1e-6);

  const RealMatrix sq = RealMatrix::diagonal({2.0, 0.5});
  const auto sq_m = grid_moments(wavefunction_from_pure(sq, {0.0, 0.0}, axis));
  log.add("squeezed X variance", sq_m.cm(0, 0) / 2.0, 1.0, 1e-4);
  log.add("squeezed P variance", sq_m.cm(1, 1) / 2.0, 0.25, 1e-4);

  const RealMatrix rot = rotated_squeezed(0.4, 2.0);
  const std::vector<double> rot_dv{0.3, -0.4};
  const auto rot_m = grid_moments(wavefunction_from_pure(rot, rot_dv, axis));
  log.add("rotated squeezed CM", gkd::max_abs_diff(rot_m.cm, rot), 0.0, 1e-4);
  log.add("rotated squeezed DV", max_abs_diff(rot_m.dv, rot_dv), 0.0, 1e-4);

  const std::vector<double> zero{0.0, 0.0}, shifted{2.0, 0.0};
  const cplx grid_vac = grid_overlap(vac_psi, wavefunction_from_pure(vac, shifted, axis));
  log.add("displaced vacuum |overlap|^2", std::norm(grid_vac), std::norm(overlap(vac, zero, shifted)), 1e-5);

  const std::vector<double> d1{0.3, 0.5}, d2{-0.4, 0.2};
  const cplx grid_rot = grid_overlap(wavefunction_from_pure(rot, d1, axis), wavefunction_from_pure(rot, d2, axis));
  log.add("one-mode complex overlap", std::abs(grid_rot - overlap(rot, d1, d2)), 0.0, 1e-6);

  // Two-mode squeezed vacuum as the purification of a thermal state.
  const GaussianState tmsv = purify(GaussianState(RealMatrix::diagonal({2.0, 2.0})));
  const auto tmsv_psi = wavefunction_from_pure(tmsv.cm, tmsv.dv, axis);
  log.add("two-mode norm", grid_norm(tmsv_psi), 1.0, 1e-6);
  log.add("two-mode reduced X variance", grid_moments(tmsv_psi).cm(0, 0) / 2.0, 1.0, 1e-3);

  const double x1 = axis.node(axis.center() + 9);
  const auto lib_cond = condition_on_x(tmsv, {0}, std::vector<double>{x1});
  const auto grid_cond = grid_moments(grid_condition_on_x(tmsv_psi, {0}, {x1}).psi);
  log.add("two-mode conditional CM", gkd::max_abs_diff(grid_cond.cm, lib_cond.state.cm), 0.0, 2e-3);
  log.add("two-mode conditional DV", max_abs_diff(grid_cond.dv, lib_cond.state.dv), 0.0, 2e-3);

  const std::vector<double> e1{0.3, -0.2, 0.1, 0.4}, e2{-0.1, 0.5, -0.3, 0.2};
  const cplx grid_two = grid_overlap(wavefunction_from_pure(tmsv.cm, e1, axis),
                                     wavefunction_from_pure(tmsv.cm, e2, axis));
  log.add("two-mode complex overlap", std::abs(grid_two - overlap(tmsv.cm, e1, e2)), 0.0, 1e-5);
}

inline void full_checks(CheckLog& log, const OverlapFn& overlap) {
  using namespace oracle;
  const GridAxis axis = four_mode_axis();
  const SymmetricStateParams p{1.5, 1.0, 1.0};
  const double x0 = 1.0;

  const EveModel model(p);
  const GaussianState& global = model.global_state();
  const auto psi = wavefunction_from_pure(global.cm, global.dv, axis);
  log.add("four-mode norm", grid_norm(psi), 1.0, 1e-6);

  const EveEnsemble ens = model.ensemble(x0);
  const auto pp = grid_moments(grid_condition_on_x(psi, {0, 1}, {x0, x0}).psi);
  const auto mm = grid_moments(grid_condition_on_x(psi, {0, 1}, {-x0, -x0}).psi);
  log.add("Eve conditional CM (++)", gkd::max_abs_diff(pp.cm, ens.states[kPP].state.cm), 0.0, 2e-3);
  log.add("Eve conditional DV (++)", max_abs_diff(pp.dv, ens.states[kPP].state.dv), 0.0, 2e-3);
  log.add("Eve conditional CM (++) vs (--)", gkd::max_abs_diff(pp.cm, mm.cm), 0.0, 2e-3);

  const auto e_pp = grid_condition_on_x(psi, {0, 1}, {x0, x0}).psi;
  const auto e_mm = grid_condition_on_x(psi, {0, 1}, {-x0, -x0}).psi;
  const RealMatrix& eve_cm = ens.states[kPP].state.cm;
  log.add("Eve |<e++|e-->|^2", std::norm(grid_overlap(e_pp, e_mm)),
          std::norm(overlap(eve_cm, ens.states[kPP].state.dv, ens.states[kMM].state.dv)), 1e-3);

  ComplexMatrix gram(4, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < 4; ++k) gram(i, k) = overlap(eve_cm, ens.states[i].state.dv, ens.states[k].state.dv);
  const Effective2x2 eff = effective_state(error_probability(p, x0), gram);
  const auto lib_values = eigh(ComplexHermitian(eff.rho)).values;
  const auto grid = grid_reduced_spectrum(psi, {0, 1}, x0);
  log.add("reduced spectrum", max_abs_diff(grid.eigenvalues, lib_values), 0.0, 1e-3);
  log.add("reduced-state entropy", von_neumann_entropy(grid.eigenvalues), von_neumann_entropy(lib_values), 5e-3);
  log.add("sector error probability", grid.rho(1, 1).real() + grid.rho(2, 2).real(), eff.eps_ab, 1e-3);

  // Pure boundary: Alice and Bob hold a pure state, Eve is decoupled.
  const SymmetricStateParams edge{1.25, 0.75, 0.75};
  const GaussianState edge_global = purify(symmetric_embed(edge));
  const auto edge_psi = wavefunction_from_pure(edge_global.cm, edge_global.dv, axis);
  const auto edge_spec = grid_reduced_spectrum(edge_psi, {0, 1}, x0);
  log.add("pure-boundary top eigenvalue", edge_spec.eigenvalues.back(), 1.0, 2e-3);
}

}  // namespace detail

inline std::vector<OracleCheckResult> run_oracle_checks(OracleLevel level, const OverlapFn& overlap = default_overlap()) {
  detail::CheckLog log;
  detail::quick_checks(log, overlap);
  if (level == OracleLevel::Full) detail::full_checks(log, overlap);
  return log.take();
}

}  // namespace gkd
