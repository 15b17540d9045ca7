#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gkd/oracle.hpp"
#include "gkd/protocol.hpp"
#include "gkd/security.hpp"
#include "test_util.hpp"

using namespace gkd;
using gkd::testing::random_physical_params;
using gkd::testing::uniform;

namespace {

const SymmetricStateParams kRef{1.5, 1.0, 1.0};

double closed_form_overlap_sq(const SymmetricStateParams& p, double x0) {
  return std::exp(-4.0 * (p.lambda * p.lambda + p.lambda * (p.c_x - p.c_p) - p.c_x * p.c_p - 1.0) * x0 * x0 /
                  (p.lambda + p.c_x));
}

double odds(const SymmetricStateParams& p, double x0) {
  const double e = error_probability(p, x0);
  return e / (1.0 - e);
}

SymmetricStateParams pure_boundary(double lambda) {
  const double c = std::sqrt(lambda * lambda - 1.0);
  return {lambda, c, c};
}

}  // namespace

TEST(AttackModel, ParseAndName) {
  for (const char* n : {"individual", "finite-coherent", "coherent-ad", "general"})
    EXPECT_EQ(AttackModel::parse(n, 3).name(), n);
  EXPECT_EQ(AttackModel::parse("finite-coherent", 3).n_e, 3u);
  EXPECT_THROW(AttackModel::parse("collective"), InvalidInput);
  EXPECT_THROW(AttackModel::finite_coherent(0), InvalidInput);
}

TEST(EveEnsemble, PureBoundaryDecouplesEve) {
  const auto ens = eve_ensemble(pure_boundary(1.7), 0.8);
  for (std::size_t s = 1; s < 4; ++s) {
    EXPECT_LE(max_abs_diff(ens.states[s].state.cm, ens.states[0].state.cm), 1e-12);
    EXPECT_LE(gkd::testing::max_diff(ens.states[s].state.dv, ens.states[0].state.dv), 1e-12);
  }
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(std::abs(ens.gram(i, k) - 1.0), 0.0, 1e-12);
}

TEST(EveEnsemble, ReferenceOverlap) {
  const auto ens = eve_ensemble(kRef, 1.0);
  EXPECT_NEAR(std::norm(ens.gram(kPP, kMM)), std::exp(-0.4), 1e-12);
  EXPECT_NEAR(ens.gram(kPP, kMM).imag(), 0.0, 1e-15);
  EXPECT_GT(ens.gram(kPP, kMM).real(), 0.0);
  EXPECT_NEAR(std::exp(2.0 * ens.log_overlap_pp_mm), std::exp(-0.4), 1e-12);
}

TEST(EveEnsemble, MirrorDisplacementsAndCommonCovariance) {
  Rng rng(201);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_physical_params(rng);
    const double x0 = uniform(rng, 0.1, 3.0);
    const auto ens = eve_ensemble(p, x0);
    for (std::size_t i = 0; i < 4; ++i)
      EXPECT_NEAR(ens.states[kPP].state.dv[i], -ens.states[kMM].state.dv[i], 1e-12);
    for (std::size_t s = 1; s < 4; ++s)
      EXPECT_LE(max_abs_diff(ens.states[s].state.cm, ens.states[0].state.cm), 1e-12);
  }
}

TEST(EveEnsemble, GramIsRealHermitianPsdWithUnitDiagonal) {
  Rng rng(202);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_physical_params(rng);
    const auto ens = eve_ensemble(p, uniform(rng, 0.1, 3.0));
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_NEAR(std::abs(ens.gram(i, i) - 1.0), 0.0, 1e-15);
      for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_NEAR(std::abs(ens.gram(i, k) - std::conj(ens.gram(k, i))), 0.0, 1e-15);
        EXPECT_NEAR(ens.gram(i, k).imag(), 0.0, 1e-12);
      }
    }
    EXPECT_GE(eigh(ComplexHermitian(ens.gram)).values.front(), -1e-9);
  }
}

TEST(IndividualAttack, ReferencePoint) {
  EXPECT_NEAR(odds(kRef, 1.0), 0.04076, 1e-5);
  EXPECT_NEAR(std::sqrt(closed_form_overlap_sq(kRef, 1.0)), 0.8187, 1e-4);
  EXPECT_TRUE(individual_attack_secure(kRef, 1.0));
}

TEST(IndividualAttack, ProductStateInsecure) {
  for (double x0 : {0.2, 1.0, 3.0}) EXPECT_FALSE(individual_attack_secure({1.3, 0.0, 0.0}, x0));
}

TEST(IndividualAttack, EqualityOnSeparabilityBoundary) {
  for (double lambda : {1.2, 1.5, 2.0, 3.0}) {
    const SymmetricStateParams p{lambda, lambda - 1.0, lambda - 1.0};
    for (double x0 : {0.3, 0.5, 1.0, 2.0}) {
      const double rhs = std::exp(eve_ensemble(p, x0).log_overlap_pp_mm);
      EXPECT_NEAR(odds(p, x0), rhs, 1e-12);
      EXPECT_NEAR(std::log(odds(p, x0)), -4.0 * (lambda - 1.0) * x0 * x0 / (2.0 * lambda - 1.0), 1e-12);
      EXPECT_FALSE(individual_attack_secure(p, x0));
    }
  }
}

TEST(IndividualAttack, EquivalentToEntanglement) {
  Rng rng(203);
  const auto grid = x0_grid(5.0, 20);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto p = random_physical_params(rng);
    const double margin = p.lambda * (p.c_x + p.c_p) - (p.lambda * p.lambda + p.c_x * p.c_p - 1.0);
    if (std::abs(margin) < 1e-9) continue;
    const EveModel model(p);
    bool any = false;
    for (double x0 : grid) any = any || individual_attack_secure(model, x0);
    ASSERT_EQ(any, npt_symmetric(p)) << p.lambda << " " << p.c_x << " " << p.c_p;
  }
}

TEST(CoherentAttack, PureBoundarySecureForAnyX0) {
  for (double lambda : {1.2, 2.0, 3.5})
    for (double x0 : {0.1, 1.0, 2.5}) EXPECT_TRUE(coherent_ad_secure(pure_boundary(lambda), x0));
}

TEST(CoherentAttack, SomeEntangledStatesAreInsecure) {
  const SymmetricStateParams p{3.0, 2.2, 2.2};
  ASSERT_TRUE(npt_symmetric(p));
  const EveModel model(p);
  for (int i = 1; i <= 1000; ++i) {
    const double x0 = 5.0 * i / 1000.0;
    EXPECT_FALSE(coherent_ad_secure(model, x0)) << x0;
  }
  EXPECT_TRUE(secure_for_some_x0(model, AttackModel::individual()));
}

TEST(CoherentAttack, ImpliesIndividualSecurity) {
  Rng rng(204);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto p = random_physical_params(rng);
    const double x0 = uniform(rng, 0.05, 4.0);
    const EveModel model(p);
    if (coherent_ad_secure(model, x0)) {
      EXPECT_TRUE(individual_attack_secure(model, x0));
    }
  }
}

TEST(FiniteCoherentAttack, SameVerdictAsIndividual) {
  Rng rng(205);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto p = random_physical_params(rng);
    const double x0 = uniform(rng, 0.05, 4.0);
    const EveModel model(p);
    EXPECT_EQ(finite_coherent_secure(model, x0, 1 + trial % 7), individual_attack_secure(model, x0));
  }
  EXPECT_TRUE(finite_coherent_secure(kRef, 1.0, 10));
  EXPECT_FALSE(finite_coherent_secure({2.0, 0.0, 0.0}, 1.0, 10));
}

TEST(EffectiveState, PureBoundaryIsRankOne) {
  const auto s = effective_state(pure_boundary(1.6), 0.9);
  EXPECT_NEAR(entropy_bits(s), 0.0, 1e-9);
  const auto vals = eigh(ComplexHermitian(s.rho)).values;
  EXPECT_NEAR(vals.back(), 1.0, 1e-12);
}

TEST(EffectiveState, OrthogonalEveStatesGiveClassicalMixture) {
  const double eps = 0.2;
  const auto s = effective_state(eps, ComplexMatrix::identity(4));
  const std::vector<double> diag{(1 - eps) / 2, eps / 2, eps / 2, (1 - eps) / 2};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(s.rho(i, i).real(), diag[i], 1e-15);
    for (std::size_t k = 0; k < 4; ++k)
      if (i != k) {
        EXPECT_EQ(std::abs(s.rho(i, k)), 0.0);
      }
  }
  EXPECT_NEAR(entropy_bits(s), 1.0 + binary_entropy(eps), 1e-12);
}

TEST(EffectiveState, SpectrumAgreesWithGridOracle) {
  const double x0 = 1.0;
  const EveModel model(kRef);
  const auto axis = oracle::GridAxis::symmetric(20.0 / 3.0, 41);
  const auto psi = oracle::wavefunction_from_pure(model.global_state().cm, model.global_state().dv, axis);
  const auto grid = oracle::grid_reduced_spectrum(psi, {0, 1}, x0);
  const auto lib = eigh(ComplexHermitian(effective_state(model, x0).rho)).values;
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(grid.eigenvalues[k], lib[k], 1e-4);
}

TEST(EffectiveState, TracePsdHermitian) {
  Rng rng(206);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_physical_params(rng);
    const auto s = effective_state(p, uniform(rng, 0.05, 4.0));
    double tr = 0.0;
    for (std::size_t i = 0; i < 4; ++i) tr += s.rho(i, i).real();
    EXPECT_NEAR(tr, 1.0, 1e-10);
    EXPECT_GE(eigh(ComplexHermitian(s.rho)).values.front(), -1e-9);
    EXPECT_LE(max_abs_diff(s.rho, s.rho.adjoint()), 1e-15);
  }
}

TEST(EffectiveState, EntropyInvariantUnderThresholdSignFlip) {
  Rng rng(207);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_physical_params(rng);
    const double x0 = uniform(rng, 0.1, 3.0);
    const EveModel model(p);
    std::vector<std::vector<double>> dvs;
    for (std::size_t s = 0; s < 4; ++s)
      dvs.push_back(condition_on_x(model.global_state(), {0, 1},
                                   std::vector<double>{-kSectorSignA[s] * x0, -kSectorSignB[s] * x0})
                        .state.dv);
    const RealMatrix cm = model.ensemble(x0).states[0].state.cm;
    const auto flipped = effective_state(error_probability(p, x0), overlap_gram(cm, dvs));
    EXPECT_NEAR(entropy_bits(flipped), entropy_bits(effective_state(model, x0)), 1e-10);
  }
}

TEST(RateLowerBound, PureBoundaryHasNoEveTerm) {
  const auto p = pure_boundary(1.4);
  for (double x0 : {0.2, 0.7, 1.5}) {
    const double r = rate_lower_bound(p, x0);
    EXPECT_NEAR(r, 1.0 - binary_entropy(error_probability(p, x0)), 1e-9);
    EXPECT_GT(r, 0.0);
  }
}

TEST(RateLowerBound, ProductStateCertifiesNothing) {
  for (double x0 : {0.1, 1.0, 4.0}) EXPECT_LE(rate_lower_bound({1.8, 0.0, 0.0}, x0), 1e-12);
}

TEST(RateLowerBound, NeverExceedsMutualInformation) {
  Rng rng(208);
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = random_physical_params(rng);
    const double x0 = uniform(rng, 0.05, 4.0);
    EXPECT_LE(rate_lower_bound(p, x0), 1.0 - binary_entropy(error_probability(p, x0)) + 1e-12);
  }
}

TEST(RateLowerBound, SingleSignChangeAlongCorrelation) {
  const double lambda = 2.0;
  int changes = 0;
  bool prev = false;
  const int n = 40;
  for (int i = 0; i <= n; ++i) {
    const double c = std::sqrt(lambda * lambda - 1.0) * i / n;
    const bool secure = optimize_rate(SymmetricStateParams{lambda, c, c}).best_rate > kRateThreshold;
    if (i == 0) {
      EXPECT_FALSE(secure);
    }
    if (i == n) {
      EXPECT_TRUE(secure);
    }
    if (i > 0 && secure != prev) ++changes;
    prev = secure;
  }
  EXPECT_EQ(changes, 1);
}

TEST(OptimizeRate, PureBoundaryApproachesOneBit) {
  // The rate grows with x0 until h(eps) drops below rounding, after which the
  // optimum is flat and any such x0 is acceptable.
  const auto p = pure_boundary(1.5);
  EXPECT_LT(rate_lower_bound(p, 0.3), rate_lower_bound(p, 0.6));
  EXPECT_LT(rate_lower_bound(p, 0.6), rate_lower_bound(p, 1.0));
  const auto opt = optimize_rate(p, 5.0);
  EXPECT_GT(opt.best_x0, 1.5);
  EXPECT_NEAR(opt.best_rate, 1.0, 1e-9);
}

TEST(OptimizeRate, ProductStateNonPositive) { EXPECT_LE(optimize_rate({1.5, 0.0, 0.0}).best_rate, 1e-12); }

TEST(OptimizeRate, BeatsDenseScan) {
  for (const SymmetricStateParams& p : {kRef, SymmetricStateParams{1.2, 0.55, 0.55},
                                        SymmetricStateParams{2.5, 1.9, 1.4}}) {
    const EveModel model(p);
    const auto opt = optimize_rate(model, 5.0);
    for (int i = 1; i <= 1000; ++i) {
      const double x0 = 5.0 * i / 1000.0;
      EXPECT_GE(opt.best_rate, rate_lower_bound(model, x0) - 1e-12) << x0;
    }
  }
}

TEST(Frontier, IndividualCoincidesWithEntanglementBoundary) {
  const std::vector<double> cs{0.1, 0.5, 1.0, 2.0, 3.0};
  for (const auto& pt : security_frontier(cs, AttackModel::individual())) EXPECT_NEAR(pt.lambda_star, pt.c + 1.0, 1e-6);
}

TEST(Frontier, GeneralLiesStrictlyInsideEntangledRegion) {
  const auto pts = security_frontier({1.0}, AttackModel::general());
  EXPECT_GT(pts[0].lambda_star, std::sqrt(2.0));
  EXPECT_LT(pts[0].lambda_star, 2.0);
}

TEST(Frontier, NondecreasingForEveryAttack) {
  std::vector<double> cs;
  for (int i = 0; i < 12; ++i) cs.push_back(0.1 + 0.25 * i);
  for (const auto& attack : {AttackModel::individual(), AttackModel::finite_coherent(4), AttackModel::coherent_ad(),
                             AttackModel::general()}) {
    const auto pts = security_frontier(cs, attack);
    for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_GE(pts[i].lambda_star, pts[i - 1].lambda_star);
  }
}

TEST(Frontier, RejectsBadGrids) {
  EXPECT_THROW(security_frontier({}, AttackModel::general()), InvalidInput);
  EXPECT_THROW(security_frontier({1.0, 0.5}, AttackModel::general()), InvalidInput);
  EXPECT_THROW(security_frontier({0.0, 0.5}, AttackModel::general()), InvalidInput);
}

TEST(AttackOrdering, StrongerAttacksNeedStrongerStates) {
  int general_not_coherent = 0;
  for (int i = 0; i <= 15; ++i) {
    for (int j = 0; j <= 15; ++j) {
      const double c = 0.2 + 2.8 * i / 15.0;
      const double lambda = std::sqrt(1.0 + c * c) + (c + 1.0 - std::sqrt(1.0 + c * c)) * (j + 0.5) / 16.0;
      const EveModel model({lambda, c, c});
      const bool ind = secure_for_some_x0(model, AttackModel::individual());
      const bool coh = secure_for_some_x0(model, AttackModel::coherent_ad());
      const bool gen = secure_for_some_x0(model, AttackModel::general());
      if (coh) {
        EXPECT_TRUE(ind);
      }
      if (gen) {
        EXPECT_TRUE(ind);
      }
      if (gen && !coh) ++general_not_coherent;
    }
  }
  // Recorded, not asserted: no proven implication between these two.
  RecordProperty("general_secure_but_not_coherent_ad", general_not_coherent);
}

TEST(Analyze, ReportIsConsistent) {
  const auto r = analyze(kRef);
  EXPECT_TRUE(r.physical);
  EXPECT_TRUE(r.nppt);
  EXPECT_TRUE(r.individual_secure);
  EXPECT_TRUE(r.general_secure);
  EXPECT_LE(r.rate_lb, 1.0);
  EXPECT_NEAR(r.rate_lb, rate_lower_bound(kRef, r.best_x0), 1e-12);
  EXPECT_NEAR(r.eps_ab, error_probability(kRef, r.best_x0), 1e-15);
  EXPECT_NEAR(r.eve_overlap, std::sqrt(closed_form_overlap_sq(kRef, r.best_x0)), 1e-12);
  EXPECT_THROW(analyze({1.5, 1.3, 1.0}), InvalidInput);
}

TEST(Analyze, VacuumIsNotSecure) {
  const auto r = analyze({1.0, 0.0, 0.0});
  EXPECT_FALSE(r.nppt);
  EXPECT_FALSE(r.individual_secure);
  EXPECT_FALSE(r.general_secure);
  EXPECT_LE(r.rate_lb, 0.0);
}
