#pragma once

// Covariance-matrix calculus for n-mode Gaussian states.
//
// Conventions: quadratures are ordered mode-major (X1, P1, X2, P2, ...), the
// vacuum covariance matrix is the identity and a quadrature's variance is
// half the corresponding diagonal entry. The characteristic function is
// exp(i x.d - x.cm.x / 4).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "gkd/errors.hpp"
#include "gkd/matkit.hpp"

namespace gkd {

using ModeSet = std::vector<std::size_t>;

/// Block-diagonal direct sum of n copies of [[0, 1], [-1, 0]].
inline RealMatrix symplectic_form(std::size_t n) {
  if (n == 0) throw InvalidInput("symplectic_form: need at least one mode");
  RealMatrix j(2 * n, 2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    j(2 * k, 2 * k + 1) = 1.0;
    j(2 * k + 1, 2 * k) = -1.0;
  }
  return j;
}

namespace detail {

inline std::size_t mode_count(const RealMatrix& cm) {
  if (!cm.square() || cm.rows() == 0 || cm.rows() % 2 != 0)
    throw InvalidInput("covariance matrix must be square with even dimension");
  return cm.rows() / 2;
}

inline void check_symmetric(const RealMatrix& cm, double tol) {
  if (!all_finite(cm)) throw InvalidInput("covariance matrix has non-finite entries");
  if (max_abs_diff(cm, cm.transpose()) > tol * std::max(1.0, max_abs(cm)))
    throw InvalidInput("covariance matrix is not symmetric");
}

inline RealMatrix symmetrized(const RealMatrix& m) { return 0.5 * (m + m.transpose()); }

/// Smallest eigenvalue of cm + iJ.
inline double min_uncertainty_eigenvalue(const RealMatrix& cm) {
  const std::size_t n = mode_count(cm);
  ComplexMatrix h = to_complex(cm);
  const RealMatrix j = symplectic_form(n);
  for (std::size_t r = 0; r < h.rows(); ++r)
    for (std::size_t c = 0; c < h.cols(); ++c) h(r, c) += cplx(0.0, j(r, c));
  return eigh(ComplexHermitian(h)).values.front();
}

inline void check_modes(const ModeSet& modes, std::size_t n) {
  for (std::size_t m : modes)
    if (m >= n) throw InvalidInput("mode index out of range");
}

}  // namespace detail

inline bool is_physical(const RealMatrix& cm) {
  detail::mode_count(cm);
  detail::check_symmetric(cm, 1e-12);
  return detail::min_uncertainty_eigenvalue(cm) >= -1e-9;
}

/// Covariance matrix and displacement of an n-mode Gaussian state.
struct GaussianState {
  std::size_t n_modes = 0;
  RealMatrix cm;
  std::vector<double> dv;

  GaussianState() = default;
  GaussianState(RealMatrix covariance, std::vector<double> displacement)
      : n_modes(detail::mode_count(covariance)),
        cm(std::move(covariance)),
        dv(std::move(displacement)) {
    if (dv.empty()) dv.assign(2 * n_modes, 0.0);
    if (dv.size() != 2 * n_modes) throw InvalidInput("displacement length must be 2n");
    detail::check_symmetric(cm, 1e-12);
    if (!is_physical(cm)) throw InvalidInput("covariance matrix violates the uncertainty relation");
  }
  explicit GaussianState(RealMatrix covariance) : GaussianState(std::move(covariance), {}) {}
};

/// theta_A cm theta_A, where theta_A flips the momenta of the listed modes.
inline RealMatrix partial_transpose(const RealMatrix& cm, const ModeSet& modes_of_a) {
  const std::size_t n = detail::mode_count(cm);
  detail::check_modes(modes_of_a, n);
  std::vector<double> theta(2 * n, 1.0);
  for (std::size_t m : modes_of_a) theta[2 * m + 1] = -1.0;
  RealMatrix out = cm;
  for (std::size_t i = 0; i < 2 * n; ++i)
    for (std::size_t j = 0; j < 2 * n; ++j) out(i, j) *= theta[i] * theta[j];
  return out;
}

inline bool is_nppt(const RealMatrix& cm, const ModeSet& modes_of_a) {
  return detail::min_uncertainty_eigenvalue(partial_transpose(cm, modes_of_a)) < -1e-9;
}

/// Symplectic eigenvalues, ascending, one per mode. They are the positive
/// eigenvalues of the Hermitian matrix i cm^1/2 J cm^1/2, which is similar to
/// iJ cm.
inline std::vector<double> symplectic_spectrum(const RealMatrix& cm) {
  const std::size_t n = detail::mode_count(cm);
  detail::check_symmetric(cm, 1e-12);
  const RealMatrix root = spectral_function(cm, [](double v) { return std::sqrt(std::max(v, 0.0)); });
  const RealMatrix b = root * symplectic_form(n) * root;
  ComplexMatrix h(2 * n, 2 * n);
  for (std::size_t r = 0; r < 2 * n; ++r)
    for (std::size_t c = 0; c < 2 * n; ++c) h(r, c) = cplx(0.0, b(r, c));
  const auto values = eigh(ComplexHermitian(h)).values;
  return {values.begin() + static_cast<std::ptrdiff_t>(n), values.end()};
}

inline bool is_pure(const RealMatrix& cm, double tol = 1e-6) {
  const auto spec = symplectic_spectrum(cm);
  return std::all_of(spec.begin(), spec.end(), [&](double v) { return std::abs(v - 1.0) <= tol; });
}

struct SymplecticDiag {
  std::vector<double> spectrum;  // ascending
  RealMatrix s;                  // S^T J S = J
  RealMatrix d;                  // S^T cm S
};

/// Williamson normal form. With B = cm^-1/2 J cm^-1/2, the eigenvectors of
/// the Hermitian matrix iB give an orthogonal O bringing B to a direct sum of
/// [[0, 1/nu], [-1/nu, 0]] blocks; then S = cm^-1/2 O diag(sqrt(nu)).
inline SymplecticDiag williamson(const RealMatrix& cm) {
  const std::size_t n = detail::mode_count(cm);
  detail::check_symmetric(cm, 1e-12);
  const auto es = eigh(cm);
  if (es.values.front() < 1e-10) throw IllConditioned("williamson: covariance matrix is near-singular");

  const RealMatrix inv_root = spectral_function(cm, [](double v) { return 1.0 / std::sqrt(v); });
  const RealMatrix b = inv_root * symplectic_form(n) * inv_root;
  ComplexMatrix h(2 * n, 2 * n);
  for (std::size_t r = 0; r < 2 * n; ++r)
    for (std::size_t c = 0; c < 2 * n; ++c) h(r, c) = cplx(0.0, b(r, c));
  const auto hs = eigh(ComplexHermitian(h));

  SymplecticDiag out{std::vector<double>(n), RealMatrix(2 * n, 2 * n), RealMatrix(2 * n, 2 * n)};
  RealMatrix o(2 * n, 2 * n);
  const double sqrt2 = std::sqrt(2.0);
  for (std::size_t k = 0; k < n; ++k) {
    // Largest eigenvalue of iB belongs to the smallest symplectic eigenvalue.
    const std::size_t col = 2 * n - 1 - k;
    const double mu = hs.values[col];
    out.spectrum[k] = 1.0 / mu;

    std::vector<cplx> v(2 * n);
    for (std::size_t i = 0; i < 2 * n; ++i) v[i] = hs.vectors(i, col);
    // Fix the free phase so that the block of O is as close as possible to
    // the identity on the canonical axes.
    cplx z{};
    for (std::size_t m = 0; m < n; ++m) z += v[2 * m + 1] - cplx(0.0, 1.0) * v[2 * m];
    cplx phase{1.0, 0.0};
    if (std::abs(z) > 1e-8) {
      phase = std::conj(z) / std::abs(z);
    } else {
      std::size_t big = 0;
      for (std::size_t i = 1; i < 2 * n; ++i)
        if (std::abs(v[i]) > std::abs(v[big])) big = i;
      phase = std::conj(v[big]) / std::abs(v[big]);
    }
    for (std::size_t i = 0; i < 2 * n; ++i) {
      const cplx w = phase * v[i];
      o(i, 2 * k) = sqrt2 * w.imag();
      o(i, 2 * k + 1) = sqrt2 * w.real();
    }
  }
  std::vector<double> root_nu(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    root_nu[2 * k] = root_nu[2 * k + 1] = std::sqrt(out.spectrum[k]);
    out.d(2 * k, 2 * k) = out.d(2 * k + 1, 2 * k + 1) = out.spectrum[k];
  }
  out.s = inv_root * o * RealMatrix::diagonal(std::span<const double>(root_nu));
  return out;
}

/// Inverse of a symplectic matrix: S^-1 = -J S^T J.
inline RealMatrix symplectic_inverse(const RealMatrix& s) {
  const RealMatrix j = symplectic_form(detail::mode_count(s));
  return -1.0 * (j * s.transpose() * j);
}

/// Pure 2n-mode state whose first n modes carry the input state. The
/// purifying modes have covariance theta cm theta and the cross block is
/// C = J S (+)_k sqrt(nu_k^2 - 1) I2 S^-1 theta, which does not depend on the
/// freedom left in S.
inline GaussianState purify(const GaussianState& state) {
  const std::size_t n = state.n_modes;
  const RealMatrix& cm = state.cm;
  std::vector<double> theta(2 * n, 1.0);
  for (std::size_t k = 0; k < n; ++k) theta[2 * k + 1] = -1.0;

  RealMatrix c(2 * n, 2 * n);
  const auto spec = symplectic_spectrum(cm);
  const bool pure = std::all_of(spec.begin(), spec.end(), [](double v) { return v - 1.0 < 1e-12; });
  if (!pure) {
    const SymplecticDiag w = williamson(cm);
    std::vector<double> lifts(2 * n);
    for (std::size_t k = 0; k < n; ++k) {
      const double nu = w.spectrum[k];
      lifts[2 * k] = lifts[2 * k + 1] = std::sqrt(std::max(nu * nu - 1.0, 0.0));
    }
    c = symplectic_form(n) * w.s * RealMatrix::diagonal(std::span<const double>(lifts)) *
        symplectic_inverse(w.s);
    for (std::size_t i = 0; i < 2 * n; ++i)
      for (std::size_t j = 0; j < 2 * n; ++j) c(i, j) *= theta[j];
  }

  RealMatrix out(4 * n, 4 * n);
  out.set_block(0, 0, cm);
  out.set_block(0, 2 * n, c);
  out.set_block(2 * n, 0, c.transpose());
  RealMatrix mirrored = cm;
  for (std::size_t i = 0; i < 2 * n; ++i)
    for (std::size_t j = 0; j < 2 * n; ++j) mirrored(i, j) *= theta[i] * theta[j];
  out.set_block(2 * n, 2 * n, mirrored);

  std::vector<double> dv(4 * n, 0.0);
  std::copy(state.dv.begin(), state.dv.end(), dv.begin());
  return GaussianState(detail::symmetrized(out), std::move(dv));
}

/// Keeps the listed modes (in the given order) and traces out the rest.
inline GaussianState reduce(const GaussianState& state, const ModeSet& keep) {
  detail::check_modes(keep, state.n_modes);
  const std::size_t k = keep.size();
  RealMatrix cm(2 * k, 2 * k);
  std::vector<double> dv(2 * k);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t qa = 0; qa < 2; ++qa) {
      dv[2 * a + qa] = state.dv[2 * keep[a] + qa];
      for (std::size_t b = 0; b < k; ++b)
        for (std::size_t qb = 0; qb < 2; ++qb)
          cm(2 * a + qa, 2 * b + qb) = state.cm(2 * keep[a] + qa, 2 * keep[b] + qb);
    }
  }
  return GaussianState(std::move(cm), std::move(dv));
}

struct ConditionalGaussian {
  GaussianState state;          // unmeasured modes, in ascending mode order
  std::vector<double> outcome;  // measured X values, one per measured mode
};

/// Ideal X-homodyne on the listed modes. Only the X rows of the measured
/// block are live, so the Schur complement uses a pseudo-inverse:
///   cm_r = G_rr - G_rm (P G_mm P)^+ G_mr,
///   dv_r = d_r + G_rm (P G_mm P)^+ (outcome - d_m).
inline ConditionalGaussian condition_on_x(const GaussianState& state, const ModeSet& measured,
                                          std::span<const double> outcomes) {
  const std::size_t n = state.n_modes;
  detail::check_modes(measured, n);
  if (measured.empty() || measured.size() >= n)
    throw InvalidInput("condition_on_x: measured set must be non-empty and leave a mode unmeasured");
  if (outcomes.size() != measured.size())
    throw InvalidInput("condition_on_x: need exactly one outcome per measured mode");
  std::vector<bool> is_measured(n, false);
  for (std::size_t m : measured) {
    if (is_measured[m]) throw InvalidInput("condition_on_x: repeated mode");
    is_measured[m] = true;
  }

  std::vector<std::size_t> mi;
  std::vector<std::size_t> ri;
  for (std::size_t m : measured) {
    mi.push_back(2 * m);
    mi.push_back(2 * m + 1);
  }
  for (std::size_t m = 0; m < n; ++m) {
    if (is_measured[m]) continue;
    ri.push_back(2 * m);
    ri.push_back(2 * m + 1);
  }

  RealMatrix gmm(mi.size(), mi.size());
  for (std::size_t a = 0; a < mi.size(); a += 2)
    for (std::size_t b = 0; b < mi.size(); b += 2) gmm(a, b) = state.cm(mi[a], mi[b]);
  RealMatrix grm(ri.size(), mi.size());
  for (std::size_t a = 0; a < ri.size(); ++a)
    for (std::size_t b = 0; b < mi.size(); ++b) grm(a, b) = state.cm(ri[a], mi[b]);
  RealMatrix grr(ri.size(), ri.size());
  for (std::size_t a = 0; a < ri.size(); ++a)
    for (std::size_t b = 0; b < ri.size(); ++b) grr(a, b) = state.cm(ri[a], ri[b]);

  const RealMatrix gain = grm * pseudo_inverse(gmm);
  RealMatrix cm = detail::symmetrized(grr - gain * grm.transpose());

  std::vector<double> residual(mi.size(), 0.0);
  for (std::size_t k = 0; k < measured.size(); ++k)
    residual[2 * k] = outcomes[k] - state.dv[mi[2 * k]];
  const std::vector<double> shift = gain * residual;
  std::vector<double> dv(ri.size());
  for (std::size_t a = 0; a < ri.size(); ++a) dv[a] = state.dv[ri[a]] + shift[a];

  return {GaussianState(std::move(cm), std::move(dv)),
          std::vector<double>(outcomes.begin(), outcomes.end())};
}

inline ConditionalGaussian condition_on_x(const GaussianState& state, const ModeSet& measured,
                                          const std::vector<double>& outcomes) {
  return condition_on_x(state, measured, std::span<const double>(outcomes));
}

/// Phase of <psi(d1)|psi(d2)> for two displaced copies of one pure Gaussian
/// state, where psi(d)(x) = e^{i p.x} psi0(x - x_bar) in position
/// representation (translate first, then kick). Composition of Weyl
/// operators gives d1.J.d2 / 2; the x_bar.p_bar terms convert from the
/// symmetric Weyl ordering to the translate-then-kick wavefunction.
inline double overlap_phase(std::span<const double> d1, std::span<const double> d2) {
  double phase = 0.0;
  for (std::size_t k = 0; k + 1 < d1.size(); k += 2) {
    phase += d1[k] * d2[k + 1] - d1[k + 1] * d2[k];  // d1^T J d2
    phase += d2[k] * d2[k + 1] - d1[k] * d1[k + 1];
  }
  return 0.5 * phase;
}

/// log |<psi(d1)|psi(d2)>| = -(d2 - d1)^T cm^-1 (d2 - d1) / 4 for a pure cm.
inline double log_overlap_magnitude(const RealMatrix& cm, std::span<const double> d1,
                                    std::span<const double> d2) {
  const std::size_t n = detail::mode_count(cm);
  if (d1.size() != 2 * n || d2.size() != 2 * n) throw InvalidInput("pure_overlap: displacement length");
  if (!is_pure(cm, 1e-6)) throw InvalidInput("pure_overlap: covariance matrix is not pure");
  std::vector<double> delta(2 * n);
  for (std::size_t i = 0; i < 2 * n; ++i) delta[i] = d2[i] - d1[i];
  const std::vector<double> w = inverse_spd(cm) * std::span<const double>(delta);
  double q = 0.0;
  for (std::size_t i = 0; i < 2 * n; ++i) q += delta[i] * w[i];
  return -0.25 * q;
}

inline cplx pure_overlap(const RealMatrix& cm, std::span<const double> d1, std::span<const double> d2) {
  return std::polar(std::exp(log_overlap_magnitude(cm, d1, d2)), overlap_phase(d1, d2));
}

inline cplx pure_overlap(const RealMatrix& cm, const std::vector<double>& d1,
                         const std::vector<double>& d2) {
  return pure_overlap(cm, std::span<const double>(d1), std::span<const double>(d2));
}

/// Reorders a mode-major matrix (X1,P1,X2,P2,...) to (X1,X2,...,P1,P2,...).
inline RealMatrix to_xxpp(const RealMatrix& cm) {
  const std::size_t n = detail::mode_count(cm);
  auto idx = [n](std::size_t i) { return i < n ? 2 * i : 2 * (i - n) + 1; };
  RealMatrix out(2 * n, 2 * n);
  for (std::size_t i = 0; i < 2 * n; ++i)
    for (std::size_t j = 0; j < 2 * n; ++j) out(i, j) = cm(idx(i), idx(j));
  return out;
}

inline std::vector<double> to_xxpp(std::span<const double> v) {
  const std::size_t n = v.size() / 2;
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = v[2 * k];
    out[n + k] = v[2 * k + 1];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Two-mode symmetric family: gamma_A = gamma_B = lambda I, C = diag(c_x, -c_p).

struct SymmetricStateParams {
  double lambda = 1.0;
  double c_x = 0.0;
  double c_p = 0.0;
};

namespace detail {
inline void check_ordering(const SymmetricStateParams& p) {
  if (!(std::isfinite(p.lambda) && std::isfinite(p.c_x) && std::isfinite(p.c_p)))
    throw InvalidInput("symmetric parameters must be finite");
  if (!(p.lambda >= 0.0 && p.c_x >= p.c_p && p.c_p >= 0.0))
    throw InvalidInput("symmetric parameters need lambda >= 0 and c_x >= c_p >= 0");
}
}  // namespace detail

/// Closed-form uncertainty check; a rounding-level slack keeps states built
/// exactly on the pure boundary (c = sqrt(lambda^2 - 1)) physical.
inline bool physical_symmetric(const SymmetricStateParams& p) {
  detail::check_ordering(p);
  const double slack = 1e-12 * std::max(1.0, p.lambda * p.lambda);
  return p.lambda * p.lambda - p.c_x * p.c_p - 1.0 >= p.lambda * (p.c_x - p.c_p) - slack;
}

inline bool npt_symmetric(const SymmetricStateParams& p) {
  detail::check_ordering(p);
  return p.lambda * p.lambda + p.c_x * p.c_p - 1.0 < p.lambda * (p.c_x + p.c_p);
}

inline GaussianState symmetric_embed(const SymmetricStateParams& p) {
  if (!physical_symmetric(p)) throw InvalidInput("unphysical parameters");
  RealMatrix cm(4, 4);
  for (std::size_t i = 0; i < 4; ++i) cm(i, i) = p.lambda;
  cm(0, 2) = cm(2, 0) = p.c_x;
  cm(1, 3) = cm(3, 1) = -p.c_p;
  return GaussianState(std::move(cm));
}

}  // namespace gkd
