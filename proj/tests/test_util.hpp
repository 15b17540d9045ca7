#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "gkd/gaussian.hpp"
#include "gkd/matkit.hpp"

namespace gkd::testing {

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

inline RealMatrix random_real(std::size_t r, std::size_t c, Rng& rng) {
  RealMatrix m(r, c);
  for (auto& x : m.entries()) x = rng.normal();
  return m;
}

inline ComplexMatrix random_hermitian(std::size_t n, Rng& rng) {
  ComplexMatrix h(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    h(i, i) = rng.normal();
    for (std::size_t j = i + 1; j < n; ++j) {
      h(i, j) = cplx(rng.normal(), rng.normal());
      h(j, i) = std::conj(h(i, j));
    }
  }
  return h;
}

/// Random symplectic matrix (mode-major) from rotations, squeezers and
/// beam splitters.
inline RealMatrix random_symplectic(std::size_t n, Rng& rng) {
  RealMatrix s = RealMatrix::identity(2 * n);
  for (std::size_t round = 0; round < 3 * n; ++round) {
    const std::size_t k = std::size_t(rng.uniform() * double(n)) % n;
    RealMatrix g = RealMatrix::identity(2 * n);
    const double th = uniform(rng, 0.0, 6.283185307179586);
    g(2 * k, 2 * k) = std::cos(th);
    g(2 * k, 2 * k + 1) = -std::sin(th);
    g(2 * k + 1, 2 * k) = std::sin(th);
    g(2 * k + 1, 2 * k + 1) = std::cos(th);
    s = g * s;
    RealMatrix sq = RealMatrix::identity(2 * n);
    const double r = uniform(rng, -0.6, 0.6);
    sq(2 * k, 2 * k) = std::exp(r);
    sq(2 * k + 1, 2 * k + 1) = std::exp(-r);
    s = sq * s;
    if (n > 1) {
      const std::size_t l = (k + 1 + std::size_t(rng.uniform() * double(n - 1)) % (n - 1)) % n;
      RealMatrix bs = RealMatrix::identity(2 * n);
      const double phi = uniform(rng, 0.0, 1.5707963267948966);
      for (std::size_t q = 0; q < 2; ++q) {
        bs(2 * k + q, 2 * k + q) = std::cos(phi);
        bs(2 * k + q, 2 * l + q) = std::sin(phi);
        bs(2 * l + q, 2 * k + q) = -std::sin(phi);
        bs(2 * l + q, 2 * l + q) = std::cos(phi);
      }
      s = bs * s;
    }
  }
  return s;
}

/// Random physical covariance matrix with symplectic eigenvalues in [1, 3).
inline RealMatrix random_physical_cm(std::size_t n, Rng& rng, bool pure = false) {
  const RealMatrix s = random_symplectic(n, rng);
  RealMatrix d = RealMatrix::identity(2 * n);
  if (!pure) {
    for (std::size_t k = 0; k < n; ++k) {
      const double nu = uniform(rng, 1.0, 3.0);
      d(2 * k, 2 * k) = nu;
      d(2 * k + 1, 2 * k + 1) = nu;
    }
  }
  const RealMatrix cm = s * d * s.transpose();
  return 0.5 * (cm + cm.transpose());
}

/// Rejection sampler over lambda in [lo, hi], c_p <= c_x < lambda.
inline SymmetricStateParams random_physical_params(Rng& rng, double lo = 1.0, double hi = 4.0) {
  for (;;) {
    const double lambda = uniform(rng, lo, hi);
    const double cx = uniform(rng, 0.0, lambda);
    const double cp = uniform(rng, 0.0, cx);
    const SymmetricStateParams p{lambda, cx, cp};
    if (physical_symmetric(p)) return p;
  }
}

inline double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace gkd::testing
