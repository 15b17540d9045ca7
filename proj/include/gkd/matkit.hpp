#pragma once

// Small dense numerics used throughout the library: matrices, a Jacobi
// Hermitian eigensolver, pseudo-inverse, a scan + golden-section scalar
// minimizer, a counter-based RNG and entropy helpers. Dimensions here are
// tiny (at most a few dozen), so everything is written for clarity and
// accuracy rather than cache behaviour.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "gkd/errors.hpp"

namespace gkd {

using cplx = std::complex<double>;

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};

template <class T>
constexpr T conj_of(const T& x) {
  if constexpr (is_complex<T>::value) {
    return std::conj(x);
  } else {
    return x;
  }
}

template <class T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
      throw InvalidInput("matrix entry count does not match its shape");
    }
  }
  Matrix(std::initializer_list<std::initializer_list<T>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) throw InvalidInput("ragged matrix initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }
  static Matrix diagonal(std::span<const T> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }
  static Matrix diagonal(std::initializer_list<T> d) {
    return diagonal(std::span<const T>(d.begin(), d.size()));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<T> entries() { return data_; }
  std::span<const T> entries() const { return data_; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }
  Matrix adjoint() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = conj_of((*this)(i, j));
    return t;
  }

  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    Matrix b(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
  }
  void set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
  }

  Matrix& operator+=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Matrix& operator*=(T s) {
    for (auto& x : data_) x *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, T s) { return a *= s; }
  friend Matrix operator*(T s, Matrix a) { return a *= s; }
  friend Matrix operator-(Matrix a) { return a *= T{-1}; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw InvalidInput("matrix product shape mismatch");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const T aik = a(i, k);
        if (aik == T{}) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend std::vector<T> operator*(const Matrix& a, std::span<const T> v) {
    if (a.cols_ != v.size()) throw InvalidInput("matrix-vector shape mismatch");
    std::vector<T> out(a.rows_, T{});
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t j = 0; j < a.cols_; ++j) out[i] += a(i, j) * v[j];
    return out;
  }
  friend std::vector<T> operator*(const Matrix& a, const std::vector<T>& v) {
    return a * std::span<const T>(v);
  }

 private:
  void check_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw InvalidInput("matrix shape mismatch");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<cplx>;

template <class T>
bool all_finite(const Matrix<T>& m) {
  return std::all_of(m.entries().begin(), m.entries().end(), [](const T& x) {
    if constexpr (is_complex<T>::value) {
      return std::isfinite(x.real()) && std::isfinite(x.imag());
    } else {
      return std::isfinite(x);
    }
  });
}

template <class T>
double max_abs(const Matrix<T>& m) {
  double r = 0.0;
  for (const auto& x : m.entries()) r = std::max(r, static_cast<double>(std::abs(x)));
  return r;
}

template <class T>
double max_abs_diff(const Matrix<T>& a, const Matrix<T>& b) {
  return max_abs(a - b);
}

template <class T>
double frobenius(const Matrix<T>& m) {
  double s = 0.0;
  for (const auto& x : m.entries()) s += std::norm(x);
  return std::sqrt(s);
}

inline ComplexMatrix to_complex(const RealMatrix& m) {
  ComplexMatrix c(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) c(i, j) = m(i, j);
  return c;
}

/// Complex matrix that is Hermitian by construction: the input is replaced by
/// (H + H†)/2, so any asymmetry below rounding level is removed.
class ComplexHermitian {
 public:
  explicit ComplexHermitian(const ComplexMatrix& h) : m_(h.rows(), h.cols()) {
    if (!h.square()) throw InvalidInput("Hermitian matrix must be square");
    for (std::size_t i = 0; i < h.rows(); ++i)
      for (std::size_t j = 0; j < h.cols(); ++j)
        m_(i, j) = 0.5 * (h(i, j) + std::conj(h(j, i)));
  }
  std::size_t dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }

 private:
  ComplexMatrix m_;
};

template <class T>
struct EigenSystem {
  std::vector<double> values;  // ascending
  Matrix<T> vectors;           // column k belongs to values[k]
};

/// Cyclic Jacobi eigensolver for real symmetric or complex Hermitian input.
/// Each rotation first removes the phase of the pivot, then applies the
/// classical real rotation; sweeps continue until the off-diagonal Frobenius
/// norm drops below 1e-14 relative to the matrix norm.
template <class T>
EigenSystem<T> eigh(const Matrix<T>& h) {
  if (!h.square()) throw InvalidInput("eigh: matrix must be square");
  if (h.rows() > 64) throw InvalidInput("eigh: dimension above 64");
  if (!all_finite(h)) throw InvalidInput("eigh: non-finite entries");

  const std::size_t n = h.rows();
  Matrix<T> a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (h(i, j) + conj_of(h(j, i)));
  Matrix<T> v = Matrix<T>::identity(n);

  const double scale = frobenius(a);
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < 100 && scale > 0.0; ++sweep) {
    if (off_norm() <= 1e-14 * scale) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const T g = a(p, q);
        const double ag = std::abs(g);
        if (ag == 0.0) continue;
        const double app = std::real(a(p, p));
        const double aqq = std::real(a(q, q));
        if (sweep > 3 && ag < 1e-18 * std::abs(app) && ag < 1e-18 * std::abs(aqq)) {
          a(p, q) = T{};
          a(q, p) = T{};
          continue;
        }
        const T e = g / ag;
        const T ebar = conj_of(e);
        const double theta = (aqq - app) / (2.0 * ag);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const T akp = a(k, p);
          const T akq = a(k, q);
          a(k, p) = c * akp - s * ebar * akq;
          a(k, q) = s * akp + c * ebar * akq;
          const T vkp = v(k, p);
          const T vkq = v(k, q);
          v(k, p) = c * vkp - s * ebar * vkq;
          v(k, q) = s * vkp + c * ebar * vkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const T apk = a(p, k);
          const T aqk = a(q, k);
          a(p, k) = c * apk - s * e * aqk;
          a(q, k) = s * apk + c * e * aqk;
        }
        a(p, q) = T{};
        a(q, p) = T{};
        a(p, p) = std::real(a(p, p));
        a(q, q) = std::real(a(q, q));
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return std::real(a(i, i)) < std::real(a(j, j));
  });
  EigenSystem<T> out{std::vector<double>(n), Matrix<T>(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = std::real(a(order[k], order[k]));
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

inline EigenSystem<cplx> eigh(const ComplexHermitian& h) { return eigh(h.matrix()); }

/// Moore-Penrose pseudo-inverse. Singular values below tol * sigma_max are
/// treated as zero. Computed from the symmetric eigenproblem of the augmented
/// matrix [[0, M], [M^T, 0]], whose eigenvalues are +/- the singular values,
/// so zero singular values come out at rounding level instead of its square
/// root.
inline RealMatrix pseudo_inverse(const RealMatrix& m, double tol = 1e-10) {
  if (!(tol > 0.0)) throw InvalidInput("pseudo_inverse: tol must be positive");
  if (!all_finite(m)) throw InvalidInput("pseudo_inverse: non-finite entries");
  const std::size_t r = m.rows();
  const std::size_t c = m.cols();
  RealMatrix aug(r + c, r + c);
  aug.set_block(0, r, m);
  aug.set_block(r, 0, m.transpose());
  const auto es = eigh(aug);

  RealMatrix pinv(c, r);
  const double sigma_max = es.values.empty() ? 0.0 : es.values.back();
  if (sigma_max <= 0.0) return pinv;
  for (std::size_t k = 0; k < es.values.size(); ++k) {
    const double sigma = es.values[k];
    if (sigma <= tol * sigma_max) continue;
    // (u; v) / sqrt(2) with M v = sigma u.
    for (std::size_t i = 0; i < c; ++i)
      for (std::size_t j = 0; j < r; ++j)
        pinv(i, j) += 2.0 * es.vectors(r + i, k) * es.vectors(j, k) / sigma;
  }
  return pinv;
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
inline RealMatrix cholesky(const RealMatrix& a) {
  if (!a.square()) throw InvalidInput("cholesky: matrix must be square");
  const std::size_t n = a.rows();
  RealMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) throw IllConditioned("cholesky: matrix is not positive definite");
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

inline RealMatrix inverse_spd(const RealMatrix& a) {
  const RealMatrix l = cholesky(a);
  const std::size_t n = a.rows();
  RealMatrix inv(n, n);
  std::vector<double> y(n);
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = (i == col) ? 1.0 : 0.0;
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
      y[i] = s / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * inv(k, col);
      inv(ii, col) = s / l(ii, ii);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) inv(i, j) = inv(j, i) = 0.5 * (inv(i, j) + inv(j, i));
  return inv;
}

inline double log_det_spd(const RealMatrix& a) {
  const RealMatrix l = cholesky(a);
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) s += std::log(l(i, i));
  return 2.0 * s;
}

/// f(x) evaluated at a real symmetric matrix through its spectrum.
template <class F>
RealMatrix spectral_function(const RealMatrix& sym, F&& f) {
  const auto es = eigh(sym);
  const std::size_t n = sym.rows();
  RealMatrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double fk = f(es.values[k]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out(i, j) += es.vectors(i, k) * fk * es.vectors(j, k);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scalar minimization

struct ScalarMin {
  double x;
  double fx;
};

/// Minimizes f on [lo, hi]: a 64-point scan locates the best basin, then
/// golden-section search refines inside the bracket formed by its neighbours.
template <class F>
ScalarMin minimize_scalar(F&& f, double lo, double hi, double tol = 1e-8) {
  if (!(lo < hi)) throw InvalidInput("minimize_scalar: need lo < hi");
  if (!(tol > 0.0)) throw InvalidInput("minimize_scalar: tol must be positive");

  auto eval = [&](double x) {
    const double v = f(x);
    if (!std::isfinite(v)) throw EvaluationError("minimize_scalar: non-finite objective", x);
    return v;
  };

  constexpr int kScan = 64;
  const double step = (hi - lo) / (kScan - 1);
  ScalarMin best{lo, eval(lo)};
  int best_i = 0;
  for (int i = 1; i < kScan; ++i) {
    const double x = (i == kScan - 1) ? hi : lo + i * step;
    const double v = eval(x);
    if (v < best.fx) {
      best = {x, v};
      best_i = i;
    }
  }

  double a = (best_i == 0) ? lo : lo + (best_i - 1) * step;
  double b = (best_i == kScan - 1) ? hi : lo + (best_i + 1) * step;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = eval(d);
    }
  }
  const double mid = 0.5 * (a + b);
  for (ScalarMin cand : {ScalarMin{c, fc}, ScalarMin{d, fd}, ScalarMin{mid, eval(mid)}}) {
    if (cand.fx < best.fx) best = cand;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Random numbers

/// Counter-based generator: output k of stream s is a fixed mixing function of
/// (seed, s * 2^40 + k). Streams are therefore disjoint by construction and a
/// chunk of work seeded with its own stream index gives the same numbers no
/// matter which thread runs it.
class Rng {
 public:
  static constexpr std::uint64_t kStreamStride = std::uint64_t{1} << 40;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), key_(mix(seed ^ 0x6a09e667f3bcc909ULL)), base_(stream * kStreamStride) {
    if (stream >= (std::uint64_t{1} << 24)) throw InvalidInput("Rng: stream index too large");
  }

  Rng stream(std::uint64_t s) const { return Rng(seed_, s); }
  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return mix(key_ + (base_ + counter_++) * 0x9e3779b97f4a7c15ULL); }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  int bit() { return static_cast<int>(next_u64() >> 63); }

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double phi = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Zero-mean multivariate normal sampler using the spectral square root of
/// the covariance (works for singular covariances).
class MvnSampler {
 public:
  explicit MvnSampler(const RealMatrix& cov) : root_(cov.rows(), cov.cols()) {
    if (!cov.square()) throw InvalidInput("sample_mvn: covariance must be square");
    if (max_abs_diff(cov, cov.transpose()) > 1e-10 * (1.0 + max_abs(cov)))
      throw InvalidInput("sample_mvn: covariance is not symmetric");
    const auto es = eigh(cov);
    const std::size_t n = cov.rows();
    for (std::size_t k = 0; k < n; ++k) {
      if (es.values[k] < -1e-8) throw NotPSD("sample_mvn: covariance has a negative eigenvalue");
      const double s = std::sqrt(std::max(es.values[k], 0.0));
      for (std::size_t i = 0; i < n; ++i) root_(i, k) = es.vectors(i, k) * s;
    }
    z_.resize(n);
  }

  std::size_t dim() const { return root_.rows(); }

  void draw(Rng& rng, std::span<double> out) {
    const std::size_t n = dim();
    for (auto& z : z_) z = rng.normal();
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += root_(i, k) * z_[k];
      out[i] = s;
    }
  }

 private:
  RealMatrix root_;
  std::vector<double> z_;
};

inline std::vector<std::vector<double>> sample_mvn(const RealMatrix& cov, std::size_t n, Rng& rng) {
  MvnSampler sampler(cov);
  std::vector<std::vector<double>> out(n, std::vector<double>(cov.rows()));
  for (auto& s : out) sampler.draw(rng, s);
  return out;
}

// ---------------------------------------------------------------------------
// Entropies (bits)

inline double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("binary_entropy: p outside [0, 1]");
  auto term = [](double q) { return q > 0.0 ? -q * std::log2(q) : 0.0; };
  return term(p) + term(1.0 - p);
}

/// Von Neumann entropy of a spectrum; eigenvalues at or below zero (rounding
/// noise of a PSD matrix) contribute nothing.
inline double von_neumann_entropy(std::span<const double> eigenvalues) {
  double s = 0.0;
  for (double v : eigenvalues)
    if (v > 0.0) s -= v * std::log2(v);
  return s;
}

}  // namespace gkd
