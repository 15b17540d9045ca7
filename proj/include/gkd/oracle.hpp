#pragma once

// Brute-force reference for pure Gaussian states: explicit complex
// wavefunctions on a position grid (up to four modes), with overlaps,
// conditioning, moments and postselected reduced states computed by direct
// summation. Depends on matkit only, so nothing here reuses the closed-form
// covariance-matrix calculus it is meant to check.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "gkd/errors.hpp"
#include "gkd/matkit.hpp"

namespace gkd::oracle {

/// Uniform axis symmetric about zero with an odd number of nodes, so that 0
/// and every node's mirror image are nodes.
struct GridAxis {
  double min = -8.0;
  double max = 8.0;
  std::size_t points = 201;

  static GridAxis symmetric(double half_width, std::size_t points) { return {-half_width, half_width, points}; }

  void validate() const {
    if (points < 3 || points % 2 == 0) throw InvalidInput("grid needs an odd number (>= 3) of points");
    if (!(max > 0.0) || std::abs(min + max) > 1e-12 * max) throw InvalidInput("grid must be symmetric about 0");
  }
  double step() const { return (max - min) / double(points - 1); }
  std::size_t center() const { return points / 2; }
  double node(std::size_t i) const { return (double(i) - double(center())) * step(); }

  friend bool operator==(const GridAxis&, const GridAxis&) = default;
};

struct GridWavefunction {
  std::size_t n_modes = 0;
  GridAxis axis;
  std::vector<cplx> amplitudes;  // row-major, mode 0 slowest

  std::size_t stride(std::size_t mode) const {
    std::size_t s = 1;
    for (std::size_t k = mode + 1; k < n_modes; ++k) s *= axis.points;
    return s;
  }
  double cell() const { return std::pow(axis.step(), double(n_modes)); }
};

/// Deterministic pairwise summation of term(0) + ... + term(n-1).
template <class T, class F>
T pairwise_sum(std::size_t begin, std::size_t end, F&& term) {
  if (end - begin <= 16) {
    T s{};
    for (std::size_t i = begin; i < end; ++i) s += term(i);
    return s;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  return pairwise_sum<T>(begin, mid, term) + pairwise_sum<T>(mid, end, term);
}

namespace detail {

inline std::size_t total_points(std::size_t n_modes, std::size_t points) {
  std::size_t t = 1;
  for (std::size_t k = 0; k < n_modes; ++k) t *= points;
  return t;
}

inline void unravel(std::size_t flat, std::size_t n_modes, std::size_t points, std::vector<std::size_t>& idx) {
  idx.resize(n_modes);
  for (std::size_t k = n_modes; k-- > 0;) {
    idx[k] = flat % points;
    flat /= points;
  }
}

}  // namespace detail

/// Position wavefunction of the pure Gaussian state with covariance `cm`
/// (mode-major, vacuum = identity) and displacement `dv`:
///   psi(x) = N exp(-(x - xbar)^T (U + iV) (x - xbar) / 2 + i pbar.x).
/// With the blocks cm_xx = A, cm_xp = B, cm_pp = D of a pure state one has
/// U = A^-1, V = -U B and D = U + V A V.
inline GridWavefunction wavefunction_from_pure(const RealMatrix& cm, const std::vector<double>& dv,
                                               const GridAxis& axis) {
  axis.validate();
  if (!cm.square() || cm.rows() % 2 != 0 || cm.rows() == 0) throw InvalidInput("oracle: bad covariance shape");
  const std::size_t n = cm.rows() / 2;
  if (n > 4) throw InvalidInput("oracle: at most four modes");
  if (dv.size() != 2 * n) throw InvalidInput("oracle: displacement length must be 2n");

  RealMatrix a(n, n), b(n, n), d(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      a(i, j) = cm(2 * i, 2 * j);
      b(i, j) = cm(2 * i, 2 * j + 1);
      d(i, j) = cm(2 * i + 1, 2 * j + 1);
    }
  RealMatrix u;
  try {
    u = inverse_spd(a);
  } catch (const IllConditioned&) {
    throw InvalidInput("oracle: position block is singular");
  }
  RealMatrix v = -1.0 * (u * b);
  const double scale = 1.0 + max_abs(cm);
  if (max_abs_diff(v, v.transpose()) > 1e-6 * scale || max_abs_diff(d, u + v * a * v) > 1e-6 * scale)
    throw InvalidInput("oracle: covariance matrix is not pure");
  v = 0.5 * (v + v.transpose());

  for (std::size_t k = 0; k < n; ++k) {
    const double sigma = std::sqrt(a(k, k) / 2.0);
    if (dv[2 * k] - 6.0 * sigma < axis.min || dv[2 * k] + 6.0 * sigma > axis.max)
      throw GridTooSmall("oracle: grid spans fewer than 6 standard deviations of an X marginal");
  }

  const double norm = std::exp(0.25 * log_det_spd(u)) * std::pow(std::numbers::pi, -0.25 * double(n));
  GridWavefunction psi{n, axis, std::vector<cplx>(detail::total_points(n, axis.points))};
  std::vector<std::size_t> idx;
  std::vector<double> x(n), y(n);
  for (std::size_t flat = 0; flat < psi.amplitudes.size(); ++flat) {
    detail::unravel(flat, n, axis.points, idx);
    double kick = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = axis.node(idx[k]);
      y[k] = x[k] - dv[2 * k];
      kick += dv[2 * k + 1] * x[k];
    }
    double qu = 0.0, qv = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        qu += y[i] * u(i, j) * y[j];
        qv += y[i] * v(i, j) * y[j];
      }
    psi.amplitudes[flat] = norm * std::exp(cplx(-0.5 * qu, -0.5 * qv + kick));
  }
  return psi;
}

inline cplx grid_overlap(const GridWavefunction& a, const GridWavefunction& b) {
  if (a.n_modes != b.n_modes || !(a.axis == b.axis) || a.amplitudes.size() != b.amplitudes.size())
    throw InvalidInput("grid_overlap: grids differ");
  const cplx s = pairwise_sum<cplx>(0, a.amplitudes.size(),
                                    [&](std::size_t i) { return std::conj(a.amplitudes[i]) * b.amplitudes[i]; });
  return s * a.cell();
}

inline double grid_norm(const GridWavefunction& a) {
  return pairwise_sum<double>(0, a.amplitudes.size(), [&](std::size_t i) { return std::norm(a.amplitudes[i]); }) *
         a.cell();
}

namespace detail {

inline std::size_t node_index(const GridAxis& axis, double x, bool& snapped) {
  const double k = std::round(x / axis.step()) + double(axis.center());
  if (k < 0.0 || k > double(axis.points - 1)) throw InvalidInput("oracle: outcome lies outside the grid");
  const auto i = static_cast<std::size_t>(k);
  if (std::abs(axis.node(i) - x) > 1e-9 * axis.step()) snapped = true;
  return i;
}

/// Unnormalized amplitudes of the remaining modes with the listed modes
/// pinned to the given node indices.
inline std::vector<cplx> slice(const GridWavefunction& psi, const std::vector<std::size_t>& modes,
                               const std::vector<std::size_t>& nodes) {
  std::vector<bool> pinned(psi.n_modes, false);
  std::size_t offset = 0;
  for (std::size_t t = 0; t < modes.size(); ++t) {
    pinned[modes[t]] = true;
    offset += nodes[t] * psi.stride(modes[t]);
  }
  std::vector<std::size_t> free_modes;
  for (std::size_t k = 0; k < psi.n_modes; ++k)
    if (!pinned[k]) free_modes.push_back(k);
  std::vector<cplx> out(total_points(free_modes.size(), psi.axis.points));
  std::vector<std::size_t> idx;
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    unravel(flat, free_modes.size(), psi.axis.points, idx);
    std::size_t full = offset;
    for (std::size_t t = 0; t < free_modes.size(); ++t) full += idx[t] * psi.stride(free_modes[t]);
    out[flat] = psi.amplitudes[full];
  }
  return out;
}

inline void check_measured(const GridWavefunction& psi, const std::vector<std::size_t>& modes) {
  std::vector<bool> seen(psi.n_modes, false);
  for (std::size_t m : modes) {
    if (m >= psi.n_modes || seen[m]) throw InvalidInput("oracle: bad measured mode list");
    seen[m] = true;
  }
  if (modes.empty() || modes.size() >= psi.n_modes)
    throw InvalidInput("oracle: measured set must be non-empty and leave a mode free");
}

}  // namespace detail

struct GridConditional {
  GridWavefunction psi;           // normalized state of the unmeasured modes
  std::vector<double> outcomes;   // grid nodes actually used
  bool snapped = false;           // true if an outcome was moved to the nearest node
};

/// Ideal X measurement by slicing: psi(x_m = outcome, x_r), renormalized.
inline GridConditional grid_condition_on_x(const GridWavefunction& psi, const std::vector<std::size_t>& measured,
                                           const std::vector<double>& outcomes) {
  detail::check_measured(psi, measured);
  if (outcomes.size() != measured.size()) throw InvalidInput("oracle: one outcome per measured mode");
  GridConditional out;
  std::vector<std::size_t> nodes;
  for (double x : outcomes) {
    nodes.push_back(detail::node_index(psi.axis, x, out.snapped));
    out.outcomes.push_back(psi.axis.node(nodes.back()));
  }
  out.psi = {psi.n_modes - measured.size(), psi.axis, detail::slice(psi, measured, nodes)};
  const double norm2 = grid_norm(out.psi);
  if (norm2 < 1e-12) throw OutcomeUnlikely("oracle: conditional slice has negligible norm");
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& amp : out.psi.amplitudes) amp *= inv;
  return out;
}

namespace detail {

/// -i d/dx_k applied along one axis by trigonometric interpolation over the
/// grid nodes (spectral differentiation).
inline std::vector<cplx> apply_momentum(const GridWavefunction& psi, std::size_t mode) {
  const std::size_t n_pts = psi.axis.points;
  const double h = psi.axis.step();
  const double length = h * double(n_pts);
  const long half = static_cast<long>(n_pts / 2);
  // kernel(j - l) = (1/N) sum_m kappa_m exp(i kappa_m (j - l) h)
  std::vector<cplx> kernel(2 * n_pts - 1);
  for (long diff = -long(n_pts) + 1; diff < long(n_pts); ++diff) {
    double s = 0.0;
    for (long m = 1; m <= half; ++m) {
      const double kappa = 2.0 * std::numbers::pi * double(m) / length;
      s += 2.0 * kappa * std::sin(kappa * double(diff) * h);
    }
    kernel[static_cast<std::size_t>(diff + long(n_pts) - 1)] = cplx(0.0, s / double(n_pts));
  }

  const std::size_t stride = psi.stride(mode);
  std::vector<cplx> out(psi.amplitudes.size());
  for (std::size_t flat = 0; flat < psi.amplitudes.size(); ++flat) {
    const std::size_t j = (flat / stride) % n_pts;
    const std::size_t base = flat - j * stride;
    cplx s{};
    for (std::size_t l = 0; l < n_pts; ++l)
      s += kernel[j + n_pts - 1 - l] * psi.amplitudes[base + l * stride];
    out[flat] = s;  // d/dx has kernel i * kernel, so P = -i d/dx has kernel `kernel`
  }
  return out;
}

}  // namespace detail

struct GridMoments {
  RealMatrix cm;           // mode-major, vacuum = identity
  std::vector<double> dv;
};

/// First and symmetrized second moments of the quadratures, by direct
/// summation on the grid.
inline GridMoments grid_moments(const GridWavefunction& psi) {
  const std::size_t n = psi.n_modes;
  const std::size_t total = psi.amplitudes.size();
  std::vector<std::vector<cplx>> p_psi;
  for (std::size_t k = 0; k < n; ++k) p_psi.push_back(detail::apply_momentum(psi, k));

  std::vector<std::vector<double>> coords(n, std::vector<double>(total));
  std::vector<std::size_t> idx;
  for (std::size_t flat = 0; flat < total; ++flat) {
    detail::unravel(flat, n, psi.axis.points, idx);
    for (std::size_t k = 0; k < n; ++k) coords[k][flat] = psi.axis.node(idx[k]);
  }
  const auto& amp = psi.amplitudes;
  auto sum = [&](auto&& term) { return pairwise_sum<double>(0, total, term); };

  const double norm = sum([&](std::size_t i) { return std::norm(amp[i]); });
  std::vector<double> mx(n), mp(n);
  for (std::size_t k = 0; k < n; ++k) {
    mx[k] = sum([&](std::size_t i) { return std::norm(amp[i]) * coords[k][i]; }) / norm;
    mp[k] = sum([&](std::size_t i) { return (std::conj(amp[i]) * p_psi[k][i]).real(); }) / norm;
  }
  GridMoments out{RealMatrix(2 * n, 2 * n), std::vector<double>(2 * n)};
  for (std::size_t j = 0; j < n; ++j) {
    out.dv[2 * j] = mx[j];
    out.dv[2 * j + 1] = mp[j];
    for (std::size_t k = 0; k < n; ++k) {
      const double xx = sum([&](std::size_t i) { return std::norm(amp[i]) * coords[j][i] * coords[k][i]; }) / norm;
      const double xp =
          sum([&](std::size_t i) { return (std::conj(amp[i]) * coords[j][i] * p_psi[k][i]).real(); }) / norm;
      const double pp = sum([&](std::size_t i) { return (std::conj(p_psi[j][i]) * p_psi[k][i]).real(); }) / norm;
      out.cm(2 * j, 2 * k) = 2.0 * (xx - mx[j] * mx[k]);
      out.cm(2 * j, 2 * k + 1) = 2.0 * (xp - mx[j] * mp[k]);
      out.cm(2 * k + 1, 2 * j) = out.cm(2 * j, 2 * k + 1);
      out.cm(2 * j + 1, 2 * k + 1) = 2.0 * (pp - mp[j] * mp[k]);
    }
  }
  return out;
}

struct GridSectorState {
  ComplexMatrix rho;                // basis |++>, |+->, |-+>, |-->
  std::vector<double> eigenvalues;  // ascending
  bool snapped = false;
};

/// Reduced state of the two sign bits after postselecting |x_a|, |x_b| within
/// `window` of x0 on the two measured modes. For each accepted pair of
/// magnitudes the slices psi(+-u, +-v, .) are the unnormalized conditional
/// states of the rest; their Gram matrix, summed over accepted magnitudes and
/// normalized, is the sign-bit density matrix.
inline GridSectorState grid_reduced_spectrum(const GridWavefunction& psi, const std::vector<std::size_t>& measured,
                                             double x0, double window = 0.0) {
  detail::check_measured(psi, measured);
  if (measured.size() != 2) throw InvalidInput("oracle: sign sectors need exactly two measured modes");
  if (!(x0 > 0.0) || !(window >= 0.0)) throw InvalidInput("oracle: need x0 > 0 and window >= 0");

  GridSectorState out;
  const GridAxis& axis = psi.axis;
  const std::size_t centre_node = detail::node_index(axis, x0, out.snapped);
  std::vector<std::size_t> accepted;
  for (std::size_t i = axis.center() + 1; i < axis.points; ++i)
    if (std::abs(axis.node(i) - axis.node(centre_node)) <= window + 1e-12 * axis.step()) accepted.push_back(i);

  const std::size_t mirror = 2 * axis.center();
  const double cell = std::pow(axis.step(), double(psi.n_modes - 2));
  ComplexMatrix rho(4, 4);
  for (std::size_t ua : accepted) {
    for (std::size_t ub : accepted) {
      std::vector<std::vector<cplx>> slices;
      for (std::size_t s = 0; s < 4; ++s) {
        const std::size_t na = (s & 2) ? mirror - ua : ua;
        const std::size_t nb = (s & 1) ? mirror - ub : ub;
        slices.push_back(detail::slice(psi, measured, {na, nb}));
      }
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t k = 0; k < 4; ++k)
          rho(i, k) += cell * pairwise_sum<cplx>(0, slices[i].size(), [&](std::size_t t) {
                         return std::conj(slices[k][t]) * slices[i][t];
                       });
    }
  }
  double trace = 0.0;
  for (std::size_t i = 0; i < 4; ++i) trace += rho(i, i).real();
  if (trace < 1e-12) throw OutcomeUnlikely("oracle: postselection sectors have negligible weight");
  rho *= cplx(1.0 / trace);
  out.rho = ComplexHermitian(rho).matrix();
  out.eigenvalues = eigh(ComplexHermitian(out.rho)).values;
  return out;
}

}  // namespace gkd::oracle
