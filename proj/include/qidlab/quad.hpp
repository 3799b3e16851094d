#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "qidlab/base.hpp"

namespace qidlab {

// ---------------------------------------------------------------------------
// Small complex helpers
// ---------------------------------------------------------------------------

/// (e^u - 1) / u, stable near u = 0.
inline cdouble phi1(cdouble u) {
  if (std::abs(u) < 1e-3) {
    // series 1 + u/2 + u^2/6 + u^3/24 + u^4/120
    return 1.0 + u * (0.5 + u * (1.0 / 6.0 + u * (1.0 / 24.0 + u / 120.0)));
  }
  return (std::exp(u) - 1.0) / u;
}

/// (e^u - 1 - u) / u^2, stable near u = 0.
inline cdouble phi2(cdouble u) {
  if (std::abs(u) < 1e-3) {
    return 0.5 + u * (1.0 / 6.0 + u * (1.0 / 24.0 + u * (1.0 / 120.0 + u / 720.0)));
  }
  return (std::exp(u) - 1.0 - u) / (u * u);
}

/// Integer power of a complex number.
inline cdouble ipow(cdouble w, int m) {
  if (m < 0) return 1.0 / ipow(w, -m);
  cdouble acc = 1.0, base = w;
  for (int e = m; e > 0; e >>= 1) {
    if (e & 1) acc *= base;
    base *= base;
  }
  return acc;
}

/// E1(x) = int_x^inf e^{-t}/t dt for x > 0.
inline double exp_integral_e1(double x) {
  if (!(x > 0.0)) fail(ErrorKind::input, "exp_integral_e1 requires x > 0");
  return -std::expint(-x);
}

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature
// ---------------------------------------------------------------------------

namespace detail {

template <typename F, typename R>
R simpson_rec(const F& f, double a, double m, double b, R fa, R fm, R fb, R whole,
              double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  R flm = f(lm), frm = f(rm);
  R left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  R right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  R delta = left + right - whole;
  double err = std::abs(delta);
  // propagate overflow/NaN instead of refining into it
  if (depth <= 0 || err <= 15.0 * tol || !std::isfinite(err)) {
    return left + right + delta / 15.0;
  }
  return simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson on [a, b]; works for double or complex integrands.
template <typename F>
auto integrate(const F& f, double a, double b, double tol = 1e-10, int depth = 48)
    -> decltype(f(a)) {
  using R = decltype(f(a));
  if (a == b) return R{};
  double m = 0.5 * (a + b);
  R fa = f(a), fm = f(m), fb = f(b);
  R whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, depth);
}

// ---------------------------------------------------------------------------
// Tail integration over dyadic shells with divergence detection
// ---------------------------------------------------------------------------

enum class TailVerdict { finite, infinite, inconclusive };

struct TailIntegral {
  TailVerdict verdict = TailVerdict::finite;
  double value = 0.0;       ///< quadrature value up to the horizon (+ tail bound)
  double tail_bound = 0.0;  ///< geometric estimate of the remainder
  double horizon = 0.0;
};

/// Integrates f >= 0 over [a, infinity) by dyadic shells [a·2^k, a·2^{k+1}].
/// Declares "infinite" when shell masses stop decaying before the horizon,
/// "inconclusive" when they decay too slowly to extrapolate.
template <typename F>
TailIntegral integrate_tail(const F& f, double a, double horizon, double tol = 1e-10) {
  TailIntegral out;
  out.horizon = horizon;
  if (a <= 0.0) fail(ErrorKind::input, "integrate_tail requires a > 0");
  // the verdict regresses the dyadic shell masses at the horizon: interior
  // humps (polynomial weights against light tails) are allowed to grow first
  std::vector<double> shells;
  double lo = a, total = 0.0;
  while (lo < horizon) {
    double hi = std::min(2.0 * lo, horizon);
    double shell = integrate(f, lo, hi, tol);
    if (!std::isfinite(shell)) {
      out.verdict = TailVerdict::infinite;
      out.value = total;
      return out;
    }
    shells.push_back(shell);
    total += shell;
    lo = hi;
  }
  out.value = total;
  double last = shells.empty() ? 0.0 : shells.back();
  if (last <= 64.0 * tol) {
    out.tail_bound = last;  // negligible remainder at the horizon
    out.value += out.tail_bound;
    return out;
  }
  double ratio = shells.size() >= 2 ? last / std::max(shells[shells.size() - 2], tol)
                                    : 1.0;
  if (ratio < 0.9) {
    out.tail_bound = last * ratio / (1.0 - ratio);
  } else if (ratio > 1.0001) {
    out.verdict = TailVerdict::infinite;
  } else {
    out.verdict = TailVerdict::inconclusive;
    out.tail_bound = last;
  }
  out.value += out.tail_bound;
  return out;
}

// ---------------------------------------------------------------------------
// Piecewise-linear Fourier transform (exact per segment)
// ---------------------------------------------------------------------------

/// Exact int_{x0}^{x1} (v0 + s (x - x0)) e^{izx} dx for the linear segment.
inline cdouble segment_fourier(double x0, double x1, double v0, double v1, double z) {
  double dx = x1 - x0;
  cdouble u(0.0, z * dx);
  cdouble e0 = std::exp(cdouble(0.0, z * x0));
  return e0 * dx * (v0 * phi1(u) + (v1 - v0) * phi2(u));
}

/// Transform of the piecewise-linear interpolant through (xs, vs).
inline cdouble pl_transform(std::span<const double> xs, std::span<const double> vs,
                            double z) {
  cdouble acc = 0.0;
  for (std::size_t j = 0; j + 1 < xs.size(); ++j)
    acc += segment_fourier(xs[j], xs[j + 1], vs[j], vs[j + 1], z);
  return acc;
}

inline double trapezoid(std::span<const double> xs, std::span<const double> vs) {
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < xs.size(); ++j)
    acc += 0.5 * (vs[j] + vs[j + 1]) * (xs[j + 1] - xs[j]);
  return acc;
}

// ---------------------------------------------------------------------------
// Uniform sample grids (trapezoid transform convention)
// ---------------------------------------------------------------------------

/// Real function sampled on a uniform grid x_j = x0 + j·dx.  The transform
/// convention is the trapezoid sum dx·Σ w_j v_j e^{izx_j}; it is alias-free
/// for |z| below pi/dx minus the spectral extent of the samples.
struct UniformGrid {
  double x0 = 0.0;
  double dx = 1.0;
  std::vector<double> v;

  std::size_t size() const { return v.size(); }
  double x(std::size_t j) const { return x0 + static_cast<double>(j) * dx; }
  double back_x() const { return v.empty() ? x0 : x(v.size() - 1); }

  double integral() const {
    if (v.size() < 2) return 0.0;
    double s = 0.5 * (v.front() + v.back());
    for (std::size_t j = 1; j + 1 < v.size(); ++j) s += v[j];
    return s * dx;
  }

  double abs_integral() const {
    if (v.size() < 2) return 0.0;
    double s = 0.5 * (std::abs(v.front()) + std::abs(v.back()));
    for (std::size_t j = 1; j + 1 < v.size(); ++j) s += std::abs(v[j]);
    return s * dx;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }

  /// Linear interpolation; zero outside the grid.
  double value(double x) const {
    if (v.size() < 2) return 0.0;
    double t = (x - x0) / dx;
    if (t <= 0.0 || t >= static_cast<double>(v.size() - 1)) return 0.0;
    std::size_t j = static_cast<std::size_t>(t);
    double w = t - static_cast<double>(j);
    return v[j] * (1.0 - w) + v[j + 1] * w;
  }

  /// dx·Σ w_j v_j e^{izx_j} with trapezoid end weights (rotor recurrence).
  cdouble transform(double z) const {
    if (v.empty()) return 0.0;
    if (v.size() == 1) return 0.0;
    cdouble rot = std::exp(cdouble(0.0, z * x0));
    cdouble step = std::exp(cdouble(0.0, z * dx));
    cdouble acc = 0.0;
    std::size_t n = v.size();
    for (std::size_t j = 0; j < n; ++j) {
      double w = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
      acc += w * v[j] * rot;
      rot *= step;
      if ((j & 4095u) == 4095u)  // rotor resync against drift
        rot = std::exp(cdouble(0.0, z * x(j + 1)));
    }
    return acc * dx;
  }
};

// ---------------------------------------------------------------------------
// Radix-2 FFT (power-of-two sizes)
// ---------------------------------------------------------------------------

/// In-place radix-2 FFT.  Forward maps a_j -> Σ_j a_j e^{-2pi i jk/N};
/// inverse uses e^{+2pi i jk/N} and divides by N.
inline void fft_radix2(std::vector<cdouble>& a, bool inverse) {
  std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    fail(ErrorKind::input, "fft_radix2 requires a power-of-two size");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = kTwoPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    cdouble wl = std::exp(cdouble(0.0, ang));
    for (std::size_t i = 0; i < n; i += len) {
      cdouble w = 1.0;
      for (std::size_t j = 0; j < len / 2; ++j) {
        cdouble u = a[i + j], t = a[i + j + len / 2] * w;
        a[i + j] = u + t;
        a[i + j + len / 2] = u - t;
        w *= wl;
      }
    }
  }
  if (inverse) {
    for (auto& x : a) x /= static_cast<double>(n);
  }
}

// ---------------------------------------------------------------------------
// Rational reconstruction (continued fractions)
// ---------------------------------------------------------------------------

/// Best rational p/q with q <= max_den approximating x; returns true when the
/// approximation is within tol of x.
inline bool to_rational(double x, long max_den, double tol, long& p, long& q) {
  double a = x;
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  for (int it = 0; it < 64; ++it) {
    double fl = std::floor(a);
    if (fl > 9e17 || fl < -9e17) break;
    long ai = static_cast<long>(fl);
    long p2 = ai * p1 + p0, q2 = ai * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    double rem = a - fl;
    if (rem < 1e-15) break;
    a = 1.0 / rem;
  }
  if (q1 == 0) return false;
  p = p1;
  q = q1;
  return std::abs(x - static_cast<double>(p) / static_cast<double>(q)) <= tol;
}

}  // namespace qidlab
