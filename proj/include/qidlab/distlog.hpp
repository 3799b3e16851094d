#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <tuple>
#include <vector>

#include "qidlab/base.hpp"
#include "qidlab/charfn.hpp"
#include "qidlab/quad.hpp"

namespace qidlab {

// ---------------------------------------------------------------------------
// Distinguished logarithm
// ---------------------------------------------------------------------------

/// Continuous logarithm of a zero-free function on a uniform grid containing
/// z = 0, normalised by g(0) = Log F(0).  The real part is log|F| pointwise;
/// only the phase is accumulated, so exp(g) round-trips at every node.
struct DistinguishedLog {
  std::vector<double> z;
  std::vector<cdouble> g;
  std::vector<double> phase_step;  ///< arg(F_{j+1}/F_j), all < pi/2 in magnitude
  double max_phase_step = 0.0;

  cdouble at(double zq) const {
    if (z.empty()) fail(ErrorKind::input, "empty distinguished log");
    if (zq <= z.front()) return g.front();
    if (zq >= z.back()) return g.back();
    auto it = std::upper_bound(z.begin(), z.end(), zq);
    std::size_t j = static_cast<std::size_t>(it - z.begin()) - 1;
    double w = (zq - z[j]) / (z[j + 1] - z[j]);
    return g[j] * (1.0 - w) + g[j + 1] * w;
  }
};

/// Branch tracking from z = 0 outward on a uniform grid over [zmin, zmax];
/// the grid is doubled until every phase increment is below pi/2 (robustness
/// margin, not just < pi).  A modulus below tau_zero anywhere aborts with the
/// offending z.
template <typename F>
DistinguishedLog distinguished_log(F&& f, double zmin, double zmax,
                                   std::size_t n0 = 1024, double tau_zero = 1e-9,
                                   std::size_t max_points = (1u << 20)) {
  if (!(zmin <= 0.0 && 0.0 <= zmax && zmin < zmax))
    fail(ErrorKind::input, "distinguished_log needs zmin <= 0 <= zmax");

  std::size_t n = std::max<std::size_t>(n0, 8);
  double prev_worst = std::numeric_limits<double>::infinity();
  for (;; n *= 2) {
    if (n > max_points)
      fail(ErrorKind::refinement,
           "distinguished_log: pi/2 phase steps not reachable within the point cap");
    // uniform step with z = 0 pinned on the grid; the covered range may
    // extend slightly past [zmin, zmax]
    double step = (zmax - zmin) / static_cast<double>(n);
    std::size_t n_neg = static_cast<std::size_t>(std::ceil(-zmin / step - 1e-12));
    std::size_t n_pos = static_cast<std::size_t>(std::ceil(zmax / step - 1e-12));
    if (n_neg == 0 && zmin < 0.0) n_neg = 1;
    if (n_pos == 0 && zmax > 0.0) n_pos = 1;

    std::vector<double> zs(n_neg + n_pos + 1);
    for (std::size_t j = 0; j <= n_neg + n_pos; ++j)
      zs[j] = (static_cast<double>(j) - static_cast<double>(n_neg)) * step;
    std::vector<cdouble> vs(zs.size());
    parallel_for(zs.size(), [&](std::size_t j) { vs[j] = f(zs[j]); });

    bool ok = true;
    double max_step_seen = 0.0, worst_z = 0.0;
    for (std::size_t j = 0; j < zs.size(); ++j) {
      if (std::abs(vs[j]) < tau_zero) {
        std::ostringstream os;
        os << "distinguished_log: |F| below tau_zero near z = " << zs[j];
        fail(ErrorKind::branch_tracking, os.str());
      }
    }
    std::vector<double> steps(zs.size() - 1);
    for (std::size_t j = 0; j + 1 < zs.size(); ++j) {
      steps[j] = std::arg(vs[j + 1] / vs[j]);
      if (std::abs(steps[j]) > max_step_seen) {
        max_step_seen = std::abs(steps[j]);
        worst_z = 0.5 * (zs[j] + zs[j + 1]);
      }
      if (std::abs(steps[j]) >= 0.5 * kPi) ok = false;
    }
    if (!ok) {
      // a phase step that refinement cannot shrink marks a zero crossing
      if (max_step_seen >= 0.9 * prev_worst) {
        std::ostringstream os;
        os << "distinguished_log: phase step stuck at " << max_step_seen
           << " near z = " << worst_z << " (zero crossing suspected)";
        fail(ErrorKind::branch_tracking, os.str());
      }
      prev_worst = max_step_seen;
      continue;
    }

    DistinguishedLog out;
    out.z = std::move(zs);
    out.phase_step = std::move(steps);
    out.max_phase_step = max_step_seen;
    out.g.resize(out.z.size());
    std::size_t origin = n_neg;
    double phase = std::arg(vs[origin]);
    out.g[origin] = cdouble(std::log(std::abs(vs[origin])), phase);
    double ph = phase;
    for (std::size_t j = origin; j + 1 < out.z.size(); ++j) {
      ph += out.phase_step[j];
      out.g[j + 1] = cdouble(std::log(std::abs(vs[j + 1])), ph);
    }
    ph = phase;
    for (std::size_t j = origin; j > 0; --j) {
      ph -= out.phase_step[j - 1];
      out.g[j - 1] = cdouble(std::log(std::abs(vs[j - 1])), ph);
    }
    return out;
  }
}

/// Grid-based variant: uses the stored samples (plus the evaluator when the
/// grid carries one for refinement).
inline DistinguishedLog distinguished_log(const CharFunctionGrid& grid,
                                          double tau_zero = 1e-9) {
  if (grid.eval)
    return distinguished_log(grid.eval, grid.z.front(), grid.z.back(),
                             grid.z.size(), tau_zero);
  // no refinement hook: the provided sampling must already satisfy pi/2
  DistinguishedLog out;
  out.z = grid.z;
  out.g.resize(grid.z.size());
  out.phase_step.resize(grid.z.size() - 1);
  auto it = std::lower_bound(out.z.begin(), out.z.end(), 0.0);
  if (it == out.z.end() || std::abs(*it) > 1e-12)
    fail(ErrorKind::input, "distinguished_log: grid must contain z = 0");
  std::size_t origin = static_cast<std::size_t>(it - out.z.begin());
  for (std::size_t j = 0; j < grid.v.size(); ++j)
    if (std::abs(grid.v[j]) < tau_zero)
      fail(ErrorKind::branch_tracking, "distinguished_log: |F| below tau_zero");
  for (std::size_t j = 0; j + 1 < grid.v.size(); ++j) {
    out.phase_step[j] = std::arg(grid.v[j + 1] / grid.v[j]);
    if (std::abs(out.phase_step[j]) >= 0.5 * kPi)
      fail(ErrorKind::refinement,
           "distinguished_log: grid too coarse (phase step >= pi/2) and no evaluator");
    out.max_phase_step = std::max(out.max_phase_step, std::abs(out.phase_step[j]));
  }
  double phase = std::arg(grid.v[origin]);
  out.g[origin] = cdouble(std::log(std::abs(grid.v[origin])), phase);
  double ph = phase;
  for (std::size_t j = origin; j + 1 < out.z.size(); ++j) {
    ph += out.phase_step[j];
    out.g[j + 1] = cdouble(std::log(std::abs(grid.v[j + 1])), ph);
  }
  ph = phase;
  for (std::size_t j = origin; j > 0; --j) {
    ph -= out.phase_step[j - 1];
    out.g[j - 1] = cdouble(std::log(std::abs(grid.v[j - 1])), ph);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Winding index
// ---------------------------------------------------------------------------

struct WindingResult {
  int index = 0;
  double plateau_residual = 0.0;  ///< |phase variation/2pi - index|
  cdouble q_estimate = 0.0;       ///< limit value estimated from the grid ends
  double z_max = 0.0;
};

/// Index of F = q + (transform of an L1 function): total phase variation over
/// 2pi, rounded once the tail plateau |F - q| < 0.1|q| is reached at both
/// ends.  Doubles the window until the plateau holds.
template <typename F>
WindingResult winding_index(F&& f, double z0 = 32.0, int max_doublings = 20) {
  double Z = z0;
  for (int d = 0; d < max_doublings; ++d, Z *= 2.0) {
    cdouble fp = f(Z), fm = f(-Z);
    cdouble q = 0.5 * (fp + fm);
    if (std::abs(q) < 1e-14) continue;
    if (std::abs(fp - q) < 0.1 * std::abs(q) && std::abs(fm - q) < 0.1 * std::abs(q)) {
      auto lg = distinguished_log(f, -Z, Z, 4096);
      double dphi = lg.g.back().imag() - lg.g.front().imag();
      WindingResult out;
      out.index = static_cast<int>(std::llround(dphi / kTwoPi));
      out.plateau_residual = std::abs(dphi / kTwoPi - out.index);
      out.q_estimate = q;
      out.z_max = Z;
      return out;
    }
  }
  fail(ErrorKind::plateau, "winding_index: tail plateau not reached; extend the grid");
}

inline WindingResult winding_index(const CharFunctionGrid& grid) {
  if (grid.eval) return winding_index(grid.eval, grid.z.back(), 1);
  cdouble q = 0.5 * (grid.v.back() + grid.v.front());
  if (std::abs(q) < 1e-14 || std::abs(grid.v.back() - q) >= 0.1 * std::abs(q) ||
      std::abs(grid.v.front() - q) >= 0.1 * std::abs(q))
    fail(ErrorKind::plateau, "winding_index: tail plateau not reached; extend the grid");
  auto lg = distinguished_log(grid);
  double dphi = lg.g.back().imag() - lg.g.front().imag();
  WindingResult out;
  out.index = static_cast<int>(std::llround(dphi / kTwoPi));
  out.plateau_residual = std::abs(dphi / kTwoPi - out.index);
  out.q_estimate = q;
  out.z_max = grid.z.back();
  return out;
}

// ---------------------------------------------------------------------------
// Mean motion
// ---------------------------------------------------------------------------

struct MeanMotion {
  double kappa = 0.0;
  double residual_sup = 0.0;  ///< max |Im g(z) - kappa z| on the grid
};

/// Slope of the phase of an almost periodic, zero-free F_d: kappa with
/// g(z) = i kappa z + bounded part.  Richardson over the horizons T and T/2;
/// an unbounded residual triggers a horizon error.
inline MeanMotion mean_motion(const DistinguishedLog& lg, double T) {
  if (lg.z.front() > -T * (1.0 - 1e-12) || lg.z.back() < T * (1.0 - 1e-12))
    fail(ErrorKind::input, "mean_motion: grid does not cover [-T, T]");
  auto slope = [&](double t) {
    return (lg.at(t).imag() - lg.at(-t).imag()) / (2.0 * t);
  };
  double k1 = slope(T), k2 = slope(0.5 * T);
  MeanMotion out;
  out.kappa = 2.0 * k1 - k2;

  double max_half = 0.0, max_full = 0.0;
  for (std::size_t j = 0; j < lg.z.size(); ++j) {
    double r = std::abs(lg.g[j].imag() - out.kappa * lg.z[j]);
    max_full = std::max(max_full, r);
    if (std::abs(lg.z[j]) <= 0.5 * T) max_half = std::max(max_half, r);
  }
  out.residual_sup = max_full;
  if (max_full > 2.5 * max_half + 1e-9)
    fail(ErrorKind::horizon,
         "mean_motion: residual g - i kappa z grows with the horizon");
  return out;
}

// ---------------------------------------------------------------------------
// Bohr-Fourier coefficients
// ---------------------------------------------------------------------------

struct BohrSettings {
  double period = 0.0;     ///< > 0 snaps the horizon to a period multiple
  bool richardson = true;  ///< extrapolate over T and T/2 (non-snapped path)
};

struct BohrResult {
  std::vector<cdouble> coef;
  double crosstalk_bound = 0.0;
  double horizon_used = 0.0;
};

/// Windowed Bohr means c_y = (1/2T) int_{-T}^{T} h(z) e^{-izy} dz on the
/// sampled grid.  Error is O(1/T) for separated frequencies; snapping T to an
/// exact period multiple makes the averages spectrally accurate on lattice
/// inputs.
inline BohrResult bohr_coefficients(std::span<const double> z,
                                    std::span<const cdouble> h,
                                    std::span<const double> freqs, double T,
                                    const BohrSettings& s = {}) {
  if (z.size() != h.size() || z.size() < 8)
    fail(ErrorKind::input, "bohr_coefficients: bad samples");
  double zmax = std::min(-z.front(), z.back());
  double Teff = std::min(T, zmax);
  if (s.period > 0.0) {
    double k = std::floor(Teff / s.period);
    if (k < 1.0)
      fail(ErrorKind::input, "bohr_coefficients: horizon below one period");
    Teff = k * s.period;
  }

  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < freqs.size(); ++i)
    for (std::size_t j = i + 1; j < freqs.size(); ++j)
      gap = std::min(gap, std::abs(freqs[i] - freqs[j]));
  if (freqs.size() > 1 && gap < kTwoPi / Teff)
    fail(ErrorKind::resolution,
         "bohr_coefficients: frequency gap below the 2pi/T resolution");

  // h linearly interpolated onto an off-grid point
  auto h_at = [&](double zq) {
    auto it = std::upper_bound(z.begin(), z.end(), zq);
    if (it == z.begin()) return h.front();
    if (it == z.end()) return h.back();
    std::size_t j = static_cast<std::size_t>(it - z.begin()) - 1;
    double w = (zq - z[j]) / (z[j + 1] - z[j]);
    return h[j] * (1.0 - w) + h[j + 1] * w;
  };

  auto window_mean = [&](double y, double Tw) {
    // trapezoid of h e^{-izy} over exactly [-Tw, Tw]: interior samples plus
    // interpolated end segments so snapped horizons are hit exactly
    cdouble acc = 0.0;
    std::size_t lo = static_cast<std::size_t>(
        std::lower_bound(z.begin(), z.end(), -Tw) - z.begin());
    std::size_t hi = static_cast<std::size_t>(
        std::upper_bound(z.begin(), z.end(), Tw) - z.begin());
    if (hi - lo < 4) fail(ErrorKind::input, "bohr_coefficients: window too small");
    auto ker = [&](double zq, cdouble hv) {
      return hv * std::exp(cdouble(0.0, -zq * y));
    };
    for (std::size_t j = lo; j + 1 < hi; ++j)
      acc += 0.5 * (ker(z[j], h[j]) + ker(z[j + 1], h[j + 1])) * (z[j + 1] - z[j]);
    if (z[lo] > -Tw)
      acc += 0.5 * (ker(-Tw, h_at(-Tw)) + ker(z[lo], h[lo])) * (z[lo] + Tw);
    if (z[hi - 1] < Tw)
      acc += 0.5 * (ker(z[hi - 1], h[hi - 1]) + ker(Tw, h_at(Tw))) * (Tw - z[hi - 1]);
    return acc / (2.0 * Tw);
  };

  BohrResult out;
  out.horizon_used = Teff;
  double hsup = 0.0;
  for (const auto& v : h) hsup = std::max(hsup, std::abs(v));
  out.crosstalk_bound =
      freqs.size() > 1 ? hsup / (Teff * gap) : 0.0;
  out.coef.reserve(freqs.size());
  for (double y : freqs) {
    cdouble c1 = window_mean(y, Teff);
    if (s.period > 0.0 || !s.richardson) {
      out.coef.push_back(c1);
    } else {
      cdouble c2 = window_mean(y, 0.5 * Teff);
      out.coef.push_back(2.0 * c1 - c2);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Almost periodic series and Wiener-algebra inversion
// ---------------------------------------------------------------------------

/// Finite trigonometric sum Σ coef_j e^{i freq_j z} with absolutely summable
/// coefficients; frequencies are kept sorted and merged within 1e-9.
struct ApSeries {
  std::vector<double> freq;
  std::vector<cdouble> coef;
  std::vector<int> order;  ///< combination order of each frequency

  static constexpr double kMergeTol = 1e-9;

  cdouble eval(double z) const {
    cdouble s = 0.0;
    for (std::size_t j = 0; j < freq.size(); ++j)
      s += coef[j] * std::exp(cdouble(0.0, freq[j] * z));
    return s;
  }
  double l1() const {
    double s = 0.0;
    for (const auto& c : coef) s += std::abs(c);
    return s;
  }

  void add_term(double f, cdouble c, int ord) {
    auto it = std::lower_bound(freq.begin(), freq.end(), f - kMergeTol);
    std::size_t j = static_cast<std::size_t>(it - freq.begin());
    if (j < freq.size() && std::abs(freq[j] - f) <= kMergeTol) {
      coef[j] += c;
      order[j] = std::min(order[j], ord);
      return;
    }
    freq.insert(freq.begin() + j, f);
    coef.insert(coef.begin() + j, c);
    order.insert(order.begin() + j, ord);
  }

  void prune(double eps, int order_cap) {
    std::size_t k = 0;
    for (std::size_t j = 0; j < freq.size(); ++j) {
      if (std::abs(coef[j]) <= eps || order[j] > order_cap) continue;
      freq[k] = freq[j];
      coef[k] = coef[j];
      order[k] = order[j];
      ++k;
    }
    freq.resize(k);
    coef.resize(k);
    order.resize(k);
  }

  static ApSeries mul(const ApSeries& a, const ApSeries& b) {
    ApSeries out;
    std::vector<std::tuple<double, cdouble, int>> terms;
    terms.reserve(a.freq.size() * b.freq.size());
    for (std::size_t i = 0; i < a.freq.size(); ++i)
      for (std::size_t j = 0; j < b.freq.size(); ++j)
        terms.emplace_back(a.freq[i] + b.freq[j], a.coef[i] * b.coef[j],
                           a.order[i] + b.order[j]);
    std::sort(terms.begin(), terms.end(),
              [](const auto& x, const auto& y) { return std::get<0>(x) < std::get<0>(y); });
    for (const auto& [f, c, o] : terms) {
      if (!out.freq.empty() && f - out.freq.back() <= kMergeTol) {
        out.coef.back() += c;
        out.order.back() = std::min(out.order.back(), o);
      } else {
        out.freq.push_back(f);
        out.coef.push_back(c);
        out.order.push_back(o);
      }
    }
    return out;
  }
};

struct WienerSettings {
  std::size_t circle_samples = 1 << 16;
  double coef_tail = 1e-10;        ///< lattice-path truncation target
  double residual_target = 1e-10;  ///< Wiener-norm residual target
  int order_cap = 8;               ///< frequency combination order (general path)
  int max_iter = 30;
  double prune_eps = 1e-16;
  std::optional<double> lattice_hint;
  bool force_general = false;  ///< skip the lattice path (testing hook)
};

struct WienerResult {
  ApSeries inverse;
  double residual = 0.0;  ///< bound on sup |F_d·D - 1|
  bool lattice_path = false;
  int iterations = 0;
};

/// Inverse of Σ a_y e^{izy} in the Wiener algebra.
///
/// Lattice path: the sum is p(e^{iq z}) for a zero-free trigonometric
/// polynomial p; its reciprocal's Fourier coefficients come from a dense
/// circle grid, truncated once the coefficient tail is below coef_tail.
/// General path: Newton-Schulz d <- d(2 - F d) in truncated coefficient
/// space, quadratically convergent once the residual is below 1; frequency
/// sums are kept up to order_cap.
inline WienerResult wiener_inverse_ap(const std::vector<Atom>& atoms,
                                      const WienerSettings& s = {}) {
  if (atoms.empty()) fail(ErrorKind::input, "wiener_inverse_ap: no atoms");

  std::vector<double> freq;
  std::vector<double> wts;
  for (const auto& a : atoms) {
    freq.push_back(a.location);
    wts.push_back(a.mass);
  }

  // lattice path when a single commensurable class covers all frequencies
  std::vector<double> nz;
  for (double y : freq)
    if (y != 0.0) nz.push_back(y);
  bool lattice = false;
  double base = 1.0;
  if (!s.force_general) {
    if (nz.empty()) {
      lattice = true;  // constant series
    } else {
      auto classes = detail::frequency_classes(nz);
      if (classes.size() == 1) {
        lattice = true;
        base = classes[0].base;
      }
    }
  }

  WienerResult out;
  if (lattice && nz.empty()) {
    double c = 0.0;
    for (double w : wts) c += w;
    if (std::abs(c) < 1e-300) fail(ErrorKind::inversion, "constant series is zero");
    out.inverse.add_term(0.0, 1.0 / c, 1);
    out.lattice_path = true;
    return out;
  }

  if (lattice) {
    std::size_t n = s.circle_samples;
    std::vector<long> ks(freq.size());
    for (std::size_t j = 0; j < freq.size(); ++j)
      ks[j] = static_cast<long>(std::llround(freq[j] / base));
    auto ring = detail::circle_samples(ks, wts, n);
    double ring_min = std::numeric_limits<double>::infinity();
    for (const auto& v : ring) ring_min = std::min(ring_min, std::abs(v));
    if (ring_min < 1e-4) {
      std::ostringstream os;
      os << "wiener_inverse_ap: circle minimum " << ring_min
         << " too small for inversion";
      fail(ErrorKind::inversion, os.str());
    }
    std::vector<cdouble> rec(n);
    for (std::size_t j = 0; j < n; ++j) rec[j] = 1.0 / ring[j];
    fft_radix2(rec, false);
    long half = static_cast<long>(n / 2);
    std::vector<std::pair<long, cdouble>> terms;
    for (std::size_t j = 0; j < n; ++j) {
      long k = static_cast<long>(j) <= half ? static_cast<long>(j)
                                            : static_cast<long>(j) - static_cast<long>(n);
      terms.emplace_back(k, rec[j] / static_cast<double>(n));
    }
    std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
      return std::abs(a.second) > std::abs(b.second);
    });
    double total = 0.0;
    for (const auto& [k, c] : terms) total += std::abs(c);
    double kept = 0.0;
    std::vector<std::pair<long, cdouble>> keep;
    for (const auto& [k, c] : terms) {
      if (total - kept <= s.coef_tail) break;
      keep.emplace_back(k, c);
      kept += std::abs(c);
    }
    std::sort(keep.begin(), keep.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [k, c] : keep)
      out.inverse.add_term(static_cast<double>(k) * base, c, std::abs(static_cast<int>(k)));
    // residual check on a circle subsample
    double res = 0.0;
    for (std::size_t j = 0; j < n; j += n / 1024) {
      double zq = kTwoPi * static_cast<double>(j) / (static_cast<double>(n) * base);
      cdouble fd = 0.0;
      for (std::size_t t = 0; t < freq.size(); ++t)
        fd += wts[t] * std::exp(cdouble(0.0, freq[t] * zq));
      res = std::max(res, std::abs(fd * out.inverse.eval(zq) - 1.0));
    }
    out.residual = res + s.coef_tail;
    out.lattice_path = true;
    return out;
  }

  // general path: Newton-Schulz.  Order counts nonzero-frequency factors in
  // a combination; the zero frequency is free.
  ApSeries F;
  std::size_t dom = 0;
  for (std::size_t j = 0; j < freq.size(); ++j) {
    F.add_term(freq[j], wts[j], freq[j] == 0.0 ? 0 : 1);
    if (std::abs(wts[j]) > std::abs(wts[dom])) dom = j;
  }
  ApSeries d;
  d.add_term(-freq[dom], 1.0 / wts[dom], freq[dom] == 0.0 ? 0 : 1);

  double res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < s.max_iter; ++it) {
    ApSeries prod = ApSeries::mul(F, d);
    // residual = || 1 - F d ||_Wiener, an upper bound for the sup norm
    double r = 0.0;
    bool saw_zero = false;
    for (std::size_t j = 0; j < prod.freq.size(); ++j) {
      if (std::abs(prod.freq[j]) <= ApSeries::kMergeTol) {
        r += std::abs(prod.coef[j] - 1.0);
        saw_zero = true;
      } else {
        r += std::abs(prod.coef[j]);
      }
    }
    if (!saw_zero) r += 1.0;
    res = r;
    out.iterations = it;
    if (res < s.residual_target) break;
    // d <- d (2 - F d)
    ApSeries two_minus;
    two_minus.add_term(0.0, 2.0, 0);
    for (std::size_t j = 0; j < prod.freq.size(); ++j)
      two_minus.add_term(prod.freq[j], -prod.coef[j], prod.order[j]);
    d = ApSeries::mul(d, two_minus);
    d.prune(s.prune_eps * std::max(1.0, d.l1()), s.order_cap);
  }
  if (res >= s.residual_target) {
    std::ostringstream os;
    os << "wiener_inverse_ap: Newton-Schulz residual " << res
       << " above target " << s.residual_target;
    fail(ErrorKind::inversion, os.str());
  }
  out.inverse = std::move(d);
  out.residual = res;
  return out;
}

// ---------------------------------------------------------------------------
// Cayley closed forms
// ---------------------------------------------------------------------------

/// ((i - z)/(i + z))^m, the factor generated by the signed density
/// m e^{-|x|} sgn(x)/|x|.
inline cdouble cayley_term(double z, int m) {
  cdouble i(0.0, 1.0);
  return ipow((i - z) / (i + z), m);
}

/// Distinguished branch of log((i - z)/(i + z)): purely imaginary,
/// Lambda(0) = 0, Lambda(z) = 2i atan z.
inline cdouble cayley_log(double z) { return cdouble(0.0, 2.0 * std::atan(z)); }

}  // namespace qidlab
