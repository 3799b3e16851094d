#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "qidlab/base.hpp"
#include "qidlab/model.hpp"
#include "qidlab/quad.hpp"

namespace qidlab {

// ---------------------------------------------------------------------------
// Characteristic function evaluation
// ---------------------------------------------------------------------------

struct CfParts {
  cdouble discrete = 0.0;  ///< p · Σ a_y e^{izy}
  cdouble ac = 0.0;        ///< (1-p) · f^(z)
};

inline CfParts eval_cf_parts(const MixedDistribution& d, double z) {
  CfParts out;
  cdouble s = 0.0;
  for (const auto& a : d.atoms) s += a.mass * std::exp(cdouble(0.0, z * a.location));
  out.discrete = d.p * s;
  if (d.density && d.p < 1.0) out.ac = (1.0 - d.p) * d.density->transform(z);
  return out;
}

/// F(z) = F_d(z) + F_ac(z), literally the sum of the two parts so the
/// decomposition is bitwise exact.
inline cdouble eval_cf(const MixedDistribution& d, double z) {
  CfParts p = eval_cf_parts(d, z);
  return p.discrete + p.ac;
}

/// Lipschitz bound for z -> F(z).
inline double cf_derivative_bound(const MixedDistribution& d) {
  double s = 0.0;
  for (const auto& a : d.atoms) s += a.mass * std::abs(a.location);
  s *= d.p;
  if (d.density && d.p < 1.0) s += (1.0 - d.p) * d.density->abs_moment();
  return s;
}

struct CharFunctionGrid {
  enum class Source { distribution, triplet, synthetic };
  std::vector<double> z;
  std::vector<cdouble> v;
  double max_step = 0.0;
  double deriv_bound = 0.0;  ///< refinement metadata: Lipschitz bound for F
  Source source = Source::synthetic;
  std::function<cdouble(double)> eval;  ///< optional refinement hook
};

inline CharFunctionGrid sample_cf(const MixedDistribution& d, double zmin, double zmax,
                                  std::size_t n) {
  if (!(zmax > zmin) || n < 2) fail(ErrorKind::input, "sample_cf: bad grid request");
  CharFunctionGrid g;
  g.source = CharFunctionGrid::Source::distribution;
  g.deriv_bound = cf_derivative_bound(d);
  g.z.resize(n);
  g.v.resize(n);
  double step = (zmax - zmin) / static_cast<double>(n - 1);
  g.max_step = step;
  for (std::size_t i = 0; i < n; ++i) g.z[i] = zmin + step * static_cast<double>(i);
  parallel_for(n, [&](std::size_t i) { g.v[i] = eval_cf(d, g.z[i]); });
  g.eval = [d](double z) { return eval_cf(d, z); };
  return g;
}

// ---------------------------------------------------------------------------
// Golden-section minimisation (scalar, unimodal bracket)
// ---------------------------------------------------------------------------

namespace detail {

template <typename F>
double golden_min(const F& f, double a, double b, double& xmin, int iters = 120) {
  const double invphi = 0.6180339887498949;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < iters && (b - a) > 1e-15 * (1.0 + std::abs(a)); ++it) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  if (fc < fd) { xmin = c; return fc; }
  xmin = d;
  return fd;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Zero search
// ---------------------------------------------------------------------------

struct ZeroCertificate {
  double z = 0.0;
  double modulus = 0.0;
};

struct Interval {
  double lo = 0.0, hi = 0.0;
};

/// Scans |F| on the grid restricted to the window, polishes local minima and
/// sign-change brackets of Re/Im, and certifies a zero only when the polished
/// modulus falls below tol.
inline std::optional<ZeroCertificate> find_zero(const CharFunctionGrid& g,
                                                Interval window, double tol) {
  if (g.z.size() < 3) fail(ErrorKind::input, "find_zero: grid too small");
  if (window.lo < g.z.front() - 1e-12 || window.hi > g.z.back() + 1e-12)
    fail(ErrorKind::input, "find_zero: window/grid mismatch");

  auto lo_it = std::lower_bound(g.z.begin(), g.z.end(), window.lo);
  auto hi_it = std::upper_bound(g.z.begin(), g.z.end(), window.hi);
  std::size_t i0 = static_cast<std::size_t>(lo_it - g.z.begin());
  std::size_t i1 = static_cast<std::size_t>(hi_it - g.z.begin());
  if (i1 - i0 < 3) fail(ErrorKind::input, "find_zero: window/grid mismatch");

  std::vector<std::size_t> cand;
  for (std::size_t i = std::max<std::size_t>(i0 + 1, 1); i + 1 < i1; ++i) {
    double m = std::abs(g.v[i]);
    bool local_min = m <= std::abs(g.v[i - 1]) && m <= std::abs(g.v[i + 1]);
    bool re_flip = g.v[i].real() * g.v[i + 1].real() < 0.0;
    bool im_flip = g.v[i].imag() * g.v[i + 1].imag() < 0.0;
    if (local_min || (re_flip && im_flip)) cand.push_back(i);
  }
  std::sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(g.v[a]) < std::abs(g.v[b]);
  });
  if (cand.size() > 64) cand.resize(64);

  double best = std::numeric_limits<double>::infinity(), best_z = 0.0;
  for (std::size_t i : cand) {
    double a = g.z[i - 1], b = g.z[std::min(i + 1, g.z.size() - 1)];
    double zx = g.z[i], m = std::abs(g.v[i]);
    if (g.eval) {
      auto f = [&](double z) { return std::abs(g.eval(z)); };
      m = detail::golden_min(f, a, b, zx);
    } else {
      // parabolic fit through the three samples of |F|^2
      double f0 = std::norm(g.v[i - 1]), f1 = std::norm(g.v[i]),
             f2 = std::norm(g.v[i + 1]);
      double denom = f0 - 2.0 * f1 + f2;
      if (std::abs(denom) > 1e-300) {
        double t = 0.5 * (f0 - f2) / denom;
        t = std::clamp(t, -1.0, 1.0);
        zx = g.z[i] + t * (b - a) * 0.5;
      }
    }
    if (m < best) { best = m; best_z = zx; }
  }
  if (best < tol) return ZeroCertificate{best_z, best};
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Almost periodic infimum of the discrete part
// ---------------------------------------------------------------------------

struct ApScanSettings {
  double window = 0.0;                  ///< 0 = auto: max(1e4, 100·2pi/gap)
  int oversample = 16;                  ///< samples per fastest oscillation
  int polish_candidates = 256;
  std::optional<double> lattice_hint;   ///< forces the exact circle path
  std::size_t circle_samples = 1 << 14;
};

struct ApInfimum {
  enum class Evidence { circle_exact, torus_kronecker, scan };
  double min_value = 0.0;  ///< best estimate of inf_z |Σ w_y e^{izy}|
  double argmin = 0.0;     ///< a z realising (nearly) the scan minimum
  double window = 0.0;
  double step = 0.0;
  Evidence evidence = Evidence::scan;
  double scan_min_w = 0.0;          ///< min over [0, W]
  double scan_min_2w = 0.0;         ///< min over [W, 2W]
  double translation_slack = 0.0;   ///< Σ|w_y||e^{iτy}-1| at the best τ found
  bool decaying = false;            ///< window doubling kept lowering the min
};

namespace detail {

struct FreqClass {
  double base = 0.0;
  std::vector<std::size_t> members;  // indices into the atom list
};

/// Partition the nonzero frequencies into rational-dependency classes and
/// compute an exact common base per class.
inline std::vector<FreqClass> frequency_classes(const std::vector<double>& freq) {
  std::vector<FreqClass> classes;
  for (std::size_t j = 0; j < freq.size(); ++j) {
    double y = freq[j];
    bool placed = false;
    for (auto& cls : classes) {
      long pp = 0, qq = 0;
      if (to_rational(y / cls.base, 64, 1e-9, pp, qq) && pp != 0) {
        cls.base /= static_cast<double>(qq);
        cls.members.push_back(j);
        placed = true;
        break;
      }
    }
    if (!placed) classes.push_back({std::abs(y), {j}});
  }
  return classes;
}

/// Circle samples of Σ_j w_j exp(i k_j θ) for integer k_j.
inline std::vector<cdouble> circle_samples(const std::vector<long>& ks,
                                           const std::vector<double>& ws,
                                           std::size_t n) {
  std::vector<cdouble> out(n, 0.0);
  for (std::size_t t = 0; t < ks.size(); ++t) {
    double th0 = kTwoPi * static_cast<double>(ks[t]) / static_cast<double>(n);
    cdouble rot = 1.0, step = std::exp(cdouble(0.0, th0));
    for (std::size_t j = 0; j < n; ++j) {
      out[j] += ws[t] * rot;
      rot *= step;
      if ((j & 4095u) == 4095u)
        rot = std::exp(cdouble(0.0, th0 * static_cast<double>(j + 1)));
    }
  }
  return out;
}

}  // namespace detail

/// Lower-bound estimate of inf_z |Σ w_y e^{izy}|.
///
/// Commensurable supports reduce to the exact minimum of a trigonometric
/// polynomial over one circle.  When the frequencies split into at most three
/// rationally independent classes, the orbit closure is the product torus and
/// the infimum is computed there (Kronecker).  Otherwise a window scan with
/// polishing provides the numeric surrogate, together with translation-number
/// evidence for the almost-periodicity slack.
inline ApInfimum inf_modulus_ap(const std::vector<Atom>& atoms,
                                const ApScanSettings& s = {}) {
  if (atoms.empty()) fail(ErrorKind::input, "inf_modulus_ap: no atoms");
  ApInfimum out;

  double constant = 0.0;
  std::vector<double> freq, wts;
  for (const auto& a : atoms) {
    if (a.location == 0.0) {
      constant += a.mass;
    } else {
      freq.push_back(a.location);
      wts.push_back(a.mass);
    }
  }

  auto fd = [&](double z) {
    cdouble s0 = constant;
    for (std::size_t j = 0; j < freq.size(); ++j)
      s0 += wts[j] * std::exp(cdouble(0.0, z * freq[j]));
    return std::abs(s0);
  };

  if (freq.empty()) {
    out.min_value = std::abs(constant);
    out.evidence = ApInfimum::Evidence::circle_exact;
    out.scan_min_w = out.scan_min_2w = out.min_value;
    return out;
  }

  auto classes = detail::frequency_classes(freq);
  if (s.lattice_hint && classes.size() == 1) {
    // trust but verify: the hint must be commensurable with the detected base
    long pp = 0, qq = 0;
    if (!to_rational(classes[0].base / *s.lattice_hint, 1 << 20, 1e-9, pp, qq))
      fail(ErrorKind::input, "lattice_hint inconsistent with atom locations");
  }

  std::size_t m = classes.size();
  if (m <= 3) {
    // sample each class polynomial on its own circle
    std::size_t per = m == 1 ? s.circle_samples : (m == 2 ? 1024 : 256);
    std::vector<std::vector<cdouble>> rings;
    for (const auto& cls : classes) {
      std::vector<long> ks;
      std::vector<double> ws;
      for (std::size_t j : cls.members) {
        ks.push_back(static_cast<long>(std::llround(freq[j] / cls.base)));
        ws.push_back(wts[j]);
      }
      rings.push_back(detail::circle_samples(ks, ws, per));
    }

    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_idx(m, 0);
    std::vector<std::size_t> idx(m, 0);
    // full product scan; per is chosen so per^m stays ~1e6..2e7
    while (true) {
      cdouble v = constant;
      for (std::size_t c = 0; c < m; ++c) v += rings[c][idx[c]];
      double a = std::abs(v);
      if (a < best) { best = a; best_idx = idx; }
      std::size_t c = 0;
      for (; c < m; ++c) {
        if (++idx[c] < per) break;
        idx[c] = 0;
      }
      if (c == m) break;
    }

    // coordinate-descent polish on the torus angles
    std::vector<double> th(m);
    for (std::size_t c = 0; c < m; ++c)
      th[c] = kTwoPi * static_cast<double>(best_idx[c]) / static_cast<double>(per);
    auto torus_val = [&](const std::vector<double>& t) {
      cdouble v = constant;
      for (std::size_t c = 0; c < m; ++c) {
        const auto& cls = classes[c];
        cdouble sc = 0.0;
        for (std::size_t j : cls.members) {
          double k = std::round(freq[j] / cls.base);
          sc += wts[j] * std::exp(cdouble(0.0, k * t[c]));
        }
        v += sc;
      }
      return std::abs(v);
    };
    double width = kTwoPi / static_cast<double>(per);
    for (int round = 0; round < 6; ++round) {
      for (std::size_t c = 0; c < m; ++c) {
        auto f1 = [&](double t) {
          auto tt = th;
          tt[c] = t;
          return torus_val(tt);
        };
        double tx = th[c];
        double v = detail::golden_min(f1, th[c] - width, th[c] + width, tx);
        th[c] = tx;
        best = std::min(best, v);
      }
      width *= 0.25;
    }

    out.min_value = best;
    out.evidence = m == 1 ? ApInfimum::Evidence::circle_exact
                          : ApInfimum::Evidence::torus_kronecker;
    if (m == 1) {
      double period = kTwoPi / classes[0].base;
      out.window = period;
      out.step = period / static_cast<double>(per);
      out.argmin = th[0] / classes[0].base;
      out.scan_min_w = out.scan_min_2w = best;
      return out;
    }
    // keep the scan fields meaningful for the multi-class case
  }

  // window scan (also run for m in {2,3} to report the numeric surrogate)
  double max_f = 0.0, gap = std::numeric_limits<double>::infinity();
  for (double y : freq) max_f = std::max(max_f, std::abs(y));
  std::vector<double> all = freq;
  all.push_back(0.0);
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      gap = std::min(gap, std::abs(std::abs(all[i]) - std::abs(all[j])));
  if (!(gap > 0.0)) gap = max_f;

  double W = s.window > 0.0 ? s.window : std::max(1e4, 100.0 * kTwoPi / gap);
  double step = kPi / (static_cast<double>(s.oversample) * max_f);
  std::size_t n = static_cast<std::size_t>(2.0 * W / step) + 2;
  std::vector<float> vals(n);
  parallel_for(n, [&](std::size_t i) {
    vals[i] = static_cast<float>(fd(static_cast<double>(i) * step));
  });

  double lip = 0.0;
  for (std::size_t j = 0; j < freq.size(); ++j)
    lip += std::abs(wts[j] * freq[j]);

  auto polish_window = [&](std::size_t lo, std::size_t hi, double& arg) {
    float sampled_min = std::numeric_limits<float>::infinity();
    for (std::size_t i = lo; i < hi; ++i) sampled_min = std::min(sampled_min, vals[i]);
    // only minima within one Lipschitz step of the sampled minimum can win
    float keep = sampled_min + static_cast<float>(lip * step);
    std::vector<std::size_t> cand;
    for (std::size_t i = std::max<std::size_t>(lo, 1); i + 1 < hi; ++i)
      if (vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1] && vals[i] <= keep)
        cand.push_back(i);
    std::sort(cand.begin(), cand.end(),
              [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    std::size_t cap = std::max<std::size_t>(static_cast<std::size_t>(s.polish_candidates),
                                            8192);
    if (cand.size() > cap) cand.resize(cap);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i : cand) {
      double zx = 0.0;
      double v = detail::golden_min(fd, (static_cast<double>(i) - 1.0) * step,
                                    (static_cast<double>(i) + 1.0) * step, zx);
      if (v < best) { best = v; arg = zx; }
    }
    return best;
  };

  std::size_t half = n / 2;
  double arg1 = 0.0, arg2 = 0.0;
  out.scan_min_w = polish_window(0, half, arg1);
  out.scan_min_2w = polish_window(half, n, arg2);
  out.window = W;
  out.step = step;
  out.decaying = out.scan_min_2w < 0.75 * out.scan_min_w;
  double scan_min = std::min(out.scan_min_w, out.scan_min_2w);
  out.argmin = out.scan_min_w <= out.scan_min_2w ? arg1 : arg2;

  // translation-number slack: sup_z |F_d(z+τ)-F_d(z)| <= Σ|w_y||e^{iτy}-1|
  auto slack = [&](double tau) {
    double sl = 0.0;
    for (std::size_t j = 0; j < freq.size(); ++j)
      sl += std::abs(wts[j]) * std::abs(std::exp(cdouble(0.0, tau * freq[j])) - 1.0);
    return sl;
  };
  double best_slack = std::numeric_limits<double>::infinity();
  for (double tau = W; tau <= 1.5 * W; tau += step * 4.0) {
    double sl = slack(tau);
    if (sl < best_slack) best_slack = sl;
  }
  out.translation_slack = best_slack;

  if (m > 3) {
    out.min_value = scan_min;
    out.evidence = ApInfimum::Evidence::scan;
  } else if (out.min_value > scan_min) {
    // a scan should never beat the torus minimum by construction, but keep
    // the smaller value in case polishing got lucky
    out.min_value = scan_min;
  }
  return out;
}

// ---------------------------------------------------------------------------
// The quasi-infinite divisibility decision
// ---------------------------------------------------------------------------

enum class Qid { QID, notQID, undecided };

struct QidSettings {
  double tau_zero = 1e-9;
  double tau_qid = 1e-4;
  double window = 0.0;  ///< 0 = automatic scan window
  ApScanSettings ap;
};

struct QidVerdict {
  Qid verdict = Qid::undecided;
  double eps_f = 0.0;   ///< lower estimate of inf |F|
  double eps_d = 0.0;   ///< lower estimate of inf |F_d|
  std::optional<ZeroCertificate> zero;
  double tau_zero = 0.0, tau_qid = 0.0;
  double window = 0.0;  ///< zero-search window actually used
  ApInfimum::Evidence evidence = ApInfimum::Evidence::scan;
};

namespace detail {

/// Two-stage certified scan for min |F| over [0, hi]: a coarse pass with a
/// Lipschitz bound, then local refinement wherever a dip below the decision
/// band could hide.
template <typename F>
double scan_min_certified(const F& f, double hi, double lipschitz, double tau_qid,
                          double& argmin) {
  double step = std::min(0.01, hi / 64.0);
  std::size_t n = static_cast<std::size_t>(hi / step) + 2;
  std::vector<float> vals(n);
  parallel_for(n, [&](std::size_t i) {
    vals[i] = static_cast<float>(f(std::min(hi, static_cast<double>(i) * step)));
  });
  double coarse_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    coarse_min = std::min(coarse_min, static_cast<double>(vals[i]));

  double threshold = std::max(2.0 * tau_qid, coarse_min) + lipschitz * step;
  double best = std::numeric_limits<double>::infinity();
  argmin = 0.0;
  double resolve = std::max(tau_qid, 0.25 * coarse_min);
  double fine = std::max(1e-7, std::min(step, 0.25 * resolve / std::max(1e-12, lipschitz)));
  for (std::size_t i = 0; i < n; ++i) {
    if (static_cast<double>(vals[i]) > threshold) continue;
    double lo = std::max(0.0, (static_cast<double>(i) - 1.0) * step);
    double hi2 = std::min(hi, (static_cast<double>(i) + 1.0) * step);
    for (double z = lo; z <= hi2; z += fine) {
      double v = f(z);
      if (v < best) { best = v; argmin = z; }
    }
  }
  double zx = argmin;
  best = std::min(best, golden_min(
                            [&](double z) { return f(std::clamp(z, 0.0, hi)); },
                            std::max(0.0, argmin - fine), std::min(hi, argmin + fine),
                            zx));
  argmin = zx;
  return best;
}

}  // namespace detail

/// Theorem-(iii) route: zero-freeness of F on a Riemann-Lebesgue window plus
/// positivity of inf |F_d|.  Conjugate symmetry confines all scans to z >= 0.
inline QidVerdict qid_check(const MixedDistribution& d, const QidSettings& s = {}) {
  auto rep = validate_distribution(d);
  if (!rep.valid()) fail(ErrorKind::input, "qid_check: " + rep.violations.front());

  QidVerdict out;
  out.tau_zero = s.tau_zero;
  out.tau_qid = s.tau_qid;

  std::vector<Atom> scaled = d.atoms;
  for (auto& a : scaled) a.mass *= d.p;
  ApScanSettings ap = s.ap;
  ap.lattice_hint = d.lattice_hint;
  if (s.window > 0.0) ap.window = s.window;
  ApInfimum inf_d = inf_modulus_ap(scaled, ap);
  out.eps_d = inf_d.min_value;
  out.evidence = inf_d.evidence;

  bool has_ac = d.density.has_value() && d.p < 1.0;
  double lipschitz = cf_derivative_bound(d);

  if (!has_ac) {
    out.eps_f = out.eps_d;
    out.window = inf_d.window;
    if (inf_d.min_value < 10.0 * s.tau_zero ||
        (inf_d.evidence == ApInfimum::Evidence::scan && inf_d.decaying)) {
      // polish at the reported argmin for a certificate
      double zx = inf_d.argmin;
      auto f = [&](double z) { return std::abs(eval_cf(d, z)); };
      double v = detail::golden_min(f, std::max(0.0, zx - inf_d.step), zx + inf_d.step, zx);
      if (v < s.tau_zero) out.zero = ZeroCertificate{zx, v};
    }
  } else {
    double onemp = 1.0 - d.p;
    double M = 0.0;
    if (out.eps_d > s.tau_zero)
      M = d.density->horizon_for(0.5 * out.eps_d / onemp);
    double margin = 1.0 + kTwoPi / std::max(1e-9, [&] {
                      double mx = 1.0;
                      for (const auto& a : d.atoms)
                        mx = std::max(mx, std::abs(a.location));
                      return mx;
                    }());
    double hi = std::max(M + margin, 8.0);
    out.window = hi;
    auto f = [&](double z) { return std::abs(eval_cf(d, z)); };
    double argmin = 0.0;
    double win_min = detail::scan_min_certified(f, hi, lipschitz, s.tau_qid, argmin);
    if (win_min < s.tau_zero) out.zero = ZeroCertificate{argmin, win_min};
    // beyond M:  |F| >= eps_d - eps_d/2
    double floor_beyond = out.eps_d > s.tau_zero ? 0.5 * out.eps_d : 0.0;
    out.eps_f = std::min(win_min, floor_beyond > 0.0
                                      ? floor_beyond
                                      : win_min);
    if (out.eps_d <= s.tau_zero) out.eps_f = std::min(out.eps_f, out.eps_d);
  }

  if (out.zero.has_value()) {
    out.verdict = Qid::notQID;
  } else if (out.eps_d < s.tau_zero) {
    out.verdict = Qid::notQID;  // inf |F_d| vanishes (exact or Kronecker-scan)
  } else if (out.eps_f > s.tau_qid && out.eps_d > s.tau_qid) {
    out.verdict = Qid::QID;
  } else if (out.eps_f < s.tau_zero) {
    out.verdict = Qid::notQID;
  } else {
    out.verdict = Qid::undecided;
  }
  return out;
}

/// Theorem-(ii) route: a direct window scan of inf |F| with no use of the
/// discrete/ac split beyond the window choice.  Kept separate so the two
/// equivalent conditions can be cross-checked on a corpus.
inline QidVerdict qid_check_scan(const MixedDistribution& d, const QidSettings& s = {}) {
  auto rep = validate_distribution(d);
  if (!rep.valid()) fail(ErrorKind::input, "qid_check_scan: " + rep.violations.front());

  QidVerdict out;
  out.tau_zero = s.tau_zero;
  out.tau_qid = s.tau_qid;

  double max_f = 1.0, gap = std::numeric_limits<double>::infinity();
  for (const auto& a : d.atoms) max_f = std::max(max_f, std::abs(a.location));
  for (std::size_t i = 0; i < d.atoms.size(); ++i)
    for (std::size_t j = i + 1; j < d.atoms.size(); ++j)
      gap = std::min(gap,
                     std::abs(d.atoms[i].location - d.atoms[j].location));
  if (!std::isfinite(gap) || gap <= 0.0) gap = max_f;

  bool lattice = d.lattice_hint.has_value();
  double period_cover = lattice ? 2.0 * kTwoPi / *d.lattice_hint
                                : std::max(1e4, 100.0 * kTwoPi / gap);
  double hi = period_cover;
  if (d.density && d.p < 1.0) {
    double M = d.density->horizon_for(std::max(s.tau_qid, 1e-6) / (1.0 - d.p));
    hi = M + period_cover;
  }
  if (s.window > 0.0) hi = s.window;
  out.window = hi;

  auto f = [&](double z) { return std::abs(eval_cf(d, z)); };
  double argmin = 0.0;
  double v = detail::scan_min_certified(f, hi, cf_derivative_bound(d), s.tau_qid, argmin);
  out.eps_f = v;
  out.eps_d = v;
  if (v < s.tau_zero) {
    out.zero = ZeroCertificate{argmin, v};
    out.verdict = Qid::notQID;
  } else if (v > s.tau_qid) {
    out.verdict = Qid::QID;
  } else {
    out.verdict = Qid::undecided;
  }
  return out;
}

}  // namespace qidlab
