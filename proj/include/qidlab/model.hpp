#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qidlab/base.hpp"
#include "qidlab/quad.hpp"

namespace qidlab {

// ---------------------------------------------------------------------------
// Densities
// ---------------------------------------------------------------------------

enum class DensityKind { gaussian, laplace, uniform, exponential, sampled };

/// Declared decay of a sampled density beyond its grid, used for truncation
/// error estimates and moment tail regression.
struct TailBound {
  enum class Kind { none, exponential, polynomial } kind = Kind::none;
  double scale = 0.0;  ///< C in C·e^{-rate|x|} or C·|x|^{-order}
  double rate = 0.0;   ///< decay rate / polynomial order
};

/// One weighted, shifted density primitive.  Catalog entries carry closed-form
/// transforms; sampled entries use the exact transform of their
/// piecewise-linear interpolant.
struct DensityComponent {
  DensityKind kind = DensityKind::gaussian;
  double weight = 1.0;
  double shift = 0.0;
  double p1 = 0.0;  ///< mean / location / lo / rate
  double p2 = 1.0;  ///< variance / scale / hi
  int side = +1;    ///< exponential: +1 on x > 0, -1 on x < 0
  std::vector<double> xs, vs;
  TailBound tail;

  double base_value(double x) const {
    switch (kind) {
      case DensityKind::gaussian: {
        double d = x - p1;
        return std::exp(-0.5 * d * d / p2) / std::sqrt(kTwoPi * p2);
      }
      case DensityKind::laplace:
        return std::exp(-std::abs(x - p1) / p2) / (2.0 * p2);
      case DensityKind::uniform:
        return (x >= p1 && x <= p2) ? 1.0 / (p2 - p1) : 0.0;
      case DensityKind::exponential: {
        double t = side > 0 ? x : -x;
        return t > 0.0 ? p1 * std::exp(-p1 * t) : 0.0;
      }
      case DensityKind::sampled: {
        if (xs.size() < 2) return 0.0;
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        if (it == xs.begin() || it == xs.end()) return 0.0;
        std::size_t j = static_cast<std::size_t>(it - xs.begin()) - 1;
        double w = (x - xs[j]) / (xs[j + 1] - xs[j]);
        return vs[j] * (1.0 - w) + vs[j + 1] * w;
      }
    }
    return 0.0;
  }

  cdouble base_transform(double z) const {
    switch (kind) {
      case DensityKind::gaussian:
        return std::exp(cdouble(-0.5 * z * z * p2, z * p1));
      case DensityKind::laplace:
        return std::exp(cdouble(0.0, z * p1)) / (1.0 + p2 * p2 * z * z);
      case DensityKind::uniform: {
        double w = p2 - p1;
        return std::exp(cdouble(0.0, z * p1)) * phi1(cdouble(0.0, z * w));
      }
      case DensityKind::exponential: {
        if (side > 0) return p1 / cdouble(p1, -z);
        return p1 / cdouble(p1, z);
      }
      case DensityKind::sampled:
        return pl_transform(xs, vs, z);
    }
    return 0.0;
  }

  double value(double x) const { return weight * base_value(x - shift); }
  cdouble transform(double z) const {
    return weight * std::exp(cdouble(0.0, z * shift)) * base_transform(z);
  }

  double base_integral() const {
    if (kind == DensityKind::sampled) return trapezoid(xs, vs);
    return 1.0;
  }

  /// Decreasing envelope for |base_transform| at |z| >= t.
  double base_tail_sup(double t) const {
    t = std::abs(t);
    switch (kind) {
      case DensityKind::gaussian:
        return std::exp(-0.5 * t * t * p2);
      case DensityKind::laplace:
        return 1.0 / (1.0 + p2 * p2 * t * t);
      case DensityKind::uniform: {
        double w = p2 - p1;
        return std::min(1.0, 2.0 / std::max(1e-300, w * t));
      }
      case DensityKind::exponential:
        return p1 / std::hypot(p1, t);
      case DensityKind::sampled: {
        // bounded variation bound |f^| <= TV(f)/|z|
        double tv = 0.0;
        for (std::size_t j = 0; j + 1 < vs.size(); ++j) tv += std::abs(vs[j + 1] - vs[j]);
        tv += std::abs(vs.empty() ? 0.0 : vs.front()) + std::abs(vs.empty() ? 0.0 : vs.back());
        return std::min(1.0, tv / std::max(1e-300, t));
      }
    }
    return 1.0;
  }

  /// Bound on int |x| f(x) dx (controls the transform derivative).
  double base_abs_moment() const {
    switch (kind) {
      case DensityKind::gaussian:
        return std::abs(p1) + std::sqrt(p2);
      case DensityKind::laplace:
        return std::abs(p1) + p2;
      case DensityKind::uniform:
        return std::max(std::abs(p1), std::abs(p2));
      case DensityKind::exponential:
        return 1.0 / p1;
      case DensityKind::sampled: {
        double s = 0.0;
        for (std::size_t j = 0; j + 1 < xs.size(); ++j)
          s += 0.5 * (std::abs(xs[j]) * vs[j] + std::abs(xs[j + 1]) * vs[j + 1]) *
               (xs[j + 1] - xs[j]);
        return s;
      }
    }
    return 0.0;
  }
};

/// Density of the absolutely continuous part.  Files always describe a single
/// primitive; convolution builds weighted shifted mixtures programmatically.
struct DensitySpec {
  std::vector<DensityComponent> parts;

  static DensitySpec gaussian(double mean, double variance) {
    DensityComponent c;
    c.kind = DensityKind::gaussian;
    c.p1 = mean;
    c.p2 = variance;
    return DensitySpec{{c}};
  }
  static DensitySpec laplace(double location, double scale) {
    DensityComponent c;
    c.kind = DensityKind::laplace;
    c.p1 = location;
    c.p2 = scale;
    return DensitySpec{{c}};
  }
  static DensitySpec uniform(double lo, double hi) {
    DensityComponent c;
    c.kind = DensityKind::uniform;
    c.p1 = lo;
    c.p2 = hi;
    return DensitySpec{{c}};
  }
  static DensitySpec exponential(double rate, int side = +1) {
    DensityComponent c;
    c.kind = DensityKind::exponential;
    c.p1 = rate;
    c.side = side;
    return DensitySpec{{c}};
  }
  static DensitySpec sampled(std::vector<double> xs, std::vector<double> vs,
                             TailBound tail = {}) {
    DensityComponent c;
    c.kind = DensityKind::sampled;
    c.xs = std::move(xs);
    c.vs = std::move(vs);
    c.tail = tail;
    return DensitySpec{{c}};
  }

  double value(double x) const {
    double s = 0.0;
    for (const auto& c : parts) s += c.value(x);
    return s;
  }
  cdouble transform(double z) const {
    cdouble s = 0.0;
    for (const auto& c : parts) s += c.transform(z);
    return s;
  }
  double integral() const {
    double s = 0.0;
    for (const auto& c : parts) s += c.weight * c.base_integral();
    return s;
  }
  double tail_sup(double t) const {
    double s = 0.0;
    for (const auto& c : parts) s += std::abs(c.weight) * c.base_tail_sup(t);
    return s;
  }
  double abs_moment() const {
    double s = 0.0;
    for (const auto& c : parts)
      s += std::abs(c.weight) * (c.base_abs_moment() + std::abs(c.shift));
    return s;
  }
  bool is_single_catalog() const {
    return parts.size() == 1 && parts[0].kind != DensityKind::sampled &&
           parts[0].weight == 1.0 && parts[0].shift == 0.0;
  }
  bool has_sampled_part() const {
    for (const auto& c : parts)
      if (c.kind == DensityKind::sampled) return true;
    return false;
  }

  /// Smallest M with tail_sup(M) <= eps (bisection on the decreasing envelope).
  double horizon_for(double eps) const {
    if (tail_sup(0.0) <= eps) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (tail_sup(hi) > eps) {
      hi *= 2.0;
      if (hi > 1e12) fail(ErrorKind::refinement, "ac tail does not reach requested level");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-9 * (1.0 + hi); ++it) {
      double m = 0.5 * (lo + hi);
      (tail_sup(m) > eps ? lo : hi) = m;
    }
    return hi;
  }
};

// ---------------------------------------------------------------------------
// Mixed distributions
// ---------------------------------------------------------------------------

struct Atom {
  double location = 0.0;
  double mass = 0.0;
};

/// mu = p·(sum of atoms) + (1-p)·density.  The atom list is finite; a mass
/// deficit below 1e-12 stands in for countable supports.
struct MixedDistribution {
  double p = 1.0;
  std::vector<Atom> atoms;
  std::optional<DensitySpec> density;
  std::optional<double> lattice_hint;  ///< q > 0 with all locations in q·Z

  static MixedDistribution point_mass(double location = 0.0) {
    MixedDistribution d;
    d.p = 1.0;
    d.atoms = {{location, 1.0}};
    d.lattice_hint = std::max(1.0, std::abs(location));
    return d;
  }

  static MixedDistribution discrete(std::vector<Atom> atoms,
                                    std::optional<double> hint = {}) {
    MixedDistribution d;
    d.p = 1.0;
    d.atoms = std::move(atoms);
    d.lattice_hint = hint;
    return d;
  }

  static MixedDistribution mixed(double p, std::vector<Atom> atoms, DensitySpec f,
                                 std::optional<double> hint = {}) {
    MixedDistribution d;
    d.p = p;
    d.atoms = std::move(atoms);
    d.density = std::move(f);
    d.lattice_hint = hint;
    return d;
  }
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool valid() const { return violations.empty(); }
};

/// Pure, idempotent invariant check; lists every violation it finds.
inline ValidationReport validate_distribution(const MixedDistribution& d) {
  ValidationReport rep;
  auto add = [&rep](const std::string& s) { rep.violations.push_back(s); };

  if (!(d.p > 0.0 && d.p <= 1.0)) add("mixing weight p must lie in (0,1]");
  if (d.atoms.empty()) add("discrete part must be non-empty");

  double mass = 0.0;
  for (const auto& a : d.atoms) {
    mass += a.mass;
    if (!(a.mass > 0.0)) {
      std::ostringstream os;
      os << "atom at " << a.location << " has non-positive mass " << a.mass;
      add(os.str());
    }
  }
  if (!d.atoms.empty() && std::abs(mass - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "atom masses sum to " << mass << ", expected 1 within 1e-12";
    add(os.str());
  }
  auto locs = d.atoms;
  std::sort(locs.begin(), locs.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  for (std::size_t j = 0; j + 1 < locs.size(); ++j) {
    double gap = locs[j + 1].location - locs[j].location;
    if (gap == 0.0) {
      std::ostringstream os;
      os << "duplicate atom location " << locs[j].location;
      add(os.str());
    } else if (gap < 1e-9) {
      std::ostringstream os;
      os << "atom spacing " << gap << " near " << locs[j].location
         << " is below numeric resolution";
      add(os.str());
    }
  }

  if (d.p == 1.0 && d.density.has_value())
    add("density present although p = 1");
  if (d.p < 1.0 && !d.density.has_value())
    add("density absent although p < 1");

  if (d.density) {
    for (const auto& c : d.density->parts) {
      switch (c.kind) {
        case DensityKind::gaussian:
          if (!(c.p2 > 0.0)) add("gaussian variance must be positive");
          break;
        case DensityKind::laplace:
          if (!(c.p2 > 0.0)) add("laplace scale must be positive");
          break;
        case DensityKind::uniform:
          if (!(c.p2 > c.p1)) add("uniform needs lo < hi");
          break;
        case DensityKind::exponential:
          if (!(c.p1 > 0.0)) add("exponential rate must be positive");
          break;
        case DensityKind::sampled: {
          if (c.xs.size() != c.vs.size() || c.xs.size() < 2)
            add("sampled density needs matching x/value arrays of length >= 2");
          for (std::size_t j = 0; j + 1 < c.xs.size(); ++j)
            if (!(c.xs[j] < c.xs[j + 1])) {
              add("sampled density grid must be strictly increasing");
              break;
            }
          for (double v : c.vs)
            if (v < 0.0) {
              add("sampled density has negative values");
              break;
            }
          break;
        }
      }
    }
    double tol = d.density->has_sampled_part() ? 1e-6 : 1e-12;
    double total = d.density->integral();
    if (std::abs(total - 1.0) > tol) {
      std::ostringstream os;
      os << "density integrates to " << total << ", expected 1";
      add(os.str());
    }
  }

  if (d.lattice_hint) {
    double q = *d.lattice_hint;
    if (!(q > 0.0)) {
      add("lattice_hint must be positive");
    } else {
      for (const auto& a : d.atoms) {
        double k = a.location / q;
        if (std::abs(k - std::round(k)) > 1e-12 * std::max(1.0, std::abs(k))) {
          std::ostringstream os;
          os << "atom location " << a.location << " not on lattice " << q << "*Z";
          add(os.str());
        }
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Weights and submultiplicative functions
// ---------------------------------------------------------------------------

struct WeightFunction {
  std::string name;
  std::function<double(double)> eval;
  double declared_B = 1.0;
  enum class Kind { weight, submultiplicative } kind = Kind::submultiplicative;

  double operator()(double x) const { return eval(x); }

  static WeightFunction one() {
    return {"1", [](double) { return 1.0; }, 1.0, Kind::weight};
  }
  /// (1+|x|)^s
  static WeightFunction polynomial(double s) {
    std::ostringstream os;
    os << "(1+|x|)^" << s;
    return {os.str(), [s](double x) { return std::pow(1.0 + std::abs(x), s); }, 1.0,
            Kind::weight};
  }
  /// e^{c sqrt|x|}
  static WeightFunction exp_sqrt(double c) {
    std::ostringstream os;
    os << "exp(" << c << " sqrt|x|)";
    return {os.str(), [c](double x) { return std::exp(c * std::sqrt(std::abs(x))); },
            1.0, Kind::weight};
  }
  /// e^{c|x|} (submultiplicative but fails the GRS condition for c != 0)
  static WeightFunction exp_linear(double c) {
    std::ostringstream os;
    os << "exp(" << c << " |x|)";
    return {os.str(), [c](double x) { return std::exp(c * std::abs(x)); }, 1.0,
            Kind::weight};
  }
};

struct GrsResult {
  enum class Verdict { satisfied, violated, inconclusive } verdict =
      Verdict::inconclusive;
  double slope_plus = 0.0;      ///< log w(x)/x at the horizon, x > 0
  double slope_minus = 0.0;     ///< log w(-x)/x at the horizon
  double decay_exponent = 0.0;  ///< fitted power of |log w(x)/x| in x
  double horizon = 0.0;
};

/// Samples s(x) = log w(+-x)/x on a geometric ladder up to the horizon.
/// satisfied: the slope estimate reaches tol (or a clear power-law decay
/// extrapolates below it); violated: the slope is flat and bounded away from
/// zero; anything else stays inconclusive.
inline GrsResult grs_check(const WeightFunction& w, double horizon = 1e6,
                           int samples = 48, double tol_grs = 1e-3) {
  if (!(horizon > 1.0)) fail(ErrorKind::input, "grs_check requires horizon > 1");
  if (samples < 8) samples = 8;
  GrsResult out;
  out.horizon = horizon;

  std::vector<double> xs(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k)
    xs[static_cast<std::size_t>(k)] =
        std::pow(horizon, static_cast<double>(k) / (samples - 1));

  // overflowing rungs are dropped: the ladder then ends where the weight is
  // still representable, which is exactly where growth is steepest
  std::vector<double> sp, sm;
  {
    std::vector<double> usable;
    for (double x : xs) {
      double wp = w(x), wm = w(-x);
      if (std::isnan(wp) || std::isnan(wm) || wp <= 0.0 || wm <= 0.0)
        fail(ErrorKind::input, "weight not evaluable (non-finite or non-positive)");
      if (std::isinf(wp) || std::isinf(wm)) continue;
      usable.push_back(x);
      sp.push_back(std::log(wp) / x);
      sm.push_back(std::log(wm) / x);
    }
    if (sp.size() < 8)
      fail(ErrorKind::input, "weight overflows on almost the whole ladder");
    xs = std::move(usable);
  }
  auto tail_mean = [](const std::vector<double>& s) {
    std::size_t n = s.size();
    return (s[n - 1] + s[n - 2] + s[n - 3]) / 3.0;
  };
  out.slope_plus = tail_mean(sp);
  out.slope_minus = tail_mean(sm);
  double end = std::max(std::abs(out.slope_plus), std::abs(out.slope_minus));

  if (end < tol_grs) {
    out.verdict = GrsResult::Verdict::satisfied;
    return out;
  }

  // power-law fit of max(|s+|,|s-|) against x on the upper half of the ladder
  std::vector<double> lx, ls;
  for (std::size_t k = xs.size() / 2; k < xs.size(); ++k) {
    double m = std::max(std::abs(sp[k]), std::abs(sm[k]));
    if (m > 0.0) {
      lx.push_back(std::log(xs[k]));
      ls.push_back(std::log(m));
    }
  }
  if (lx.size() >= 3) {
    double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      sx += lx[k];
      sy += ls[k];
      sxx += lx[k] * lx[k];
      sxy += lx[k] * ls[k];
    }
    out.decay_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }

  if (out.decay_exponent <= -0.1) {
    // extrapolate three decades past the horizon
    double extrap = end * std::pow(1e3, out.decay_exponent);
    if (extrap < tol_grs) {
      out.verdict = GrsResult::Verdict::satisfied;
      return out;
    }
  }
  if (std::abs(out.decay_exponent) < 0.05 && end > 10.0 * tol_grs) {
    out.verdict = GrsResult::Verdict::violated;
    return out;
  }
  out.verdict = GrsResult::Verdict::inconclusive;
  return out;
}

/// Largest observed w(x+y)/(w(x)w(y)) over grid pairs; the caller compares
/// against the declared constant.
inline double submultiplicative_check(const WeightFunction& w,
                                      std::span<const double> grid) {
  if (grid.empty()) fail(ErrorKind::input, "submultiplicative_check needs a grid");
  double worst = 0.0;
  for (double x : grid) {
    double wx = w(x);
    if (wx <= 0.0) fail(ErrorKind::input, "weight must be positive on the grid");
    for (double y : grid) {
      double wy = w(y);
      if (wy <= 0.0) fail(ErrorKind::input, "weight must be positive on the grid");
      worst = std::max(worst, w(x + y) / (wx * wy));
    }
  }
  return worst;
}

struct WeightedNorm {
  TailVerdict verdict = TailVerdict::finite;
  double value = 0.0;
};

/// int w(x)|f(x)| dx with shell-based divergence detection.  Sampled parts
/// contribute their declared tail bound beyond the grid.
inline WeightedNorm weighted_l1_norm(const DensitySpec& f, const WeightFunction& w,
                                     double horizon = 1e6) {
  // guard 0·inf: a vanished density contributes nothing however fast w grows
  auto weighted = [&](double x) {
    double fv = std::abs(f.value(x));
    return fv == 0.0 ? 0.0 : w(x) * fv;
  };
  auto integrand_right = [&](double x) { return weighted(x); };
  auto integrand_left = [&](double x) { return weighted(-x); };

  WeightedNorm out;
  double core = integrate([&](double x) { return weighted(x); }, -1.0, 1.0, 1e-11);
  auto right = integrate_tail(integrand_right, 1.0, horizon, 1e-12);
  auto left = integrate_tail(integrand_left, 1.0, horizon, 1e-12);

  // declared tails of sampled parts beyond their grids
  double declared = 0.0;
  for (const auto& c : f.parts) {
    if (c.kind != DensityKind::sampled || c.tail.kind == TailBound::Kind::none)
      continue;
    double lo = std::max(1.0, std::max(std::abs(c.xs.front()), std::abs(c.xs.back())));
    auto bound = [&](double x) {
      double b = c.tail.kind == TailBound::Kind::exponential
                     ? c.tail.scale * std::exp(-c.tail.rate * x)
                     : c.tail.scale * std::pow(x, -c.tail.rate);
      return std::abs(c.weight) * b * std::max(w(x), w(-x));
    };
    auto t = integrate_tail(bound, lo, horizon, 1e-12);
    if (t.verdict == TailVerdict::infinite) {
      out.verdict = TailVerdict::infinite;
      return out;
    }
    declared += t.value;
  }

  if (right.verdict == TailVerdict::infinite || left.verdict == TailVerdict::infinite) {
    out.verdict = TailVerdict::infinite;
    return out;
  }
  if (right.verdict == TailVerdict::inconclusive ||
      left.verdict == TailVerdict::inconclusive)
    out.verdict = TailVerdict::inconclusive;
  out.value = core + right.value + left.value + declared;
  return out;
}

}  // namespace qidlab
