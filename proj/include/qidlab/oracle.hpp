#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include "qidlab/base.hpp"
#include "qidlab/charfn.hpp"
#include "qidlab/model.hpp"
#include "qidlab/quad.hpp"

namespace qidlab {

// ---------------------------------------------------------------------------
// Lattice embedding
// ---------------------------------------------------------------------------

/// Discrete part of a distribution embedded exactly into the lattice (1/N)Z.
struct LatticeDistribution {
  long N = 1;
  std::vector<std::pair<long, double>> points;  ///< (index, mass), ascending
};

inline LatticeDistribution lattice_embed(const MixedDistribution& d, long N) {
  if (N <= 0) fail(ErrorKind::input, "lattice_embed: N must be positive");
  LatticeDistribution out;
  out.N = N;
  for (const auto& a : d.atoms) {
    double t = a.location * static_cast<double>(N);
    long k = std::lround(t);
    if (std::abs(t - static_cast<double>(k)) > 1e-9 * std::max(1.0, std::abs(t))) {
      std::ostringstream os;
      os << "lattice_embed: atom at " << a.location << " is off the (1/" << N
         << ")Z lattice";
      fail(ErrorKind::embedding, os.str());
    }
    out.points.emplace_back(k, a.mass);
  }
  std::sort(out.points.begin(), out.points.end());
  return out;
}

// ---------------------------------------------------------------------------
// Circle-FFT triplet oracle
// ---------------------------------------------------------------------------

struct FftLatticeResult {
  bool qid = false;       ///< trigonometric polynomial zero-free on the circle
  double circle_min = 0.0;
  double theta_min = 0.0;  ///< notQID certificate location when !qid
  std::map<long, double> coef;  ///< lattice index k != 0 -> c (locations k/N)
  long winding = 0;
  double drift = 0.0;  ///< winding / N
  double realness_residue = 0.0;
};

/// Distinguished log of P(e^{i theta}) over one circle revolution: phase
/// unwrapping for the winding, an FFT for the Fourier coefficients of
/// log(P e^{-iw theta}).  Exact to coefficient aliasing, which for zero-free
/// polynomials with a healthy margin is far below 1e-12 at 2^16 points.
inline FftLatticeResult fft_lattice_triplet(const LatticeDistribution& ld,
                                            std::size_t M = (1u << 16),
                                            double drop = 1e-13) {
  if (ld.points.empty()) fail(ErrorKind::input, "fft_lattice_triplet: empty");
  FftLatticeResult out;
  std::vector<cdouble> P(M, 0.0);
  for (const auto& [k, mass] : ld.points) {
    cdouble rot = 1.0;
    cdouble step = std::exp(cdouble(0.0, kTwoPi * static_cast<double>(k) /
                                             static_cast<double>(M)));
    for (std::size_t j = 0; j < M; ++j) {
      P[j] += mass * rot;
      rot *= step;
      if ((j & 4095u) == 4095u)
        rot = std::exp(cdouble(0.0, kTwoPi * static_cast<double>(k) *
                                        static_cast<double>(j + 1) /
                                        static_cast<double>(M)));
    }
  }
  std::size_t jmin = 0;
  double vmin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < M; ++j) {
    double a = std::abs(P[j]);
    if (a < vmin) { vmin = a; jmin = j; }
  }
  // polish the circle minimum
  auto pval = [&](double th) {
    cdouble s = 0.0;
    for (const auto& [k, mass] : ld.points)
      s += mass * std::exp(cdouble(0.0, th * static_cast<double>(k)));
    return std::abs(s);
  };
  double th0 = kTwoPi * static_cast<double>(jmin) / static_cast<double>(M);
  double dth = kTwoPi / static_cast<double>(M);
  double thx = th0;
  out.circle_min = detail::golden_min(pval, th0 - dth, th0 + dth, thx);
  out.theta_min = thx;
  out.qid = out.circle_min > 1e-6;
  if (!out.qid) return out;

  // unwrap once around the circle
  std::vector<double> phase(M);
  phase[0] = std::arg(P[0]);
  for (std::size_t j = 1; j < M; ++j) {
    double d = std::arg(P[j] / P[j - 1]);
    phase[j] = phase[j - 1] + d;
  }
  double total = phase[M - 1] + std::arg(P[0] / P[M - 1]) - phase[0];
  out.winding = std::lround(total / kTwoPi);
  out.drift = static_cast<double>(out.winding) / static_cast<double>(ld.N);

  std::vector<cdouble> G(M);
  for (std::size_t j = 0; j < M; ++j) {
    double th = kTwoPi * static_cast<double>(j) / static_cast<double>(M);
    G[j] = cdouble(std::log(std::abs(P[j])),
                   phase[j] - static_cast<double>(out.winding) * th);
  }
  fft_radix2(G, false);
  long half = static_cast<long>(M / 2);
  for (std::size_t j = 0; j < M; ++j) {
    long k = static_cast<long>(j) <= half ? static_cast<long>(j)
                                          : static_cast<long>(j) - static_cast<long>(M);
    if (k == 0) continue;
    cdouble c = G[j] / static_cast<double>(M);
    if (std::abs(c) < drop) continue;
    out.realness_residue = std::max(out.realness_residue, std::abs(c.imag()));
    out.coef[k] = c.real();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact power-series oracle for dominant-atom distributions
// ---------------------------------------------------------------------------

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::rational<BigInt>;

namespace detail {

/// Exact rational from a double: snaps to a small-denominator fraction when
/// one matches to 1e-12, otherwise uses the exact binary representation.
inline BigRat rational_of(double x) {
  long p = 0, q = 1;
  if (to_rational(x, 1000000, 1e-12, p, q) &&
      std::abs(x - static_cast<double>(p) / static_cast<double>(q)) <
          1e-15 * std::max(1.0, std::abs(x)))
    return BigRat(BigInt(p), BigInt(q));
  int e = 0;
  double m = std::frexp(x, &e);  // x = m·2^e with |m| in [0.5, 1)
  long long num = std::llround(std::ldexp(m, 53));
  int shift = 53 - e;
  if (shift >= 0) return BigRat(BigInt(num), BigInt(1) << shift);
  return BigRat(BigInt(num) << (-shift), BigInt(1));
}

}  // namespace detail

struct SeriesLogResult {
  std::map<long, double> coef;  ///< lattice index -> coefficient of log
  long winding = 0;             ///< index of the dominant atom
  double constant = 0.0;        ///< log of the dominant mass
};

/// Coefficients of log(Σ a_k w^k) by formal expansion around the dominant
/// atom: log(a_dom w^{k_dom}) + log(1 + Σ r w^d).  Arithmetic is exact
/// rational; one-sided exponent sets terminate exactly at order K, mixed sets
/// are cut once the geometric bound drops below 1e-25.
inline SeriesLogResult series_log_coeffs(const LatticeDistribution& ld, long K) {
  if (ld.points.empty()) fail(ErrorKind::input, "series_log_coeffs: empty");
  std::size_t dom = 0;
  for (std::size_t j = 1; j < ld.points.size(); ++j)
    if (ld.points[j].second > ld.points[dom].second) dom = j;

  BigRat a_dom = detail::rational_of(ld.points[dom].second);
  BigRat rest(0);
  for (std::size_t j = 0; j < ld.points.size(); ++j)
    if (j != dom) rest += detail::rational_of(ld.points[j].second);
  if (!(a_dom > rest))
    fail(ErrorKind::divergence,
         "series_log_coeffs: dominant mass does not exceed the remaining mass");

  std::map<long, BigRat> v;
  bool one_sided_pos = true, one_sided_neg = true;
  double rho = 0.0;
  for (std::size_t j = 0; j < ld.points.size(); ++j) {
    if (j == dom) continue;
    long dexp = ld.points[j].first - ld.points[dom].first;
    v[dexp] = detail::rational_of(ld.points[j].second) / a_dom;
    rho += ld.points[j].second / ld.points[dom].second;
    if (dexp < 0) one_sided_pos = false;
    if (dexp > 0) one_sided_neg = false;
  }

  long n_max;
  if (one_sided_pos || one_sided_neg) {
    long min_d = std::numeric_limits<long>::max();
    for (const auto& [e, c] : v) min_d = std::min(min_d, std::labs(e));
    n_max = K / std::max(1L, min_d) + 1;
  } else {
    n_max = static_cast<long>(std::ceil(std::log(1e-25 * (1.0 - rho)) / std::log(rho)));
    n_max = std::max(n_max, 4L);
  }

  long span = 0;
  for (const auto& [e, c] : v) span = std::max(span, std::labs(e));
  long window = K + n_max * span;

  std::map<long, BigRat> acc;   // log(1+v)
  std::map<long, BigRat> vpow;  // v^n
  vpow[0] = BigRat(1);
  for (long n = 1; n <= n_max; ++n) {
    std::map<long, BigRat> next;
    for (const auto& [e1, c1] : vpow)
      for (const auto& [e2, c2] : v) {
        long e = e1 + e2;
        if (std::labs(e) > window) continue;
        next[e] += c1 * c2;
      }
    vpow = std::move(next);
    BigRat sign = (n % 2 == 1) ? BigRat(1) : BigRat(-1);
    for (const auto& [e, c] : vpow) acc[e] += sign * c / BigRat(n);
    if (vpow.empty()) break;
  }

  SeriesLogResult out;
  out.winding = ld.points[dom].first;
  out.constant = std::log(ld.points[dom].second);
  for (const auto& [e, c] : acc) {
    if (std::labs(e) > K) continue;
    if (e == 0) {
      // the origin coefficient belongs to the normalisation constant
      out.constant += boost::rational_cast<double>(c);
      continue;
    }
    out.coef[e] = boost::rational_cast<double>(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Convolution factorisation check
// ---------------------------------------------------------------------------

struct ConvolutionReport {
  MixedDistribution convolved;
  double cf_residual = 0.0;  ///< max |F12 - F1 F2| on the check grid
  double cf_tol = 1e-9;      ///< expected accuracy of the convolved evaluation
  Qid v1 = Qid::undecided, v2 = Qid::undecided, v12 = Qid::undecided;
  bool verdicts_consistent = false;
  bool any_undecided = false;
};

namespace detail {

inline void append_shifted(DensitySpec& dst, const DensitySpec& src, double shift,
                           double weight) {
  for (auto c : src.parts) {
    c.shift += shift;
    c.weight *= weight;
    dst.parts.push_back(std::move(c));
  }
}

/// Pairwise convolution of density components: closed form for gaussians,
/// sampled quadrature fallback otherwise (returns true when exact).
inline bool convolve_components(const DensityComponent& a, const DensityComponent& b,
                                double weight, DensitySpec& dst) {
  if (a.kind == DensityKind::gaussian && b.kind == DensityKind::gaussian) {
    DensityComponent c;
    c.kind = DensityKind::gaussian;
    c.p1 = a.p1 + b.p1;
    c.p2 = a.p2 + b.p2;
    c.shift = a.shift + b.shift;
    c.weight = weight * a.weight * b.weight;
    dst.parts.push_back(std::move(c));
    return true;
  }
  // quadrature fallback on a fixed grid
  double reach = 25.0;
  double step = 0.02;
  std::size_t n = static_cast<std::size_t>(2.0 * reach / step) + 1;
  std::vector<double> xs(n), vs(n);
  for (std::size_t j = 0; j < n; ++j) {
    double x = -reach + step * static_cast<double>(j);
    xs[j] = x;
    vs[j] = integrate([&](double t) { return a.value(t) * b.value(x - t); }, -reach,
                      reach, 1e-10);
  }
  DensityComponent c;
  c.kind = DensityKind::sampled;
  c.xs = std::move(xs);
  c.vs = std::move(vs);
  c.weight = weight;
  c.tail = {TailBound::Kind::exponential, 1.0, 0.5};
  dst.parts.push_back(std::move(c));
  return false;
}

}  // namespace detail

/// Convolve two mixed distributions: exact atom algebra, density mixtures of
/// shifted components, pairwise ac convolution (exact for gaussians).
inline MixedDistribution convolve(const MixedDistribution& d1,
                                  const MixedDistribution& d2, bool* exact = nullptr) {
  MixedDistribution out;
  out.p = d1.p * d2.p;
  std::map<double, double> atom_map;
  for (const auto& a : d1.atoms)
    for (const auto& b : d2.atoms) {
      double loc = a.location + b.location;
      bool merged = false;
      for (auto& [l, m] : atom_map)
        if (std::abs(l - loc) <= 1e-12) {
          m += a.mass * b.mass;
          merged = true;
          break;
        }
      if (!merged) atom_map[loc] += a.mass * b.mass;
    }
  for (const auto& [l, m] : atom_map) out.atoms.push_back({l, m});

  bool all_exact = true;
  double mass_ac = 1.0 - out.p;
  if (mass_ac > 0.0) {
    DensitySpec f;
    double w1 = d1.p * (1.0 - d2.p) / mass_ac;      // atoms1 * f2
    double w2 = (1.0 - d1.p) * d2.p / mass_ac;      // f1 * atoms2
    double w3 = (1.0 - d1.p) * (1.0 - d2.p) / mass_ac;  // f1 * f2
    if (w1 > 0.0 && d2.density)
      for (const auto& a : d1.atoms)
        detail::append_shifted(f, *d2.density, a.location, w1 * a.mass);
    if (w2 > 0.0 && d1.density)
      for (const auto& b : d2.atoms)
        detail::append_shifted(f, *d1.density, b.location, w2 * b.mass);
    if (w3 > 0.0 && d1.density && d2.density)
      for (const auto& ca : d1.density->parts)
        for (const auto& cb : d2.density->parts)
          all_exact &= detail::convolve_components(ca, cb, w3, f);
    out.density = std::move(f);
  }

  if (d1.lattice_hint && d2.lattice_hint) {
    long pp = 0, qq = 0;
    if (to_rational(*d2.lattice_hint / *d1.lattice_hint, 1024, 1e-9, pp, qq) && pp > 0)
      out.lattice_hint = *d1.lattice_hint / static_cast<double>(qq);
  }
  if (exact) *exact = all_exact;
  return out;
}

/// Corollary check: mu = d1 * d2 is QID iff both factors are; also verifies
/// characteristic-function multiplicativity on a grid.
inline ConvolutionReport convolution_factor_check(const MixedDistribution& d1,
                                                  const MixedDistribution& d2,
                                                  const QidSettings& qs = {},
                                                  double zmax = 30.0,
                                                  std::size_t npts = 601) {
  ConvolutionReport rep;
  bool exact = true;
  rep.convolved = convolve(d1, d2, &exact);
  rep.cf_tol = exact ? 1e-9 : 1e-3;

  double worst = 0.0;
  for (std::size_t j = 0; j < npts; ++j) {
    double z = -zmax + 2.0 * zmax * static_cast<double>(j) /
                           static_cast<double>(npts - 1);
    cdouble lhs = eval_cf(rep.convolved, z);
    cdouble rhs = eval_cf(d1, z) * eval_cf(d2, z);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  rep.cf_residual = worst;

  rep.v1 = qid_check(d1, qs).verdict;
  rep.v2 = qid_check(d2, qs).verdict;
  rep.v12 = qid_check(rep.convolved, qs).verdict;
  rep.any_undecided = rep.v1 == Qid::undecided || rep.v2 == Qid::undecided ||
                      rep.v12 == Qid::undecided;
  bool both_qid = rep.v1 == Qid::QID && rep.v2 == Qid::QID;
  bool violation = (rep.v12 == Qid::QID &&
                    (rep.v1 == Qid::notQID || rep.v2 == Qid::notQID)) ||
                   (rep.v12 == Qid::notQID && both_qid);
  rep.verdicts_consistent = !violation;
  return rep;
}

// ---------------------------------------------------------------------------
// Seeded corpus
// ---------------------------------------------------------------------------

struct CorpusSpec {
  std::uint64_t seed = 20250809;
  int count = 100;   ///< pure lattice entries
  int mixed = 12;    ///< additional entries with gaussian/laplace ac parts
  int max_atoms = 8;
  double margin = 0.05;  ///< rejection threshold for the circle minimum
};

inline CorpusSpec parse_corpus_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open corpus manifest " + path);
  CorpusSpec spec;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      s.erase(0, s.find_first_not_of(" \t"));
      auto end = s.find_last_not_of(" \t\r");
      s.erase(end == std::string::npos ? 0 : end + 1);
    };
    trim(key);
    trim(val);
    try {
      if (key == "seed") spec.seed = std::stoull(val);
      else if (key == "count") spec.count = std::stoi(val);
      else if (key == "mixed") spec.mixed = std::stoi(val);
      else if (key == "max_atoms") spec.max_atoms = std::stoi(val);
      else if (key == "margin") spec.margin = std::stod(val);
    } catch (const std::exception&) {
      std::ostringstream os;
      os << "corpus manifest line " << lineno << ": bad value for " << key;
      fail(ErrorKind::io, os.str());
    }
  }
  return spec;
}

/// Deterministic corpus: Dirichlet masses on small integer supports, rejected
/// until the circle minimum of the discrete part clears the margin.  The
/// mixed tail alternates gaussian and laplace ac parts, filtered away from
/// the undecidability band so verdict equivalence is well-posed.
inline std::vector<MixedDistribution> make_corpus(const CorpusSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> natoms_dist(2, spec.max_atoms);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto draw_atoms = [&]() {
    int n = natoms_dist(rng);
    std::vector<int> locs;
    while (static_cast<int>(locs.size()) < n) {
      int c = static_cast<int>(unit(rng) * 12.0);
      bool dup = false;
      for (int l : locs) dup |= l == c;
      if (!dup) locs.push_back(c);
    }
    std::sort(locs.begin(), locs.end());
    std::vector<double> mass(locs.size());
    double tot = 0.0;
    for (auto& m : mass) {
      m = -std::log(std::max(1e-300, unit(rng)));  // Exp(1) -> Dirichlet(1)
      tot += m;
    }
    std::vector<Atom> atoms;
    for (std::size_t j = 0; j < locs.size(); ++j)
      atoms.push_back({static_cast<double>(locs[j]), mass[j] / tot});
    // exact renormalisation against rounding drift
    double s = 0.0;
    for (const auto& a : atoms) s += a.mass;
    for (auto& a : atoms) a.mass /= s;
    return atoms;
  };

  auto circle_min = [&](const std::vector<Atom>& atoms) {
    ApScanSettings as;
    as.lattice_hint = 1.0;
    return inf_modulus_ap(atoms, as).min_value;
  };

  std::vector<MixedDistribution> corpus;
  int guard = 0;
  while (static_cast<int>(corpus.size()) < spec.count) {
    if (++guard > 100 * spec.count)
      fail(ErrorKind::input, "make_corpus: rejection loop did not terminate");
    auto atoms = draw_atoms();
    if (circle_min(atoms) <= spec.margin) continue;
    corpus.push_back(MixedDistribution::discrete(atoms, 1.0));
  }
  int added = 0;
  while (added < spec.mixed) {
    if (++guard > 100 * (spec.count + spec.mixed))
      fail(ErrorKind::input, "make_corpus: rejection loop did not terminate");
    auto atoms = draw_atoms();
    if (circle_min(atoms) <= spec.margin) continue;
    double p = 0.35 + 0.5 * unit(rng);
    DensitySpec f = (added % 2 == 0)
                        ? DensitySpec::gaussian(-2.0 + 4.0 * unit(rng),
                                                0.5 + 2.0 * unit(rng))
                        : DensitySpec::laplace(-1.0 + 2.0 * unit(rng),
                                               0.6 + 1.0 * unit(rng));
    MixedDistribution d = MixedDistribution::mixed(p, atoms, f, 1.0);
    // keep the equivalence check away from the undecidability band
    if (qid_check(d).eps_f <= 1e-3) continue;
    corpus.push_back(std::move(d));
    ++added;
  }
  return corpus;
}

}  // namespace qidlab
