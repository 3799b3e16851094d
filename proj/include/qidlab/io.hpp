#pragma once

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qidlab/base.hpp"
#include "qidlab/charfn.hpp"
#include "qidlab/model.hpp"
#include "qidlab/triplet.hpp"

namespace qidlab {

namespace detail {

inline std::string trim(std::string s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] inline void parse_fail(int lineno, const std::string& msg) {
  std::ostringstream os;
  os << "line " << lineno << ": " << msg;
  fail(ErrorKind::io, os.str());
}

inline double parse_double(const std::string& s, int lineno) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) parse_fail(lineno, "trailing characters after number '" + s + "'");
    return v;
  } catch (const std::exception&) {
    parse_fail(lineno, "not a number: '" + s + "'");
  }
}

/// Shortest decimal that round-trips the double bit-exactly.
inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Distribution spec files: sections [mixing], [atoms], [density]
// ---------------------------------------------------------------------------

/// Format:
///   [mixing]            p = 0.75, optional lattice = q
///   [atoms]             one "location mass" pair per line
///   [density]           kind = gaussian|laplace|uniform|exponential|sampled
///                       + named parameters; sampled grids list "x v" lines
///                       and may declare tail = exponential C RATE or
///                       tail = polynomial C ORDER
inline MixedDistribution parse_distribution(std::istream& in) {
  MixedDistribution d;
  d.p = 1.0;
  std::string section;
  std::string line;
  int lineno = 0;

  std::string dens_kind;
  std::map<std::string, double> dens_params;
  int dens_side = +1;
  TailBound dens_tail;
  std::vector<double> dens_x, dens_v;
  bool have_density_section = false;

  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') detail::parse_fail(lineno, "unterminated section header");
      section = line.substr(1, line.size() - 2);
      if (section != "mixing" && section != "atoms" && section != "density")
        detail::parse_fail(lineno, "unknown section [" + section + "]");
      if (section == "density") have_density_section = true;
      continue;
    }
    if (section.empty()) detail::parse_fail(lineno, "content before any section");

    auto eq = line.find('=');
    if (section == "mixing") {
      if (eq == std::string::npos) detail::parse_fail(lineno, "expected key = value");
      std::string key = detail::trim(line.substr(0, eq));
      std::string val = detail::trim(line.substr(eq + 1));
      if (key == "p") d.p = detail::parse_double(val, lineno);
      else if (key == "lattice") d.lattice_hint = detail::parse_double(val, lineno);
      else detail::parse_fail(lineno, "unknown mixing key '" + key + "'");
    } else if (section == "atoms") {
      std::istringstream ls(line);
      double loc, mass;
      if (!(ls >> loc >> mass)) detail::parse_fail(lineno, "expected 'location mass'");
      std::string rest;
      if (ls >> rest) detail::parse_fail(lineno, "trailing characters after atom");
      d.atoms.push_back({loc, mass});
    } else {  // density
      if (eq != std::string::npos) {
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        if (key == "kind") {
          dens_kind = val;
        } else if (key == "side") {
          if (val == "positive") dens_side = +1;
          else if (val == "negative") dens_side = -1;
          else detail::parse_fail(lineno, "side must be positive or negative");
        } else if (key == "tail") {
          std::istringstream ts(val);
          std::string kind;
          double c, r;
          if (!(ts >> kind >> c >> r))
            detail::parse_fail(lineno, "tail needs 'exponential|polynomial C RATE'");
          if (kind == "exponential") dens_tail = {TailBound::Kind::exponential, c, r};
          else if (kind == "polynomial") dens_tail = {TailBound::Kind::polynomial, c, r};
          else detail::parse_fail(lineno, "unknown tail kind '" + kind + "'");
        } else {
          dens_params[key] = detail::parse_double(val, lineno);
        }
      } else {
        std::istringstream ls(line);
        double x, v;
        if (!(ls >> x >> v)) detail::parse_fail(lineno, "expected 'x value' sample");
        dens_x.push_back(x);
        dens_v.push_back(v);
      }
    }
  }

  if (have_density_section) {
    auto need = [&](const char* name) {
      auto it = dens_params.find(name);
      if (it == dens_params.end())
        fail(ErrorKind::io, std::string("density parameter missing: ") + name);
      return it->second;
    };
    if (dens_kind == "gaussian")
      d.density = DensitySpec::gaussian(need("mean"), need("variance"));
    else if (dens_kind == "laplace")
      d.density = DensitySpec::laplace(need("location"), need("scale"));
    else if (dens_kind == "uniform")
      d.density = DensitySpec::uniform(need("lo"), need("hi"));
    else if (dens_kind == "exponential")
      d.density = DensitySpec::exponential(need("rate"), dens_side);
    else if (dens_kind == "sampled")
      d.density = DensitySpec::sampled(std::move(dens_x), std::move(dens_v), dens_tail);
    else
      fail(ErrorKind::io, "density kind missing or unknown: '" + dens_kind + "'");
  }
  return d;
}

inline MixedDistribution load_distribution(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open spec file " + path);
  return parse_distribution(in);
}

inline void write_distribution(std::ostream& out, const MixedDistribution& d) {
  out << "[mixing]\n";
  out << "p = " << detail::fmt_double(d.p) << "\n";
  if (d.lattice_hint) out << "lattice = " << detail::fmt_double(*d.lattice_hint) << "\n";
  out << "\n[atoms]\n";
  for (const auto& a : d.atoms)
    out << detail::fmt_double(a.location) << " " << detail::fmt_double(a.mass) << "\n";
  if (d.density && d.density->is_single_catalog()) {
    const auto& c = d.density->parts.front();
    out << "\n[density]\n";
    switch (c.kind) {
      case DensityKind::gaussian:
        out << "kind = gaussian\nmean = " << detail::fmt_double(c.p1)
            << "\nvariance = " << detail::fmt_double(c.p2) << "\n";
        break;
      case DensityKind::laplace:
        out << "kind = laplace\nlocation = " << detail::fmt_double(c.p1)
            << "\nscale = " << detail::fmt_double(c.p2) << "\n";
        break;
      case DensityKind::uniform:
        out << "kind = uniform\nlo = " << detail::fmt_double(c.p1)
            << "\nhi = " << detail::fmt_double(c.p2) << "\n";
        break;
      case DensityKind::exponential:
        out << "kind = exponential\nrate = " << detail::fmt_double(c.p1)
            << "\nside = " << (c.side > 0 ? "positive" : "negative") << "\n";
        break;
      default:
        break;
    }
  } else if (d.density) {
    out << "\n[density]\nkind = sampled\n";
    const auto& c = d.density->parts.front();
    if (c.tail.kind == TailBound::Kind::exponential)
      out << "tail = exponential " << detail::fmt_double(c.tail.scale) << " "
          << detail::fmt_double(c.tail.rate) << "\n";
    else if (c.tail.kind == TailBound::Kind::polynomial)
      out << "tail = polynomial " << detail::fmt_double(c.tail.scale) << " "
          << detail::fmt_double(c.tail.rate) << "\n";
    for (std::size_t j = 0; j < c.xs.size(); ++j)
      out << detail::fmt_double(c.xs[j]) << " " << detail::fmt_double(c.vs[j]) << "\n";
  }
}

// ---------------------------------------------------------------------------
// Triplet serialisation (bit-exact round trip)
// ---------------------------------------------------------------------------

inline void write_triplet(std::ostream& out, const QuasiLevyTriplet& t) {
  out << "[gaussian]\n";
  out << "a = " << detail::fmt_double(t.gaussian_a) << "\n";
  out << "\n[drift]\n";
  out << "gamma0 = " << detail::fmt_double(t.drift) << "\n";
  out << "\n[atoms]\n";
  for (const auto& [y, c] : t.atoms)
    out << detail::fmt_double(y) << " " << detail::fmt_double(c) << "\n";
  out << "\n[density-grid]\n";
  out << "x0 = " << detail::fmt_double(t.h.x0) << "\n";
  out << "step = " << detail::fmt_double(t.h.dx) << "\n";
  for (double v : t.h.v) out << detail::fmt_double(v) << "\n";
  out << "\n[cayley-index]\n";
  out << "m = " << t.cayley_index << "\n";
}

inline QuasiLevyTriplet parse_triplet(std::istream& in) {
  QuasiLevyTriplet t;
  std::string section, line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') detail::parse_fail(lineno, "unterminated section header");
      section = line.substr(1, line.size() - 2);
      continue;
    }
    auto eq = line.find('=');
    if (section == "gaussian") {
      if (eq == std::string::npos) detail::parse_fail(lineno, "expected a = value");
      t.gaussian_a = detail::parse_double(detail::trim(line.substr(eq + 1)), lineno);
    } else if (section == "drift") {
      if (eq == std::string::npos) detail::parse_fail(lineno, "expected gamma0 = value");
      t.drift = detail::parse_double(detail::trim(line.substr(eq + 1)), lineno);
    } else if (section == "atoms") {
      std::istringstream ls(line);
      double y, c;
      if (!(ls >> y >> c)) detail::parse_fail(lineno, "expected 'y c' pair");
      t.atoms.emplace_back(y, c);
    } else if (section == "density-grid") {
      if (eq != std::string::npos) {
        std::string key = detail::trim(line.substr(0, eq));
        double v = detail::parse_double(detail::trim(line.substr(eq + 1)), lineno);
        if (key == "x0") t.h.x0 = v;
        else if (key == "step") t.h.dx = v;
        else detail::parse_fail(lineno, "unknown density-grid key '" + key + "'");
      } else {
        t.h.v.push_back(detail::parse_double(line, lineno));
      }
    } else if (section == "cayley-index") {
      if (eq == std::string::npos) detail::parse_fail(lineno, "expected m = value");
      t.cayley_index = static_cast<int>(
          detail::parse_double(detail::trim(line.substr(eq + 1)), lineno));
    } else {
      detail::parse_fail(lineno, "content outside a known section");
    }
  }
  return t;
}

inline void save_triplet(const std::string& path, const QuasiLevyTriplet& t) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write triplet file " + path);
  write_triplet(out, t);
}

inline QuasiLevyTriplet load_triplet(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open triplet file " + path);
  return parse_triplet(in);
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

/// Columns: z, re, im, modulus.
inline void write_cf_csv(std::ostream& out, const CharFunctionGrid& g) {
  out << "z,re,im,modulus\n";
  for (std::size_t j = 0; j < g.z.size(); ++j)
    out << detail::fmt_double(g.z[j]) << "," << detail::fmt_double(g.v[j].real()) << ","
        << detail::fmt_double(g.v[j].imag()) << ","
        << detail::fmt_double(std::abs(g.v[j])) << "\n";
}

/// Columns: x, nu_density (the combined h + Cayley kernel away from 0).
inline void write_nu_csv(std::ostream& out, const QuasiLevyTriplet& t, double xmax,
                         std::size_t n) {
  out << "x,nu_density\n";
  for (std::size_t j = 0; j < n; ++j) {
    double x = -xmax + 2.0 * xmax * static_cast<double>(j) / static_cast<double>(n - 1);
    if (std::abs(x) < 1e-9) continue;  // kernel singular at 0
    out << detail::fmt_double(x) << "," << detail::fmt_double(t.nu_density(x)) << "\n";
  }
}

}  // namespace qidlab
