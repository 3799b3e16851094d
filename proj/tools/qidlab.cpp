// qidlab command line: decide quasi-infinite divisibility, extract and
// serialise characteristic triplets, run moment equivalence reports, and dump
// plot data for mixed atom + density distributions.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qidlab/qidlab.hpp"

namespace {

using namespace qidlab;

constexpr int kExitQid = 0;
constexpr int kExitNotQid = 1;
constexpr int kExitUndecided = 2;
constexpr int kExitInputError = 3;
constexpr int kExitStageError = 4;

struct CommonOpts {
  double window = 0.0;
  double tol_zero = 1e-9;
  double tol_qid = 1e-4;
  long lattice = 0;  ///< declares atoms on the lattice (1/N)Z
  double horizon = 1e3;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--window", o.window, "scan window override (0 = automatic)");
  cmd->add_option("--tol-zero", o.tol_zero, "zero certification threshold");
  cmd->add_option("--tol-qid", o.tol_qid, "QID decision threshold on inf |F|");
  cmd->add_option("--lattice", o.lattice,
                  "declare atom locations on the lattice (1/N)Z");
  cmd->add_option("--horizon", o.horizon, "moment/tail regression horizon");
}

MixedDistribution load(const std::string& path, const CommonOpts& o) {
  MixedDistribution d = load_distribution(path);
  if (o.lattice > 0) d.lattice_hint = 1.0 / static_cast<double>(o.lattice);
  auto rep = validate_distribution(d);
  if (!rep.valid()) {
    std::ostringstream os;
    os << "invalid distribution spec:";
    for (const auto& v : rep.violations) os << "\n  - " << v;
    fail(ErrorKind::input, os.str());
  }
  return d;
}

QidSettings qid_settings(const CommonOpts& o) {
  QidSettings s;
  s.tau_zero = o.tol_zero;
  s.tau_qid = o.tol_qid;
  s.window = o.window;
  return s;
}

const char* verdict_name(Qid v) {
  switch (v) {
    case Qid::QID: return "QID";
    case Qid::notQID: return "notQID";
    case Qid::undecided: return "undecided";
  }
  return "?";
}

int cmd_check(const std::string& spec, const CommonOpts& o) {
  MixedDistribution d = load(spec, o);
  QidVerdict v = qid_check(d, qid_settings(o));
  std::printf("verdict:   %s\n", verdict_name(v.verdict));
  std::printf("inf|F|:    %.6e (tau_qid %.1e, tau_zero %.1e)\n", v.eps_f, v.tau_qid,
              v.tau_zero);
  std::printf("inf|F_d|:  %.6e\n", v.eps_d);
  std::printf("window:    %.6g\n", v.window);
  if (v.zero)
    std::printf("zero:      z* = %.9f  (|F| = %.3e)\n", v.zero->z, v.zero->modulus);
  switch (v.verdict) {
    case Qid::QID: return kExitQid;
    case Qid::notQID: return kExitNotQid;
    case Qid::undecided: return kExitUndecided;
  }
  return kExitUndecided;
}

int cmd_triplet(const std::string& spec, const std::string& out_path, double range,
                const CommonOpts& o) {
  MixedDistribution d = load(spec, o);
  ExtractSettings es;
  es.qid = qid_settings(o);
  auto res = extract_triplet(d, es);
  save_triplet(out_path, res.triplet);

  double worst = 0.0;
  for (int i = -400; i <= 400; ++i) {
    double z = range * static_cast<double>(i) / 400.0;
    worst = std::max(worst, std::abs(reconstruct_cf(res.triplet, z) - eval_cf(d, z)));
  }
  std::printf("triplet:    %s\n", out_path.c_str());
  std::printf("cayley m:   %d\n", res.triplet.cayley_index);
  std::printf("drift:      %.12g\n", res.triplet.drift);
  std::printf("atoms:      %zu\n", res.triplet.atoms.size());
  std::printf("integral h: %.12g\n", res.report.integral_h);
  std::printf("round-trip: sup |reconstruct - cf| = %.3e on [-%g, %g]\n", worst, range,
              range);
  for (const auto& w : res.report.warnings) std::printf("warning:    %s\n", w.c_str());
  return 0;
}

WeightFunction parse_weight(const std::string& name) {
  auto colon = name.find(':');
  std::string head = name.substr(0, colon);
  double arg = 0.0;
  if (colon != std::string::npos) arg = std::stod(name.substr(colon + 1));
  if (head == "one") return WeightFunction::one();
  if (head == "poly") return WeightFunction::polynomial(arg);
  if (head == "expsqrt") return WeightFunction::exp_sqrt(arg);
  if (head == "explinear") return WeightFunction::exp_linear(arg);
  fail(ErrorKind::input,
       "unknown weight '" + name + "' (use one, poly:S, expsqrt:C, explinear:C)");
}

int cmd_moments(const std::string& spec, const std::string& weight,
                const CommonOpts& o) {
  MixedDistribution d = load(spec, o);
  WeightFunction H = parse_weight(weight);
  MomentSettings ms;
  ms.horizon = o.horizon;
  ms.extract.qid = qid_settings(o);
  MomentReport rep = moment_equivalence_report(d, H, ms);
  std::printf("weight:         %s\n", H.name.c_str());
  std::fputs(rep.text().c_str(), stdout);
  std::printf("csv:            %s\n", rep.csv_row().c_str());
  return rep.consistent ? 0 : 1;
}

int cmd_plot_data(const std::string& spec, double range, std::size_t points,
                  const std::string& out_path, const std::string& nu_path,
                  const CommonOpts& o) {
  MixedDistribution d = load(spec, o);
  CharFunctionGrid g = sample_cf(d, -range, range, points);
  std::ofstream out(out_path);
  if (!out) fail(ErrorKind::io, "cannot write " + out_path);
  write_cf_csv(out, g);
  std::printf("cf data:    %s (%zu rows)\n", out_path.c_str(), g.z.size());
  if (!nu_path.empty()) {
    ExtractSettings es;
    es.qid = qid_settings(o);
    auto res = extract_triplet(d, es);
    std::ofstream nout(nu_path);
    if (!nout) fail(ErrorKind::io, "cannot write " + nu_path);
    write_nu_csv(nout, res.triplet, 5.0, 1001);
    std::printf("nu data:    %s\n", nu_path.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasi-infinite divisibility analysis for atom + density mixtures"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string spec, out_path = "triplet.txt", weight = "poly:2";
  std::string plot_out = "cf.csv", nu_out;
  double range = 20.0;
  std::size_t points = 801;

  auto* check = app.add_subcommand("check", "decide quasi-infinite divisibility");
  check->add_option("spec", spec, "distribution spec file")->required();
  add_common(check, opts);

  auto* triplet = app.add_subcommand("triplet", "extract and save the triplet");
  triplet->add_option("spec", spec, "distribution spec file")->required();
  triplet->add_option("output", out_path, "triplet output file");
  triplet->add_option("--range", range, "round-trip verification half-range");
  add_common(triplet, opts);

  auto* moments = app.add_subcommand("moments", "H-moment equivalence report");
  moments->add_option("spec", spec, "distribution spec file")->required();
  moments->add_option("--weight", weight, "one | poly:S | expsqrt:C | explinear:C");
  add_common(moments, opts);

  auto* plot = app.add_subcommand("plot-data", "emit CSV of z, re, im, |F|");
  plot->add_option("spec", spec, "distribution spec file")->required();
  plot->add_option("--range", range, "half-range in z");
  plot->add_option("--points", points, "number of samples");
  plot->add_option("--output", plot_out, "CSV output path");
  plot->add_option("--nu", nu_out, "also write nu-density samples to this path");
  add_common(plot, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return cmd_check(spec, opts);
    if (triplet->parsed()) return cmd_triplet(spec, out_path, range, opts);
    if (moments->parsed()) return cmd_moments(spec, weight, opts);
    if (plot->parsed()) return cmd_plot_data(spec, range, points, plot_out, nu_out, opts);
  } catch (const qidlab::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    switch (e.kind()) {
      case qidlab::ErrorKind::io:
      case qidlab::ErrorKind::input:
        return kExitInputError;
      default:
        return kExitStageError;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInputError;
  }
  return 0;
}
