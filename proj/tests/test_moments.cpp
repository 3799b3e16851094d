#include <catch2/catch_amalgamated.hpp>

#include "qidlab/moments.hpp"
#include "oracles.hpp"

using namespace qidlab;

namespace {

MixedDistribution bernoulli() {
  return MixedDistribution::discrete({{0.0, 0.75}, {1.0, 0.25}}, 1.0);
}
MixedDistribution ex_gauss_atom() {
  return MixedDistribution::mixed(0.001, {{0.0, 1.0}},
                                  DensitySpec::gaussian(1.0, 1.0), 1.0);
}
QuasiLevyTriplet m_only_triplet(int m) {
  QuasiLevyTriplet t;
  t.cayley_index = m;
  return t;
}

}  // namespace

TEST_CASE("h_moment_dist: atoms only") {
  auto H = WeightFunction::polynomial(2.0);
  auto m0 = h_moment_dist(MixedDistribution::point_mass(0.0), H);
  REQUIRE(m0.verdict == TailVerdict::finite);
  REQUIRE(m0.value == Catch::Approx(1.0));

  auto m1 = h_moment_dist(bernoulli(), H);
  REQUIRE(m1.value == Catch::Approx(1.75));
}

TEST_CASE("h_moment_dist: gaussian tail dominates a stretched exponential") {
  auto m = h_moment_dist(ex_gauss_atom(), WeightFunction::exp_sqrt(1.0));
  REQUIRE(m.verdict == TailVerdict::finite);
  REQUIRE(std::isfinite(m.value));
  REQUIRE(m.value > 1.0);
}

TEST_CASE("h_moment_nu: zero triplet vanishes in all variants") {
  QuasiLevyTriplet t;
  for (auto v : {NuVariant::plus, NuVariant::minus, NuVariant::total})
    REQUIRE(h_moment_nu(t, WeightFunction::polynomial(2.0), v).value == 0.0);
}

TEST_CASE("h_moment_nu: Cayley kernel against the trivial weight") {
  auto t = m_only_triplet(1);
  auto m = h_moment_nu(t, WeightFunction::one(), NuVariant::total);
  REQUIRE(m.verdict == TailVerdict::finite);
  REQUIRE(std::abs(m.value - testoracle::kTwoE1At1) < 1e-8);
}

TEST_CASE("h_moment_nu: Bernoulli triplet with a stretched-exponential weight") {
  auto res = extract_triplet(bernoulli());
  auto m = h_moment_nu(res.triplet, WeightFunction::exp_sqrt(1.0), NuVariant::total);
  REQUIRE(m.verdict == TailVerdict::finite);
  // Σ_{k>=2} e^{sqrt k} 3^{-k}/k (the atom at 1 is excluded: strict |x| > 1)
  REQUIRE(std::abs(m.value - testoracle::kBernExpSqrtTail) < 1e-9);
}

TEST_CASE("moment_equivalence_report: consistent verdicts") {
  auto r1 = moment_equivalence_report(bernoulli(), WeightFunction::polynomial(3.0));
  REQUIRE(r1.consistent);
  REQUIRE(r1.mu.verdict == TailVerdict::finite);

  auto r2 = moment_equivalence_report(ex_gauss_atom(), WeightFunction::polynomial(2.0));
  REQUIRE(r2.consistent);

  auto r3 = moment_equivalence_report(MixedDistribution::point_mass(0.0),
                                      WeightFunction::exp_sqrt(0.5));
  REQUIRE(r3.consistent);
  REQUIRE(r3.nu_total.value == 0.0);
}

TEST_CASE("moment_equivalence_report: GRS guard rejects e^{|x|}") {
  REQUIRE_THROWS_AS(
      moment_equivalence_report(bernoulli(), WeightFunction::exp_linear(1.0)), Error);
  try {
    moment_equivalence_report(bernoulli(), WeightFunction::exp_linear(1.0));
  } catch (const Error& e) {
    REQUIRE(e.kind() == ErrorKind::input);
    REQUIRE(std::string(e.what()).find("GRS") != std::string::npos);
  }
}

TEST_CASE("moments are monotone in the weight") {
  auto h2 = WeightFunction::polynomial(2.0);
  auto h5 = WeightFunction::polynomial(5.0);
  auto d = ex_gauss_atom();
  REQUIRE(h_moment_dist(d, h2).value <= h_moment_dist(d, h5).value);

  auto t = extract_triplet(d).triplet;
  REQUIRE(h_moment_nu(t, h2, NuVariant::total).value <=
          h_moment_nu(t, h5, NuVariant::total).value);
}

TEST_CASE("the Cayley term has finite H-moment for every GRS catalog weight") {
  auto t = m_only_triplet(1);
  for (const auto& H : {WeightFunction::polynomial(2.0), WeightFunction::polynomial(5.0),
                        WeightFunction::exp_sqrt(0.5), WeightFunction::exp_sqrt(1.0)}) {
    auto m = h_moment_nu(t, H, NuVariant::total);
    REQUIRE(m.verdict == TailVerdict::finite);
    REQUIRE(std::isfinite(m.value));
  }
}

TEST_CASE("report text and csv rows carry the verdicts") {
  auto r = moment_equivalence_report(bernoulli(), WeightFunction::polynomial(2.0));
  auto text = r.text();
  REQUIRE(text.find("consistent:     yes") != std::string::npos);
  auto csv = r.csv_row();
  REQUIRE(csv.find("finite") != std::string::npos);
  REQUIRE(csv.back() == '1');
}
