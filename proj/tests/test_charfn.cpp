#include <catch2/catch_amalgamated.hpp>

#include "qidlab/charfn.hpp"
#include "oracles.hpp"

using namespace qidlab;

namespace {

MixedDistribution bernoulli() {
  return MixedDistribution::discrete({{0.0, 0.75}, {1.0, 0.25}}, 1.0);
}
MixedDistribution sqrt2_half() {
  return MixedDistribution::discrete({{0.0, 0.5}, {std::sqrt(2.0), 0.5}});
}
MixedDistribution tri_kronecker() {
  return MixedDistribution::discrete(
      {{0.0, 0.5}, {1.0, 0.3}, {std::sqrt(2.0), 0.2}});
}
MixedDistribution ex_gauss_atom() {
  return MixedDistribution::mixed(0.001, {{0.0, 1.0}},
                                  DensitySpec::gaussian(1.0, 1.0), 1.0);
}

}  // namespace

TEST_CASE("eval_cf: point mass is constant one") {
  auto d = MixedDistribution::point_mass(0.0);
  for (double z : {0.0, 1.0, -17.3, 100.0})
    REQUIRE(std::abs(eval_cf(d, z) - 1.0) < 1e-15);
}

TEST_CASE("eval_cf: Bernoulli at pi") {
  REQUIRE(std::abs(eval_cf(bernoulli(), kPi) - 0.5) < 1e-14);
}

TEST_CASE("eval_cf: atom plus gaussian closed form") {
  auto d = ex_gauss_atom();
  REQUIRE(std::abs(eval_cf(d, 0.0) - 1.0) < 1e-12);
  for (double z : {0.5, 2.0, 3.7}) {
    cdouble expect = 0.001 + 0.999 * std::exp(cdouble(-0.5 * z * z, z));
    REQUIRE(std::abs(eval_cf(d, z) - expect) < 1e-12);
  }
}

TEST_CASE("eval_cf_parts: decomposition cases") {
  auto d = ex_gauss_atom();
  // Riemann-Lebesgue: the ac part dies off
  REQUIRE(std::abs(eval_cf_parts(d, 12.0).ac) < 1e-12);

  auto disc = bernoulli();
  REQUIRE(eval_cf_parts(disc, 3.1).ac == cdouble(0.0, 0.0));

  // 0.5(atoms at 0, sqrt2) + 0.5 N(0,1) at z = pi/sqrt2
  auto mix = MixedDistribution::mixed(
      0.5, {{0.0, 0.5}, {std::sqrt(2.0), 0.5}}, DensitySpec::gaussian(0.0, 1.0));
  double z = kPi / std::sqrt(2.0);
  auto parts = eval_cf_parts(mix, z);
  REQUIRE(std::abs(parts.discrete) < 1e-14);
  REQUIRE(std::abs(parts.ac - 0.5 * std::exp(-kPi * kPi / 4.0)) < 1e-14);
}

TEST_CASE("eval_cf equals the sum of its parts bitwise") {
  auto d = ex_gauss_atom();
  for (double z = -20.0; z <= 20.0; z += 0.37) {
    auto parts = eval_cf_parts(d, z);
    REQUIRE(eval_cf(d, z) == parts.discrete + parts.ac);
  }
}

TEST_CASE("cf invariants: conjugate symmetry and modulus bound") {
  auto dists = {bernoulli(), sqrt2_half(), ex_gauss_atom(),
                MixedDistribution::mixed(0.4, {{-1.0, 0.3}, {0.0, 0.4}, {2.0, 0.3}},
                                         DensitySpec::laplace(0.5, 1.2), 1.0)};
  for (const auto& d : dists) {
    for (double z = 0.0; z <= 25.0; z += 0.1) {
      cdouble a = eval_cf(d, z), b = eval_cf(d, -z);
      REQUIRE(std::abs(a - std::conj(b)) < 1e-10);
      REQUIRE(std::abs(a) <= 1.0 + 1e-12);
    }
    REQUIRE(std::abs(eval_cf(d, 0.0) - 1.0) < 1e-12);
  }
}

TEST_CASE("sample_cf: distribution grids carry the invariants") {
  auto g = sample_cf(bernoulli(), -10.0, 10.0, 2001);
  REQUIRE(g.source == CharFunctionGrid::Source::distribution);
  std::size_t mid = g.z.size() / 2;
  REQUIRE(std::abs(g.z[mid]) < 1e-12);
  REQUIRE(std::abs(g.v[mid] - 1.0) < 1e-12);
  REQUIRE(g.deriv_bound == Catch::Approx(0.25));
}

TEST_CASE("find_zero: locates the sqrt2 zero") {
  auto d = sqrt2_half();
  auto g = sample_cf(d, -0.5, 3.5, 4001);
  auto cert = find_zero(g, {0.0, 3.0}, 1e-9);
  REQUIRE(cert.has_value());
  REQUIRE(std::abs(cert->z - kPi / std::sqrt(2.0)) < 1e-6);
  REQUIRE(cert->modulus < 1e-9);
}

TEST_CASE("find_zero: none when the modulus stays away from zero") {
  auto g1 = sample_cf(bernoulli(), -0.5, 10.0, 4001);
  REQUIRE_FALSE(find_zero(g1, {0.0, 9.0}, 1e-9).has_value());

  auto g2 = sample_cf(ex_gauss_atom(), -0.5, 8.0, 200001);
  REQUIRE_FALSE(find_zero(g2, {0.0, 7.5}, 1e-9).has_value());
}

TEST_CASE("find_zero: window/grid mismatch is an input error") {
  auto g = sample_cf(bernoulli(), -1.0, 1.0, 101);
  REQUIRE_THROWS_AS(find_zero(g, {0.0, 5.0}, 1e-9), Error);
}

TEST_CASE("inf_modulus_ap: Bernoulli circle minimum is exactly one half") {
  auto inf = inf_modulus_ap(bernoulli().atoms);
  REQUIRE(inf.evidence == ApInfimum::Evidence::circle_exact);
  REQUIRE(inf.min_value == Catch::Approx(0.5).margin(1e-10));
}

TEST_CASE("inf_modulus_ap: sqrt2 pair reaches zero") {
  auto inf = inf_modulus_ap(sqrt2_half().atoms);
  REQUIRE(inf.min_value < 1e-12);
}

TEST_CASE("inf_modulus_ap: Kronecker torus infimum vanishes, scan stays small") {
  auto inf = inf_modulus_ap(tri_kronecker().atoms);
  REQUIRE(inf.evidence == ApInfimum::Evidence::torus_kronecker);
  REQUIRE(inf.min_value < 1e-12);
  REQUIRE(inf.window == Catch::Approx(1e4));
  REQUIRE(inf.scan_min_w < 1e-3);  // numeric surrogate on [0, W]
}

TEST_CASE("inf_modulus_ap: window halves differ by at most the translation slack") {
  auto inf = inf_modulus_ap(tri_kronecker().atoms);
  double resolution = inf.step * 0.6;  // derivative bound is below 0.6 here
  REQUIRE(std::abs(inf.scan_min_w - inf.scan_min_2w) <=
          inf.translation_slack + resolution + 1e-12);

  // periodic case: the two halves agree to polish accuracy
  auto infp = inf_modulus_ap(bernoulli().atoms);
  REQUIRE(std::abs(infp.scan_min_w - infp.scan_min_2w) < 1e-10);
}

TEST_CASE("qid_check: the four canonical verdicts") {
  REQUIRE(qid_check(bernoulli()).verdict == Qid::QID);

  auto v2 = qid_check(sqrt2_half());
  REQUIRE(v2.verdict == Qid::notQID);
  REQUIRE(v2.zero.has_value());
  REQUIRE(std::abs(v2.zero->z - kPi / std::sqrt(2.0)) < 1e-6);

  auto v3 = qid_check(ex_gauss_atom());
  REQUIRE(v3.verdict == Qid::QID);
  REQUIRE(v3.eps_d == Catch::Approx(0.001));

  auto v4 = qid_check(tri_kronecker());
  REQUIRE(v4.verdict == Qid::notQID);
  REQUIRE_FALSE(v4.zero.has_value());
}

TEST_CASE("qid_check: undecided band between the thresholds") {
  double eps = 1e-5;
  auto d = MixedDistribution::discrete(
      {{0.0, 0.5 * (1.0 + eps)}, {1.0, 0.5 * (1.0 - eps)}}, 1.0);
  auto v = qid_check(d);
  REQUIRE(v.verdict == Qid::undecided);
}

TEST_CASE("qid_check: verdict monotone under tau_qid tightening") {
  double eps = 2e-3;
  auto d = MixedDistribution::discrete(
      {{0.0, 0.5 * (1.0 + eps)}, {1.0, 0.5 * (1.0 - eps)}}, 1.0);
  QidSettings loose, tight;
  tight.tau_qid = 1e-2;
  auto v_loose = qid_check(d, loose);
  auto v_tight = qid_check(d, tight);
  REQUIRE(v_loose.verdict == Qid::QID);
  REQUIRE(v_tight.verdict == Qid::undecided);  // QID can only degrade to undecided
}

TEST_CASE("qid_check_scan: route (ii) agrees on the canonical cases") {
  REQUIRE(qid_check_scan(bernoulli()).verdict == Qid::QID);
  REQUIRE(qid_check_scan(ex_gauss_atom()).verdict == Qid::QID);
  REQUIRE(qid_check_scan(sqrt2_half()).verdict == Qid::notQID);
}

TEST_CASE("qid_check: invalid input is rejected") {
  auto d = MixedDistribution::discrete({{0.0, 0.6}, {1.0, 0.5}});
  REQUIRE_THROWS_AS(qid_check(d), Error);
}
