#include <catch2/catch_amalgamated.hpp>

#include "qidlab/model.hpp"
#include "oracles.hpp"

using namespace qidlab;

TEST_CASE("validate: point mass is valid") {
  auto d = MixedDistribution::point_mass(0.0);
  auto rep = validate_distribution(d);
  REQUIRE(rep.valid());
}

TEST_CASE("validate: masses must sum to one") {
  auto d = MixedDistribution::discrete({{0.0, 0.6}, {1.0, 0.5}});
  auto rep = validate_distribution(d);
  REQUIRE_FALSE(rep.valid());
  bool mentions_sum = false;
  for (const auto& v : rep.violations)
    mentions_sum |= v.find("sum to") != std::string::npos;
  REQUIRE(mentions_sum);
}

TEST_CASE("validate: tiny atom with dominant gaussian is valid") {
  auto d = MixedDistribution::mixed(0.001, {{0.0, 1.0}},
                                    DensitySpec::gaussian(1.0, 1.0), 1.0);
  REQUIRE(validate_distribution(d).valid());
}

TEST_CASE("validate: structural violations are reported") {
  auto d = MixedDistribution::discrete({{0.0, 1.0}});
  d.p = 0.5;  // p < 1 but no density
  REQUIRE_FALSE(validate_distribution(d).valid());

  auto d2 = MixedDistribution::discrete({{0.0, 0.5}, {1e-12, 0.5}});
  auto rep2 = validate_distribution(d2);  // accumulation-like spacing flagged
  REQUIRE_FALSE(rep2.valid());

  auto d3 = MixedDistribution::discrete({{0.5, 1.0}}, 1.0);  // off-lattice
  REQUIRE_FALSE(validate_distribution(d3).valid());
}

TEST_CASE("validate is idempotent and pure") {
  auto d = MixedDistribution::discrete({{0.0, 0.6}, {1.0, 0.5}});
  auto r1 = validate_distribution(d);
  auto r2 = validate_distribution(d);
  REQUIRE(r1.violations == r2.violations);
}

TEST_CASE("grs: polynomial weight satisfies") {
  auto g = grs_check(WeightFunction::polynomial(2.0));
  REQUIRE(g.verdict == GrsResult::Verdict::satisfied);
}

TEST_CASE("grs: exponential weight is violated with unit slope") {
  auto g = grs_check(WeightFunction::exp_linear(1.0));
  REQUIRE(g.verdict == GrsResult::Verdict::violated);
  REQUIRE(std::abs(g.slope_plus - 1.0) < 1e-6);
  REQUIRE(std::abs(g.slope_minus - 1.0) < 1e-6);
}

TEST_CASE("grs: stretched-exponential weight satisfies at horizon 1e6") {
  auto g = grs_check(WeightFunction::exp_sqrt(1.0), 1e6);
  REQUIRE(g.verdict == GrsResult::Verdict::satisfied);
  // slope behaves like |x|^{-1/2}
  REQUIRE(g.decay_exponent < -0.3);
}

TEST_CASE("grs: rejects non-evaluable weights") {
  WeightFunction bad{"bad", [](double) { return -1.0; }, 1.0,
                     WeightFunction::Kind::weight};
  REQUIRE_THROWS_AS(grs_check(bad), Error);
}

TEST_CASE("submultiplicative: constants for the catalog") {
  std::vector<double> grid;
  for (double x = -10.0; x <= 10.0; x += 0.5) grid.push_back(x);

  REQUIRE(submultiplicative_check(WeightFunction::one(), grid) ==
          Catch::Approx(1.0).margin(1e-14));
  // triangle inequality in the exponent
  REQUIRE(submultiplicative_check(WeightFunction::exp_linear(1.0), grid) <=
          1.0 + 1e-12);
  // 1+|x+y| <= (1+|x|)(1+|y|)
  REQUIRE(submultiplicative_check(WeightFunction::polynomial(1.0), grid) <=
          1.0 + 1e-12);
}

TEST_CASE("submultiplicative: zero weight is an input error") {
  WeightFunction bad{"0", [](double) { return 0.0; }, 1.0,
                     WeightFunction::Kind::weight};
  std::vector<double> grid = {0.0, 1.0};
  REQUIRE_THROWS_AS(submultiplicative_check(bad, grid), Error);
}

TEST_CASE("weighted L1 norm: gaussian against the trivial weight") {
  auto n = weighted_l1_norm(DensitySpec::gaussian(0.0, 1.0), WeightFunction::one());
  REQUIRE(n.verdict == TailVerdict::finite);
  REQUIRE(n.value == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("weighted L1 norm: laplace density against exp(|x|/2)") {
  auto n = weighted_l1_norm(DensitySpec::laplace(0.0, 1.0),
                            WeightFunction::exp_linear(0.5));
  REQUIRE(n.verdict == TailVerdict::finite);
  REQUIRE(n.value == Catch::Approx(2.0).margin(1e-6));
}

TEST_CASE("weighted L1 norm: divergent weight is detected") {
  auto n = weighted_l1_norm(DensitySpec::laplace(0.0, 1.0),
                            WeightFunction::exp_linear(2.0));
  REQUIRE(n.verdict == TailVerdict::infinite);
}

TEST_CASE("GRS weights integrate against e^{-|x|} (discrete analogue)") {
  // partial sums of w(x)e^{-|x|} dx must stabilise as the grid extends
  for (const auto& w : {WeightFunction::polynomial(2.0), WeightFunction::exp_sqrt(0.5)}) {
    double dx = 0.01;
    auto partial = [&](double T) {
      double s = 0.0;
      for (double x = -T; x <= T; x += dx) s += w(x) * std::exp(-std::abs(x)) * dx;
      return s;
    };
    double a = partial(50.0), b = partial(100.0), c = partial(200.0);
    REQUIRE(std::abs(b - a) < 1e-6 * b);
    REQUIRE(std::abs(c - b) < 1e-6 * c);
  }
}

TEST_CASE("density: catalog transforms match quadrature") {
  // split the quadrature at density kinks so Simpson converges
  auto check = [&](const DensitySpec& f, double z, std::vector<double> brk) {
    brk.insert(brk.begin(), -60.0);
    brk.push_back(60.0);
    cdouble byquad = 0.0;
    // stay clear of the jump itself: Simpson would weight the boundary value
    for (std::size_t j = 0; j + 1 < brk.size(); ++j)
      byquad += testoracle::simpson(
          [&](double x) { return f.value(x) * std::exp(cdouble(0.0, z * x)); },
          brk[j] + 1e-10, brk[j + 1] - 1e-10, 60000);
    REQUIRE(std::abs(byquad - f.transform(z)) < 1e-8);
  };
  for (double z : {0.0, 0.7, 2.0, 5.0}) {
    check(DensitySpec::gaussian(1.0, 1.0), z, {});
    check(DensitySpec::laplace(0.5, 1.0), z, {0.5});
    check(DensitySpec::uniform(-1.0, 2.0), z, {-1.0, 2.0});
    check(DensitySpec::exponential(1.5), z, {0.0});
  }
}

TEST_CASE("density: sampled grids use the exact transform of the interpolant") {
  std::vector<double> xs, vs;
  for (double x = -8.0; x <= 8.0 + 1e-12; x += 0.005) {
    xs.push_back(x);
    vs.push_back(std::exp(-0.5 * x * x) / std::sqrt(kTwoPi));
  }
  auto f = DensitySpec::sampled(xs, vs, {TailBound::Kind::exponential, 1.0, 4.0});
  auto g = DensitySpec::gaussian(0.0, 1.0);
  for (double z : {0.5, 3.0, 10.0})
    REQUIRE(std::abs(f.transform(z) - g.transform(z)) < 1e-5);
}

TEST_CASE("density: tail envelopes really bound the transform") {
  auto dists = {DensitySpec::gaussian(0.5, 2.0), DensitySpec::laplace(0.0, 0.7),
                DensitySpec::uniform(-1.0, 1.0), DensitySpec::exponential(2.0)};
  for (const auto& f : dists)
    for (double z : {2.0, 5.0, 17.0})
      REQUIRE(std::abs(f.transform(z)) <= f.tail_sup(z) * (1.0 + 1e-12));
}

TEST_CASE("density: horizon_for inverts the envelope") {
  auto f = DensitySpec::gaussian(1.0, 1.0);
  double M = f.horizon_for(1e-4);
  REQUIRE(f.tail_sup(M) <= 1e-4 * (1.0 + 1e-6));
  REQUIRE(f.tail_sup(0.9 * M) > 1e-4);
}
