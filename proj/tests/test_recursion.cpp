#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "repchain/distribution.hpp"
#include "repchain/errors.hpp"
#include "repchain/recursion.hpp"

using namespace repchain;

namespace {
// Two-segment closed form from summing Z_2 geometrically.
double two_segment(double q, double lam) { return (1 - q) * (1 + q * lam) / ((1 + q) * (1 - q * lam)); }
}  // namespace

TEST_CASE("coefficients") {
  CHECK(coeff_C(1, 0, 0.5, 0.8) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(coeff_D(1, 0, 0.5, 0.8) == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
  for (int a = 1; a < 5; ++a) CHECK(coeff_C(a, 1, 0.3 + 0.1 * a, 1.0) == 0.0);
  // E^{a,b} = -r^{T+1}/(1-r) with r = q^a lambda^{b+1}
  const double r = 0.5 * 0.8;
  CHECK(coeff_E(1, 0, 0.5, 0.8, 3) == doctest::Approx(-std::pow(r, 4) / (1 - r)));
  CHECK_THROWS_AS(coeff_D(1, 0, 0.8, 0.8), NearSingularParameters);
}

TEST_CASE("single step") {
  const RecursionCoeffs c(0.5, 0.8);
  const TermVector v = step(TermVector{{{1, 0}, 1.0}}, c);
  CHECK(v.size() == 2);
  CHECK(v.coeff({2, 0}) == doctest::Approx(-1.0));
  CHECK(v.coeff({1, 1}) == doctest::Approx(5.0 / 3.0));
  CHECK(step(TermVector{}, c).empty());

  const TermVector twice = step(TermVector{{{1, 0}, 2.0}}, c);
  for (const auto& [idx, val] : v.terms()) CHECK(twice.coeff(idx) == doctest::Approx(2 * val));
}

TEST_CASE("step with cut-off has three images") {
  const RecursionCoeffs c(0.5, 0.8, 4);
  const TermVector v = step(TermVector{{{1, 0}, 1.0}}, c);
  CHECK(v.size() == 3);
  CHECK(v.coeff({1, -1}) == doctest::Approx(coeff_E(1, 0, 0.5, 0.8, 4)));
}

TEST_CASE("expected lambda: trivial cases and two segments") {
  CHECK(expected_lambda(1, 0.7, 0.8) == 1.0);
  CHECK(expected_lambda(6, 0.7, 1.0) == 1.0);
  CHECK(expected_lambda(2, 0.9, 0.99) == doctest::Approx(0.913085).epsilon(1e-6));
  CHECK(expected_lambda(2, 0.9, 0.99) == doctest::Approx(two_segment(0.9, 0.99)).epsilon(1e-12));
  CHECK(expected_lambda(2, 0.5, 0.9) == doctest::Approx(two_segment(0.5, 0.9)).epsilon(1e-12));
}

TEST_CASE("expected lambda: frozen high-precision oracle values") {
  // tests/oracles/frozen_values.py
  CHECK(expected_lambda(3, 0.5, 0.8) == doctest::Approx(0.61671335200746965).epsilon(1e-12));
  CHECK(expected_lambda(4, 0.6, 0.95) == doctest::Approx(0.76476683597527855).epsilon(1e-12));
  CHECK(expected_lambda(5, 0.9, 0.99) == doctest::Approx(0.70028304645532155).epsilon(1e-10));
  CHECK(expected_lambda(2, 0.5, 0.8) == doctest::Approx(0.77777777777777778).epsilon(1e-13));
  CHECK(expected_lambda_cutoff(3, 0.6, 0.9, 4) == doctest::Approx(0.80797273998233322).epsilon(1e-12));
}

TEST_CASE("moments") {
  CHECK(expected_lambda_moment(4, 1, 0.6, 0.9) == expected_lambda(4, 0.6, 0.9));
  CHECK(expected_lambda_moment(2, 2, 0.9, 0.99) == doctest::Approx(0.840110).epsilon(1e-6));
  CHECK(expected_lambda_moment(2, 2, 0.9, 0.99) == expected_lambda(2, 0.9, std::pow(0.99, 2)));
  CHECK(std::abs(expected_lambda_moment(2, 200, 0.5, 0.9) - 1.0 / 3.0) < 1e-6);
  for (double q : {0.3, 0.6, 0.9})
    for (double lam : {0.8, 0.95, 0.99})
      for (int n = 2; n <= 8; ++n) {
        const double m1 = expected_lambda(n, q, lam);
        CHECK(expected_lambda_moment(n, 2, q, lam) >= m1 * m1 - 1e-12);
      }
}

TEST_CASE("range and monotonicity in n") {
  for (double q : {0.1, 0.5, 0.8, 0.95})
    for (double lam : {0.5, 0.9, 0.99, 0.999}) {
      double prev = 1.0;
      for (int n = 1; n <= 20; ++n) {
        const double v = expected_lambda(n, q, lam);
        CHECK(v >= 0.0);
        CHECK(v <= prev + 1e-12);
        prev = v;
      }
    }
}

TEST_CASE("agreement with brute-force enumeration") {
  for (double q : {0.3, 0.6, 0.9})
    for (double lam : {0.8, 0.95, 0.99})
      for (int n = 1; n <= 4; ++n) {
        // smallest box whose omitted mass is below 1e-11
        std::int64_t T = 1;
        while (1 - std::pow(1 - std::pow(q, T), n) > 1e-11) ++T;
        if (std::pow(static_cast<double>(T), n) > 2e8) continue;
        const auto bf = brute_force_expected_lambda(n, q, lam, T);
        const double v = expected_lambda(n, q, lam);
        CAPTURE(n);
        CAPTURE(q);
        CAPTURE(lam);
        CHECK(v >= bf.value - 1e-9);
        CHECK(v <= bf.value + bf.tail_bound + 1e-9);
      }
}

TEST_CASE("cut-off") {
  CHECK(expected_lambda_cutoff(5, 0.7, 0.9, 1) == 1.0);
  CHECK(expected_lambda_cutoff(2, 0.5, 0.8, 2) == doctest::Approx(0.911111).epsilon(1e-6));
  CHECK(expected_lambda_cutoff(2, 0.5, 0.8, 2) == doctest::Approx(0.5125 / (0.75 * 0.75)).epsilon(1e-12));
  // q^T < 1e-12 reproduces the unconditioned value
  const int T = static_cast<int>(std::ceil(std::log(1e-13) / std::log(0.9)));
  CHECK(std::abs(expected_lambda_cutoff(5, 0.9, 0.998, T) - expected_lambda(5, 0.9, 0.998)) < 1e-8);

  double prev = 1.0;
  const double limit = expected_lambda(4, 0.7, 0.95);
  for (int t : {2, 4, 8, 16, 32, 64, 128}) {
    const double gap = std::abs(expected_lambda_cutoff(4, 0.7, 0.95, t) - limit);
    CHECK(gap <= prev + 1e-15);
    prev = gap;
  }
  CHECK(prev < 1e-12);
}

TEST_CASE("near-singular parameters are regularised") {
  // q = lambda hits D^{1,0}'s denominator
  const Evaluation e = evaluate_expected_lambda(3, 0.8, 0.8);
  CHECK(e.nudged);
  CHECK_FALSE(e.warning.empty());
  const double left = expected_lambda(3, 0.8, 0.8 - 1e-3);
  const double right = expected_lambda(3, 0.8, 0.8 + 1e-3);
  CHECK(e.value == doctest::Approx(0.5 * (left + right)).epsilon(1e-4));
  CHECK(std::abs(e.value - brute_force_expected_lambda(3, 0.8, 0.8, 200).value) < 1e-9);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(expected_lambda(0, 0.5, 0.9), ParameterError);
  CHECK_THROWS_AS(expected_lambda(3, 1.0, 0.9), ParameterError);
  CHECK_THROWS_AS(expected_lambda(3, 0.5, 0.0), ParameterError);
  CHECK_THROWS_AS(expected_lambda_moment(3, 0, 0.5, 0.9), ParameterError);
  CHECK_THROWS_AS(expected_lambda_cutoff(3, 0.5, 0.9, 0), ParameterError);
}
