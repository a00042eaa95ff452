#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "repchain/errors.hpp"
#include "repchain/genfunc.hpp"
#include "repchain/recursion.hpp"

using namespace repchain;

TEST_CASE("q-Pochhammer") {
  CHECK(q_pochhammer(0.3, 0.7, 0) == 1.0);
  CHECK(q_pochhammer(0.5, 0.5, 2) == doctest::Approx(0.375));
  for (int m = 1; m < 6; ++m) CHECK(q_pochhammer(1.0, 0.4, m) == 0.0);
}

TEST_CASE("q-hypergeometric series basics") {
  CHECK(q_hypergeometric({{0.3, 0.0}, {0.2, 0.5}, 0.6, 0.0}) == 1.0);
  const double q = 0.6;
  CHECK(q_hypergeometric({{q, 0.0}, {q * q, q}, q, 0.4 * q * (1.0 - 1.0)}) == 1.0);

  // against an independent term-by-term sum with Pochhammer symbols and 50 extra terms
  const double lam = 0.98;
  const double z = (1 - q) * q * (1 - lam * lam);
  const QHypergeometricSpec spec{{q, 0.0}, {q * q, q * lam * lam}, q, z};
  const SeriesValue s = q_hypergeometric_series(spec);
  double direct = 0.0;
  for (int m = 0; m < s.terms + 50; ++m) {
    const double num = q_pochhammer(q, q, m) * q_pochhammer(0.0, q, m);
    const double den = q_pochhammer(q * q, q, m) * q_pochhammer(q * lam * lam, q, m) * q_pochhammer(q, q, m);
    direct += num / den * std::pow(-1.0, m) * std::pow(q, m * (m - 1) / 2.0) * std::pow(z, m);
  }
  CHECK(std::abs(s.value - direct) < 1e-14);
}

TEST_CASE("q-hypergeometric divergence is surfaced") {
  // 1phi0 type series with no q^{m(m-1)/2} damping and |z| > 1 never settles
  CHECK_THROWS_AS(q_hypergeometric({{0.0}, {}, 0.5, 3.0}), SeriesDivergence);
}

TEST_CASE("phi functions at zero argument") {
  const PhiValues at0 = phi_functions(0.0, 0.6, 0.9);
  CHECK(at0.phi1 == 1.0);
  CHECK(at0.phi2 == 1.0);
  CHECK(at0.phi3 == 1.0);
  CHECK(at0.phi4 == 1.0);
  const PhiValues flat = phi_functions(0.7, 0.6, 1.0);
  CHECK(flat.phi3 == 1.0);
  CHECK(flat.phi4 == 1.0);
}

TEST_CASE("term-wise derivative of phi3 agrees with a central difference") {
  for (double q : {0.3, 0.6, 0.9})
    for (double lam : {0.8, 0.95, 0.99})
      for (double x : {0.2, 0.8, 1.3}) {
        const double h = 1e-6 * x;
        const double fd = (phi_functions(x + h, q, lam).phi3 - phi_functions(x - h, q, lam).phi3) / (2 * h);
        const double exact = phi_functions(x, q, lam).dphi3;
        CHECK(std::abs(fd - exact) <= 1e-6 * std::abs(exact));
      }
}

TEST_CASE("Taylor coefficients of G reproduce the recursion") {
  for (auto [q, lam] : {std::pair{0.6, 0.98}, {0.9, 0.99}, {0.5, 0.8}}) {
    // G at small x against the power series truncated where x^n is negligible
    for (double x : {0.05, 0.2, 0.5}) {
      double s = 0.0;
      for (int n = 1; n <= 80; ++n) s += expected_lambda(n, q, lam) * std::pow(x, n);
      CHECK(generating_function(x, q, lam) == doctest::Approx(s).epsilon(1e-12));
      for (int T : {2, 5, 12}) {
        double sc = 0.0;
        for (int n = 1; n <= 80; ++n) sc += expected_lambda_cutoff(n, q, lam, T) * std::pow(x, n);
        CHECK(generating_function_cutoff(x, q, lam, T) == doctest::Approx(sc).epsilon(1e-12));
      }
    }
    // first six coefficients by a Vandermonde-free probe: fit through divided differences at tiny x
    // is ill-conditioned, so use the difference G(x) - sum_{n<=N} E_n x^n = O(x^{N+1}) instead
    const double x = 0.01;
    double partial = 0.0;
    for (int n = 1; n <= 6; ++n) partial += expected_lambda(n, q, lam) * std::pow(x, n);
    CHECK(std::abs(generating_function(x, q, lam) - partial) < 2 * std::pow(x, 7));
  }
}

TEST_CASE("cut-off series reduce to the plain ones at large T") {
  const double q = 0.6, lam = 0.95, x = 0.9;
  const int T = static_cast<int>(std::ceil(std::log(1e-15) / std::log(q)));
  const CutoffPhiValues c = cutoff_phi_functions(x, q, lam, T);
  const PhiValues p = phi_functions(x, q, lam);
  CHECK(c.d11 == doctest::Approx(x * p.phi3).epsilon(1e-12));
  CHECK(std::abs(c.d22) < 1e-12);
  CHECK(std::abs(c.d12) < 1e-12);
  CHECK(generating_function_cutoff(0.5, q, lam, T) == doctest::Approx(generating_function(0.5, q, lam)).epsilon(1e-12));
}

TEST_CASE("dominant pole") {
  CHECK(find_dominant_pole(0.6, 1.0) == 1.0);
  for (double q : {0.2, 0.6, 0.9, 0.98})
    for (double lam : {0.5, 0.9, 0.99, 0.999}) {
      RootSolverReport rep;
      const double rho = find_dominant_pole(q, lam, &rep);
      CHECK(rep.residual < 1e-12);
      const double phi3 = q_hypergeometric({{q, 0.0}, {q * q, q * lam * lam}, q, rho * (1 - q) * q * (1 - lam * lam)});
      CHECK(std::abs(1.0 - rho * phi3) < 1e-12);
      CHECK(rep.bracket_hi - rep.bracket_lo <= 1e-14 * std::max(1.0, rho));
      const PoleAsymptotics ab = asymptotic_AB(q, lam);
      CHECK(ab.B > 0.0);
      CHECK(ab.B < 1.0);
      CHECK(ab.residue == doctest::Approx(-ab.A * ab.rho));
    }
}

TEST_CASE("asymptotics tighten with n") {
  for (auto [lam, q] : {std::pair{0.98, 0.6}, {0.99, 0.9}, {0.995, 0.95}}) {
    const PoleAsymptotics ab = asymptotic_AB(q, lam);
    const double r5 = ab.A * std::pow(ab.B, 5) / expected_lambda(5, q, lam);
    const double r15 = ab.A * std::pow(ab.B, 15) / expected_lambda(15, q, lam);
    CAPTURE(q);
    CAPTURE(lam);
    CHECK(r15 >= 0.99);
    CHECK(r15 <= 1.01);
    // both can sit at rounding level; then there is nothing left to improve
    CHECK((std::abs(r15 - 1) < std::abs(r5 - 1) || std::abs(r15 - 1) < 1e-12));
  }
  const PoleAsymptotics ab = asymptotic_AB(0.9, 0.99);
  CHECK(std::abs(ab.A * std::pow(ab.B, 15) - expected_lambda(15, 0.9, 0.99)) <
        std::abs(ab.A * std::pow(ab.B, 5) - expected_lambda(5, 0.9, 0.99)));
}

TEST_CASE("unit fixed points") {
  const PoleAsymptotics one = asymptotic_AB(0.7, 1.0);
  CHECK(one.A == 1.0);
  CHECK(one.B == 1.0);
  const PoleAsymptotics cut1 = asymptotic_AB_cutoff(0.7, 0.9, 1);
  CHECK(cut1.A == 1.0);
  CHECK(cut1.B == 1.0);
  const PoleAsymptotics cut_flat = asymptotic_AB_cutoff(0.7, 1.0, 5);
  CHECK(cut_flat.B == 1.0);
}

TEST_CASE("cut-off asymptotics") {
  const double q = 0.9, lam = 0.99;
  for (int T : {2, 6, 10}) {
    const PoleAsymptotics c = asymptotic_AB_cutoff(q, lam, T);
    CHECK(c.solver.residual < 1e-12);
    CHECK(c.B > 0.0);
    CHECK(c.B <= 1.0);
    const double e10 = expected_lambda_cutoff(10, q, lam, T);
    const double e20 = expected_lambda_cutoff(20, q, lam, T);
    const double err10 = std::abs(c.A * std::pow(c.B, 10) / e10 - 1);
    const double err20 = std::abs(c.A * std::pow(c.B, 20) / e20 - 1);
    CHECK(err10 < 1e-2);
    CHECK(err20 <= err10 + 1e-12);
  }
  const int T = static_cast<int>(std::ceil(std::log(1e-13) / std::log(0.6)));
  CHECK(std::abs(asymptotic_AB_cutoff(0.6, 0.95, T).B - asymptotic_AB(0.6, 0.95).B) < 1e-6);
}

TEST_CASE("removable singularity at lambda = q") {
  const PoleAsymptotics ab = asymptotic_AB(0.8, 0.8);
  CHECK(ab.nudged);
  CHECK(ab.A * std::pow(ab.B, 20) == doctest::Approx(expected_lambda(20, 0.8, 0.8)).epsilon(1e-6));
}

TEST_CASE("Fibonacci pole") {
  const FibonacciCheck f = fibonacci_check();
  CHECK(f.rho == doctest::Approx((std::sqrt(5.0) - 1) / 2).epsilon(1e-13));
  CHECK(f.rho == doctest::Approx(0.618034).epsilon(1e-6));
  CHECK(-f.residue == doctest::Approx(0.276393).epsilon(1e-6));
  const double phi = (1 + std::sqrt(5.0)) / 2;
  CHECK(-f.residue == doctest::Approx(1 / (std::sqrt(5.0) * phi)).epsilon(1e-12));
  CHECK(f.approx_f10 == doctest::Approx(55.0036).epsilon(1e-6));
  CHECK(std::abs(f.approx_f10 - 55.0) < 0.004);
}

TEST_CASE("root helper errors") {
  CHECK_THROWS_AS(first_positive_root([](double) { return 1.0; }, 0.1, 50, 1e-14), RootNotBracketed);
  CHECK_THROWS_AS(first_positive_root([](double) { return -1.0; }, 0.1, 50, 1e-14), RootNotBracketed);
}
