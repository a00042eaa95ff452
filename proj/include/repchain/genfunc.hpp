#pragma once

// Generating function G(x) = sum_n E[Lambda_n] x^n and its dominant pole.
//
// G is written through basic hypergeometric series
//
//   rphis(c; d; q, z) = sum_m (c_1..c_r; q)_m / ((d_1..d_s; q)_m (q; q)_m)
//                       * ((-1)^m q^{m(m-1)/2})^{1+s-r} z^m
//
// and has a simple pole at the smallest positive root rho of its
// denominator, so E[Lambda_n] ~ A B^n with B = 1/rho.

#include <functional>
#include <vector>

namespace repchain {

struct QHypergeometricSpec {
  std::vector<double> numerator_params;
  std::vector<double> denominator_params;
  double q = 0.5;
  double argument = 0.0;
};

inline constexpr int kSeriesMaxTerms = 10000;

/// (a; q)_m = prod_{i<m} (1 - a q^i)
double q_pochhammer(double a, double q, int m);

struct SeriesValue {
  double value = 0.0;
  double derivative = 0.0;  // with respect to the argument, summed term by term
  int terms = 0;
};

/// Sums until three consecutive terms are below 1e-16 of the partial sum.
/// Throws SeriesDivergence after kSeriesMaxTerms terms.
SeriesValue q_hypergeometric_series(const QHypergeometricSpec& spec);
double q_hypergeometric(const QHypergeometricSpec& spec);

struct PhiValues {
  double phi1 = 1.0, phi2 = 1.0, phi3 = 1.0, phi4 = 1.0;
  double dphi3 = 0.0;  // d phi3 / dx
};

/// The four series of the cut-off-free generating function at x.
PhiValues phi_functions(double x, double q, double lambda);

/// G(x) without cut-off. Regular only for |x| < rho.
double generating_function(double x, double q, double lambda);

/// The nine series of the cut-off generating function, in the variable
/// y = R x with R = (1-q)/(q(1-q^T)). Derivatives are with respect to y.
struct CutoffPhiValues {
  double to_end0 = 0.0, d01 = 0.0, d02 = 0.0;
  double d11 = 0.0, d22 = 0.0, d12 = 0.0, d21 = 0.0;
  double to_end1 = 0.0, to_end2 = 0.0;

  // derivatives of the pole denominator S and the numerator N in y
  double loop = 0.0, dloop = 0.0;  // S = d11 + d22 + d12 d21 - d11 d22
  double feed = 0.0, dfeed = 0.0;  // N
};

CutoffPhiValues cutoff_phi_functions(double x, double q, double lambda, int cutoff);

/// G(x) under a global cut-off T_c: sum_n E[Lambda_n(T_c)] x^n.
double generating_function_cutoff(double x, double q, double lambda, int cutoff);

struct RootSolverReport {
  int scan_steps = 0;
  int bisection_steps = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double residual = 0.0;
};

/// Smallest positive root of f, assuming f(0) > 0: scan upward in steps of
/// `step` until the sign changes, then bisect to width `tol`.
double first_positive_root(const std::function<double(double)>& f, double step, int max_scan_steps, double tol,
                           RootSolverReport* report = nullptr);

struct PoleAsymptotics {
  double rho = 1.0;
  double residue = -1.0;
  double A = 1.0;
  double B = 1.0;
  bool nudged = false;
  RootSolverReport solver;
};

/// Smallest positive root of 1 - x phi3(x).
double find_dominant_pole(double q, double lambda, RootSolverReport* report = nullptr);

PoleAsymptotics asymptotic_AB(double q, double lambda);
PoleAsymptotics asymptotic_AB_cutoff(double q, double lambda, int cutoff);

struct FibonacciCheck {
  double rho = 0.0;
  double residue = 0.0;
  double approx_f10 = 0.0;  // -residue / rho^11, the pole estimate of F_10
  RootSolverReport solver;
};

/// Pole asymptotics of x / (1 - x - x^2), exercising the generic root helper.
FibonacciCheck fibonacci_check();

}  // namespace repchain
