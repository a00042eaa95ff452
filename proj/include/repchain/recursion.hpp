#pragma once

// Exact E[Lambda_n] for swap-ASAP chains.
//
// The partition sum restricted to t_n = t is a finite linear combination of
// terms q^{a t} lambda^{b t}. One extra segment maps each basis term |a,b> to
//
//   C^{a,b} |a+1,b> + D^{a,b} |1,1>                      (no cut-off)
//   C^{a,b} |a+1,b> + D^{a,b} |1,1> + E^{a,b} |1,-1>     (global cut-off T_c)
//
// and summing over t is a linear form on the same basis. The engine works with
// the prefactor-free sums and multiplies by ((1-q)/q)^n (resp.
// ((1-q)/(q(1-q^T_c)))^n) once at the end.

#include <compare>
#include <map>
#include <optional>
#include <string>

#include "repchain/chain_model.hpp"

namespace repchain {

/// Basis symbol (a, b) standing for q^{a t} lambda^{b t}.
struct BasisIndex {
  int a = 1;
  int b = 0;
  auto operator<=>(const BasisIndex&) const = default;
};

/// Sparse linear combination of basis symbols. Zero coefficients are never stored.
class TermVector {
 public:
  TermVector() = default;
  TermVector(std::initializer_list<std::pair<const BasisIndex, double>> init);

  void add(BasisIndex idx, double coeff);
  double coeff(BasisIndex idx) const;
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const std::map<BasisIndex, double>& terms() const { return terms_; }

  TermVector scaled(double s) const;

 private:
  std::map<BasisIndex, double> terms_;
};

struct RecursionCoeffs {
  double q = 0.5;
  double lambda = 1.0;
  std::optional<int> cutoff;

  RecursionCoeffs(double q, double lambda, std::optional<int> cutoff = std::nullopt);
};

/// Denominator magnitude below which a coefficient is reported as near-singular.
inline constexpr double kSingularityThreshold = 1e-9;
/// Coefficients below this magnitude are dropped after a step.
inline constexpr double kPruneThreshold = 1e-300;

double coeff_C(int a, int b, double q, double lambda);
double coeff_D(int a, int b, double q, double lambda);
double coeff_E(int a, int b, double q, double lambda, int cutoff);

/// One application of the segment map (three-image form when a cut-off is set).
TermVector step(const TermVector& v, const RecursionCoeffs& coeffs);

/// Sum over t of the basis functions, with or without the t <= T_c restriction.
double linear_form(const TermVector& v, const RecursionCoeffs& coeffs);

/// Prefactor-free partition sum Z_n (or its cut-off restriction).
double partition_sum(int n, const RecursionCoeffs& coeffs);

/// Result of an evaluation that may have been regularised.
struct Evaluation {
  double value = 0.0;
  bool nudged = false;
  std::string warning;
};

/// E[Lambda_n] with the near-singular retry policy applied; see recursion.cpp.
Evaluation evaluate_expected_lambda(int n, double q, double lambda, std::optional<int> cutoff = std::nullopt);

double expected_lambda(int n, double q, double lambda);
/// E[(Lambda_n)^m], evaluated as E[Lambda_n] at lambda^m.
double expected_lambda_moment(int n, int m, double q, double lambda);
double expected_lambda_cutoff(int n, double q, double lambda, int cutoff);

/// Convenience for a full parameter set; honours params.cutoff.
double expected_lambda(const ChainParams& params);

}  // namespace repchain
