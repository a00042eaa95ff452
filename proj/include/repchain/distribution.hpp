#pragma once

// Probability mass function of the roughness K, hence of Lambda_n = lambda^K.
//
// Computed by a forward dynamic programme over segments with state
// (t_i, partial K). All intermediate values are probabilities, so the
// programme is numerically benign; truncation in t and in k is tracked
// explicitly through tail_bound.

#include <cstdint>
#include <optional>
#include <vector>

namespace repchain {

struct RoughnessPMF {
  std::vector<double> probs;  // P(K = k), k = 0 .. probs.size() - 1
  double tail_bound = 0.0;    // upper bound on the probability mass not in probs
  int n = 1;
  double q = 0.0;
  std::optional<int> cutoff;
  std::int64_t t_max = 1;  // largest per-segment round kept by the programme

  double total() const;
  double at(std::size_t k) const { return k < probs.size() ? probs[k] : 0.0; }
};

struct PmfLimits {
  std::int64_t max_rounds = 200000;
  /// Largest k tabulated; 0 means the full support (n-1)(T_max-1) of the table.
  std::int64_t max_k = 0;
  /// Cap on (rounds x k) table cells; two tables of doubles are live at once.
  std::int64_t max_cells = 50'000'000;
};

RoughnessPMF roughness_pmf(int n, double q, double tail_eps, const PmfLimits& limits = {});
RoughnessPMF roughness_pmf_cutoff(int n, double q, int cutoff, double tail_eps, const PmfLimits& limits = {});

/// sum_k P(K=k) lambda^k.
double pmf_to_expected_lambda(const RoughnessPMF& pmf, double lambda);

struct BruteForceResult {
  double value = 0.0;
  double tail_bound = 0.0;  // 1 - (1 - q^T)^n, the mass outside {1..T}^n
};

inline constexpr std::int64_t kDefaultEnumerationCap = 200'000'000;

/// Direct enumeration over {1..T}^n of P(t) lambda^K(t); independent oracle.
BruteForceResult brute_force_expected_lambda(int n, double q, double lambda, std::int64_t t_max,
                                             std::int64_t enumeration_cap = kDefaultEnumerationCap);

}  // namespace repchain
