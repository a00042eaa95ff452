#pragma once

// Secret-key rates for BB84 over a swap-ASAP chain, in key bits per round.

#include <optional>
#include <vector>

#include "repchain/chain_model.hpp"
#include "repchain/distribution.hpp"

namespace repchain {

/// H(x) in bits, with H(0) = H(1) = 0.
double binary_entropy(double x);

/// Asymptotic secret-key fraction of fully asymmetric BB84 on a Werner state.
double skf_bb84(WernerParam w);

/// Smallest Werner parameter with positive key fraction (solved, about 0.77994).
double lambda_min();

/// Largest roughness whose state can still yield key: ceil(ln(lambda_min) / ln(lambda)).
/// Returns nullopt for lambda = 1 (every k contributes).
std::optional<int> binned_k_max(double lambda);

/// E[max_i t_i] for n independent geometric(p) segments.
double expected_delivery_no_cutoff(int n, double p);

/// Expected rounds until delivery when every attempt is abandoned after T_c rounds.
double expected_delivery_cutoff(int n, double p, int cutoff);

/// Variant in which each attempt always occupies the full T_c-round window.
double expected_delivery_wait_full_window(int n, double p, int cutoff);

struct BinnedRate {
  double skf_binned = 0.0;
  double skr_binned = 0.0;
  std::optional<int> k_max;  // nullopt: no truncation (lambda = 1)
};

struct RateReport {
  double expected_lambda = 1.0;  // after generation and swap noise
  double expected_delivery_rounds = 1.0;
  double skf = 0.0;
  double skr_per_round = 0.0;
  std::optional<BinnedRate> binned;
};

RateReport skr(const ChainParams& params);

/// Adds the binned key fraction: key is distilled separately per roughness class.
/// The pmf must describe the same (n, q, cutoff) as params.
RateReport skr_binned(const ChainParams& params, const RoughnessPMF& pmf);

struct CutoffOptimum {
  int cutoff = 1;  // best T_c in the scanned range (smallest on ties)
  RateReport best;
  RateReport no_cutoff;  // the T_c = infinity endpoint, for comparison
  std::vector<double> skr_by_cutoff;  // skr for cutoff = t_lo, t_lo + 1, ...
};

CutoffOptimum optimize_cutoff(const ChainParams& params, int t_lo, int t_hi);

struct SegmentOptimum {
  int n = 1;
  double p = 1.0;
  CutoffOptimum optimum;
};

/// For each n in [n_lo, n_hi], p = exp(-L / (n L_att)) and the cut-off is optimised.
/// Each of the n links carries the generation factor lambda_gen; swaps are noiseless.
std::vector<SegmentOptimum> optimize_segments(double total_length_km, double lambda, double lambda_gen, int n_lo,
                                              int n_hi, int t_lo, int t_hi,
                                              double attenuation_km = kDefaultAttenuationKm);

}  // namespace repchain
