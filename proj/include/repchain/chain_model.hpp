#pragma once

// Core description of a homogeneous swap-ASAP repeater chain and the
// elementary formulas shared by the analytic and simulation modules.
//
// Time is measured in rounds. Every segment attempts entanglement generation
// once per round and succeeds with probability p; a stored qubit decays by a
// factor lambda (Werner parameter) per round it waits for its neighbour.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace repchain {

inline constexpr double kDefaultAttenuationKm = 22.0;

/// Werner/depolarizing parameter of a two-qubit state, in [0, 1].
class WernerParam {
 public:
  explicit WernerParam(double value);
  double value() const { return value_; }

 private:
  double value_;
};

/// Chain description. Construct through ChainParams::make, which validates.
struct ChainParams {
  int n = 1;
  double p = 1.0;
  double q = 0.0;  // 1 - p, computed once
  double lambda = 1.0;
  std::vector<double> lambda_gen;   // n entries
  std::vector<double> lambda_swap;  // n - 1 entries
  std::optional<int> cutoff;

  /// Homogeneous chain with identity generation and swap factors.
  static ChainParams make(int n, double p, double lambda, std::optional<int> cutoff = std::nullopt);

  /// Chain with uniform generation/swap noise factors.
  static ChainParams make(int n, double p, double lambda, double lambda_gen, double lambda_swap,
                          std::optional<int> cutoff = std::nullopt);

  static ChainParams make(int n, double p, double lambda, std::vector<double> lambda_gen,
                          std::vector<double> lambda_swap, std::optional<int> cutoff = std::nullopt);

  /// Product of all generation and swap factors.
  double noise_factor() const;

  ChainParams with_cutoff(std::optional<int> c) const;
};

/// Rounds in which each segment first succeeds; every entry >= 1.
class Instance {
 public:
  explicit Instance(std::vector<std::int64_t> t);
  std::span<const std::int64_t> rounds() const { return t_; }
  std::size_t size() const { return t_.size(); }
  std::int64_t max_round() const;

 private:
  std::vector<std::int64_t> t_;
};

/// Aggregate waiting time K = sum_i |t_i - t_{i+1}|.
std::int64_t roughness(const Instance& inst);

/// Probability of observing exactly this instance: prod (1-q) q^(t_i - 1).
double instance_probability(const Instance& inst, double q);

/// Average fidelity 3*Lambda/4 + 1/4 of a Werner state.
double fidelity_from_lambda(WernerParam w);

/// Folds the constant generation and swap noise factors into Lambda.
WernerParam apply_generation_noise(WernerParam w, const ChainParams& params);

/// Per-segment success probability exp(-L / (n * L_att)) for fibre loss.
double segment_success_prob(double total_length_km, int n, double attenuation_km = kDefaultAttenuationKm);

}  // namespace repchain
