#pragma once

// Monte Carlo simulation of the swap-ASAP chain with an optional global cut-off.
//
// Runs are split into fixed-size chunks. Chunk c draws from its own
// mt19937_64 seeded with splitmix64(master_seed ^ splitmix64(c)), and chunk
// results are merged in chunk order, so the output depends only on the master
// seed and the run count, never on the number of worker threads.

#include <cstdint>
#include <random>
#include <vector>

#include "repchain/chain_model.hpp"
#include "repchain/distribution.hpp"

namespace repchain {

inline constexpr std::uint64_t kDefaultSeed = 0x5eed'2019'c0ffeeULL;

struct RunRecord {
  Instance instance;  // the attempt that finally succeeded
  std::int64_t roughness = 0;
  std::int64_t delivery_rounds = 0;  // including rounds spent in abandoned attempts
  std::int64_t resets = 0;
};

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t chunk_seed(std::uint64_t master_seed, std::uint64_t chunk);

/// Rounds until the first success of a geometric(p) trial, by inverse CDF.
std::int64_t sample_geometric(double q, Rng& rng);

RunRecord sample_run(const ChainParams& params, Rng& rng);

struct SimulationOptions {
  std::uint64_t seed = kDefaultSeed;
  int threads = 0;  // 0: hardware concurrency
  std::int64_t chunk_size = 8192;
};

struct SimulationSummary {
  std::int64_t runs = 0;
  double mean_lambda = 0.0;  // mean of lambda^K
  double se_lambda = 0.0;
  double mean_delivery = 0.0;
  double se_delivery = 0.0;
  double mean_resets = 0.0;
  std::int64_t max_round = 0;  // largest t_i in any successful attempt
  std::vector<std::int64_t> roughness_counts;  // index k
};

SimulationSummary simulate(const ChainParams& params, std::int64_t runs, const SimulationOptions& options = {});

struct EmpiricalPMF {
  RoughnessPMF pmf;  // relative frequencies; tail_bound is 0
  std::vector<double> std_errors;  // binomial standard error per bin
  std::int64_t runs = 0;
};

EmpiricalPMF estimate_pmf(const ChainParams& params, std::int64_t runs, const SimulationOptions& options = {});

}  // namespace repchain
