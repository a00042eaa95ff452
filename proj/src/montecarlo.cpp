#include "repchain/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "repchain/errors.hpp"

namespace repchain {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t chunk_seed(std::uint64_t master_seed, std::uint64_t chunk) {
  return splitmix64(master_seed ^ splitmix64(chunk));
}

std::int64_t sample_geometric(double q, Rng& rng) {
  if (q == 0.0) return 1;
  // u in (0, 1] from the top 53 bits, independent of the library's distributions
  const double u = 1.0 - static_cast<double>(rng() >> 11) * 0x1.0p-53;
  const double t = std::ceil(std::log(u) / std::log(q));
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(t));
}

RunRecord sample_run(const ChainParams& params, Rng& rng) {
  std::vector<std::int64_t> t(static_cast<std::size_t>(params.n));
  std::int64_t resets = 0;
  for (;;) {
    for (auto& ti : t) ti = sample_geometric(params.q, rng);
    const std::int64_t last = *std::max_element(t.begin(), t.end());
    if (!params.cutoff || last <= *params.cutoff) {
      Instance inst(std::move(t));
      const std::int64_t k = roughness(inst);
      const std::int64_t delivery = resets * (params.cutoff ? *params.cutoff : 0) + last;
      return RunRecord{std::move(inst), k, delivery, resets};
    }
    ++resets;
  }
}

namespace {

struct ChunkTally {
  double sum_lambda = 0.0, sum_lambda2 = 0.0;
  double sum_delivery = 0.0, sum_delivery2 = 0.0;
  std::int64_t resets = 0;
  std::int64_t max_round = 0;
  std::vector<std::int64_t> counts;
};

ChunkTally run_chunk(const ChainParams& params, std::uint64_t seed, std::int64_t runs) {
  Rng rng(seed);
  ChunkTally tally;
  for (std::int64_t i = 0; i < runs; ++i) {
    const RunRecord r = sample_run(params, rng);
    const double lk = std::pow(params.lambda, static_cast<double>(r.roughness));
    tally.sum_lambda += lk;
    tally.sum_lambda2 += lk * lk;
    const double dt = static_cast<double>(r.delivery_rounds);
    tally.sum_delivery += dt;
    tally.sum_delivery2 += dt * dt;
    tally.resets += r.resets;
    tally.max_round = std::max(tally.max_round, r.instance.max_round());
    const auto k = static_cast<std::size_t>(r.roughness);
    if (k >= tally.counts.size()) tally.counts.resize(k + 1, 0);
    ++tally.counts[k];
  }
  return tally;
}

double standard_error(double sum, double sum2, std::int64_t n) {
  if (n < 2) return 0.0;
  const double mean = sum / n;
  const double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1));
  return std::sqrt(var / n);
}

}  // namespace

SimulationSummary simulate(const ChainParams& params, std::int64_t runs, const SimulationOptions& options) {
  if (runs < 1) throw ParameterError("number of runs must be >= 1");
  if (options.chunk_size < 1) throw ParameterError("chunk size must be >= 1");
  const std::int64_t chunks = (runs + options.chunk_size - 1) / options.chunk_size;
  std::vector<ChunkTally> tallies(static_cast<std::size_t>(chunks));

  unsigned workers = options.threads > 0 ? static_cast<unsigned>(options.threads) : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(chunks)));

  std::atomic<std::int64_t> next{0};
  auto work = [&] {
    for (std::int64_t c = next++; c < chunks; c = next++) {
      const std::int64_t begin = c * options.chunk_size;
      const std::int64_t count = std::min(options.chunk_size, runs - begin);
      tallies[static_cast<std::size_t>(c)] = run_chunk(params, chunk_seed(options.seed, static_cast<std::uint64_t>(c)), count);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  // merge in chunk order so floating-point sums are reproducible
  ChunkTally total;
  for (const ChunkTally& t : tallies) {
    total.sum_lambda += t.sum_lambda;
    total.sum_lambda2 += t.sum_lambda2;
    total.sum_delivery += t.sum_delivery;
    total.sum_delivery2 += t.sum_delivery2;
    total.resets += t.resets;
    total.max_round = std::max(total.max_round, t.max_round);
    if (t.counts.size() > total.counts.size()) total.counts.resize(t.counts.size(), 0);
    for (std::size_t k = 0; k < t.counts.size(); ++k) total.counts[k] += t.counts[k];
  }

  SimulationSummary s;
  s.runs = runs;
  s.mean_lambda = total.sum_lambda / runs;
  s.se_lambda = standard_error(total.sum_lambda, total.sum_lambda2, runs);
  s.mean_delivery = total.sum_delivery / runs;
  s.se_delivery = standard_error(total.sum_delivery, total.sum_delivery2, runs);
  s.mean_resets = static_cast<double>(total.resets) / runs;
  s.max_round = total.max_round;
  s.roughness_counts = std::move(total.counts);
  return s;
}

EmpiricalPMF estimate_pmf(const ChainParams& params, std::int64_t runs, const SimulationOptions& options) {
  const SimulationSummary s = simulate(params, runs, options);
  EmpiricalPMF out;
  out.runs = runs;
  out.pmf.n = params.n;
  out.pmf.q = params.q;
  out.pmf.cutoff = params.cutoff;
  out.pmf.t_max = s.max_round;
  for (std::int64_t c : s.roughness_counts) {
    const double f = static_cast<double>(c) / runs;
    out.pmf.probs.push_back(f);
    out.std_errors.push_back(std::sqrt(f * (1.0 - f) / runs));
  }
  return out;
}

}  // namespace repchain
