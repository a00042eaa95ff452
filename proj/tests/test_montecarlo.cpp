#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "repchain/distribution.hpp"
#include "repchain/errors.hpp"
#include "repchain/montecarlo.hpp"
#include "repchain/rates.hpp"
#include "repchain/recursion.hpp"

using namespace repchain;

TEST_CASE("deterministic success") {
  Rng rng(1);
  const RunRecord r = sample_run(ChainParams::make(4, 1.0, 0.9), rng);
  CHECK(r.roughness == 0);
  CHECK(r.delivery_rounds == 1);
  CHECK(r.resets == 0);
  for (auto t : r.instance.rounds()) CHECK(t == 1);

  const EmpiricalPMF e = estimate_pmf(ChainParams::make(4, 1.0, 0.9), 100);
  REQUIRE(e.pmf.probs.size() == 1);
  CHECK(e.pmf.probs[0] == 1.0);
}

TEST_CASE("same seed, same run") {
  const auto params = ChainParams::make(5, 0.2, 0.95, 4);
  Rng a(42), b(42);
  for (int i = 0; i < 50; ++i) {
    const RunRecord x = sample_run(params, a);
    const RunRecord y = sample_run(params, b);
    CHECK(x.roughness == y.roughness);
    CHECK(x.delivery_rounds == y.delivery_rounds);
    CHECK(x.resets == y.resets);
    CHECK(std::equal(x.instance.rounds().begin(), x.instance.rounds().end(), y.instance.rounds().begin()));
    CHECK(x.delivery_rounds == x.resets * 4 + x.instance.max_round());
  }
}

TEST_CASE("single run gives a single atom") {
  const EmpiricalPMF e = estimate_pmf(ChainParams::make(3, 0.4, 0.9), 1, {.seed = 3});
  double s = 0.0;
  int atoms = 0;
  for (double v : e.pmf.probs) {
    s += v;
    atoms += v > 0;
  }
  CHECK(s == 1.0);
  CHECK(atoms == 1);
}

TEST_CASE("geometric sampler") {
  Rng rng(9);
  const double q = 0.7;
  const int n = 200000;
  double sum = 0.0;
  int ones = 0;
  for (int i = 0; i < n; ++i) {
    const auto t = sample_geometric(q, rng);
    CHECK_UNARY(t >= 1);
    sum += static_cast<double>(t);
    ones += t == 1;
  }
  const double mean = 1 / (1 - q), sd = std::sqrt(q) / (1 - q);
  CHECK(std::abs(sum / n - mean) < 5 * sd / std::sqrt(double(n)));
  CHECK(std::abs(ones / double(n) - 0.3) < 5 * std::sqrt(0.3 * 0.7 / n));
}

TEST_CASE("output independent of thread count") {
  const auto params = ChainParams::make(4, 0.3, 0.97, 6);
  SimulationOptions one{.seed = 77, .threads = 1, .chunk_size = 1000};
  SimulationOptions four{.seed = 77, .threads = 4, .chunk_size = 1000};
  const SimulationSummary a = simulate(params, 20000, one);
  const SimulationSummary b = simulate(params, 20000, four);
  CHECK(a.mean_lambda == b.mean_lambda);
  CHECK(a.mean_delivery == b.mean_delivery);
  CHECK(a.roughness_counts == b.roughness_counts);
  const SimulationSummary c = simulate(params, 20000, {.seed = 78, .threads = 1, .chunk_size = 1000});
  CHECK(a.mean_lambda != c.mean_lambda);
}

TEST_CASE("restart count with T_c = 1") {
  const auto params = ChainParams::make(2, 0.5, 0.9, 1);
  const SimulationSummary s = simulate(params, 100000, {.seed = 11});
  CHECK(std::abs(s.mean_delivery - 4.0) < 5 * s.se_delivery);
  CHECK(std::abs(s.mean_delivery - expected_delivery_cutoff(2, 0.5, 1)) < 5 * s.se_delivery);
  CHECK(std::abs(s.mean_resets - 3.0) < 0.1);
  CHECK(s.max_round == 1);
}

TEST_CASE("empirical mean of lambda^K matches the recursion") {
  for (auto [n, p, lam] : {std::tuple{3, 0.5, 0.9}, {5, 0.2, 0.98}, {8, 0.6, 0.95}}) {
    const SimulationSummary s = simulate(ChainParams::make(n, p, lam), 100000, {.seed = 100u + n});
    CHECK(std::abs(s.mean_lambda - expected_lambda(n, 1 - p, lam)) < 5 * s.se_lambda);
    CHECK(std::abs(s.mean_delivery - expected_delivery_no_cutoff(n, p)) < 5 * s.se_delivery);
  }
}

TEST_CASE("cut-off simulation matches the cut-off formulas") {
  for (auto [n, p, lam, T] : {std::tuple{3, 0.3, 0.95, 4}, {5, 0.1, 0.99, 12}, {2, 0.5, 0.8, 2}}) {
    const SimulationSummary s = simulate(ChainParams::make(n, p, lam, T), 100000, {.seed = 500u + T});
    CHECK(s.max_round <= T);
    CHECK(std::abs(s.mean_lambda - expected_lambda_cutoff(n, 1 - p, lam, T)) < 5 * s.se_lambda);
    CHECK(std::abs(s.mean_delivery - expected_delivery_cutoff(n, p, T)) < 5 * s.se_delivery);
  }
}

TEST_CASE("empirical roughness distribution") {
  const double q = 0.6;
  const int n = 6;
  const std::int64_t runs = 100000;
  const EmpiricalPMF e = estimate_pmf(ChainParams::make(n, 1 - q, 0.9), runs, {.seed = 2019});
  const RoughnessPMF exact = roughness_pmf(n, q, 1e-12);
  const std::size_t m = std::max(e.pmf.probs.size(), exact.probs.size());
  for (std::size_t k = 0; k < m; ++k) {
    const double p = exact.at(k);
    const double sigma = std::sqrt(p * (1 - p) / runs);
    CAPTURE(k);
    CHECK(std::abs(e.pmf.at(k) - p) <= 5 * sigma + 1e-12);
  }
  CHECK(e.std_errors.size() == e.pmf.probs.size());
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(simulate(ChainParams::make(2, 0.5, 0.9), 0), ParameterError);
  CHECK_THROWS_AS(simulate(ChainParams::make(2, 0.5, 0.9), 10, {.chunk_size = 0}), ParameterError);
}
