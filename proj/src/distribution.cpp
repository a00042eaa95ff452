#include "repchain/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "repchain/errors.hpp"

namespace repchain {

namespace {

void validate(int n, double q, double tail_eps) {
  if (n < 1) throw ParameterError("number of segments must be >= 1");
  if (!(q >= 0.0 && q < 1.0)) throw ParameterError("q must lie in [0, 1)");
  if (!(tail_eps > 0.0 && tail_eps < 1.0)) throw ParameterError("tail_eps must lie in (0, 1)");
}

// Smallest T with n q^T / (1 - q) < eps.
std::int64_t rounds_for_tail(int n, double q, double eps) {
  if (q == 0.0) return 1;
  const double t = std::log(eps * (1.0 - q) / n) / std::log(q);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(t)) + 1);
}

// Runs the programme for per-round weights w[0..T-1] (round i+1 has weight
// w[i]) and returns P(K = k) for k <= k_cap.
std::vector<double> run_programme(int n, const std::vector<double>& w, std::int64_t k_cap) {
  const std::size_t rounds = w.size();
  const std::size_t width = static_cast<std::size_t>(k_cap) + 1;
  std::vector<double> cur(rounds * width, 0.0);
  std::vector<double> next(rounds * width, 0.0);
  for (std::size_t i = 0; i < rounds; ++i) cur[i * width] = w[i];

  std::vector<double> below(width), below_next(width);
  for (int seg = 1; seg < n; ++seg) {
    // next[i][k] <- sum_{j >= i} cur[j][k - (j - i)], filled from the top round down.
    for (std::size_t i = rounds; i-- > 0;) {
      double* row = &next[i * width];
      const double* src = &cur[i * width];
      if (i + 1 < rounds) {
        const double* up = &next[(i + 1) * width];
        row[0] = src[0];
        for (std::size_t k = 1; k < width; ++k) row[k] = src[k] + up[k - 1];
      } else {
        std::copy(src, src + width, row);
      }
    }
    // Add sum_{j < i} cur[j][k - (i - j)] via a rolling diagonal accumulator.
    std::fill(below.begin(), below.end(), 0.0);
    for (std::size_t i = 0; i < rounds; ++i) {
      double* row = &next[i * width];
      const double* src = &cur[i * width];
      below_next[0] = 0.0;
      for (std::size_t k = 1; k < width; ++k) below_next[k] = below[k - 1] + src[k - 1];
      for (std::size_t k = 0; k < width; ++k) row[k] = w[i] * (row[k] + below[k]);
      std::swap(below, below_next);
    }
    std::swap(cur, next);
  }

  std::vector<double> probs(width, 0.0);
  for (std::size_t i = 0; i < rounds; ++i) {
    const double* row = &cur[i * width];
    for (std::size_t k = 0; k < width; ++k) probs[k] += row[k];
  }
  return probs;
}

void check_cells(std::int64_t rounds, std::int64_t k_cap, const PmfLimits& limits) {
  if (rounds > limits.max_rounds) {
    std::ostringstream os;
    os << "pmf needs " << rounds << " rounds per segment, cap is " << limits.max_rounds;
    throw ResourceLimit(os.str());
  }
  if (rounds * (k_cap + 1) > limits.max_cells) {
    std::ostringstream os;
    os << "pmf table of " << rounds << " x " << (k_cap + 1) << " cells exceeds cap " << limits.max_cells;
    throw ResourceLimit(os.str());
  }
}

// Keeps the shortest prefix whose mass reaches 1 - eps.
void truncate_to_mass(RoughnessPMF& pmf, std::vector<double> probs, double eps) {
  double cum = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    cum += probs[k];
    if (cum >= 1.0 - eps) {
      probs.resize(k + 1);
      pmf.probs = std::move(probs);
      pmf.tail_bound = std::max(0.0, 1.0 - cum);
      return;
    }
  }
  std::ostringstream os;
  os << "k cap " << probs.size() - 1 << " reached with cumulative mass " << cum << " < 1 - " << eps;
  throw ResourceLimit(os.str());
}

// Largest roughness reachable inside the table, so the default cap never cuts mass.
std::int64_t support_k(int n, std::int64_t rounds) { return static_cast<std::int64_t>(n - 1) * (rounds - 1); }

}  // namespace

double RoughnessPMF::total() const {
  double s = 0.0;
  for (double v : probs) s += v;
  return s;
}

RoughnessPMF roughness_pmf(int n, double q, double tail_eps, const PmfLimits& limits) {
  validate(n, q, tail_eps);
  RoughnessPMF pmf;
  pmf.n = n;
  pmf.q = q;
  if (n == 1 || q == 0.0) {
    pmf.probs = {1.0};
    return pmf;
  }
  const std::int64_t rounds = rounds_for_tail(n, q, tail_eps);
  const std::int64_t k_cap = limits.max_k > 0 ? std::min(limits.max_k, support_k(n, rounds)) : support_k(n, rounds);
  check_cells(rounds, k_cap, limits);

  const double p = 1.0 - q;
  std::vector<double> w(static_cast<std::size_t>(rounds));
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = p * std::pow(q, static_cast<double>(i));

  pmf.t_max = rounds;
  truncate_to_mass(pmf, run_programme(n, w, k_cap), tail_eps);
  return pmf;
}

RoughnessPMF roughness_pmf_cutoff(int n, double q, int cutoff, double tail_eps, const PmfLimits& limits) {
  validate(n, q, tail_eps);
  if (cutoff < 1) throw ParameterError("cut-off must be >= 1");
  RoughnessPMF pmf;
  pmf.n = n;
  pmf.q = q;
  pmf.cutoff = cutoff;
  if (n == 1 || q == 0.0 || cutoff == 1) {
    pmf.probs = {1.0};
    return pmf;
  }
  const std::int64_t rounds = cutoff;
  const std::int64_t support = support_k(n, rounds);
  const std::int64_t k_cap = limits.max_k > 0 ? std::min(limits.max_k, support) : support;
  check_cells(rounds, k_cap, limits);

  const double p = 1.0 - q;
  const double norm = 1.0 - std::pow(q, cutoff);
  std::vector<double> w(static_cast<std::size_t>(rounds));
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = p * std::pow(q, static_cast<double>(i)) / norm;

  pmf.t_max = rounds;
  truncate_to_mass(pmf, run_programme(n, w, k_cap), tail_eps);
  return pmf;
}

double pmf_to_expected_lambda(const RoughnessPMF& pmf, double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ParameterError("lambda must lie in (0, 1]");
  double s = 0.0;
  double lk = 1.0;
  for (double pk : pmf.probs) {
    s += pk * lk;
    lk *= lambda;
  }
  return s;
}

BruteForceResult brute_force_expected_lambda(int n, double q, double lambda, std::int64_t t_max,
                                             std::int64_t enumeration_cap) {
  if (n < 1) throw ParameterError("number of segments must be >= 1");
  if (!(q >= 0.0 && q < 1.0)) throw ParameterError("q must lie in [0, 1)");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParameterError("lambda must lie in [0, 1]");
  if (t_max < 1) throw ParameterError("t_max must be >= 1");
  const double cells = std::pow(static_cast<double>(t_max), n);
  if (cells > static_cast<double>(enumeration_cap)) {
    std::ostringstream os;
    os << "enumeration of " << t_max << "^" << n << " instances exceeds cap " << enumeration_cap;
    throw ResourceLimit(os.str());
  }

  const double p = 1.0 - q;
  std::vector<double> w(static_cast<std::size_t>(t_max));
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = p * std::pow(q, static_cast<double>(i));
  std::vector<double> lam_pow(static_cast<std::size_t>(t_max));
  for (std::size_t i = 0; i < lam_pow.size(); ++i) lam_pow[i] = std::pow(lambda, static_cast<double>(i));

  // Odometer over (t_1, ..., t_n); prefix weights are kept per depth.
  std::vector<std::int64_t> t(static_cast<std::size_t>(n), 0);
  std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 1.0);
  long double total = 0.0L;
  std::size_t depth = 0;
  for (;;) {
    const std::size_t d = depth;
    double weight = prefix[d] * w[static_cast<std::size_t>(t[d])];
    if (d > 0) weight *= lam_pow[static_cast<std::size_t>(std::llabs(t[d] - t[d - 1]))];
    if (d + 1 == static_cast<std::size_t>(n)) {
      total += weight;
      // advance the last digit, carrying upwards
      std::size_t k = d;
      while (true) {
        if (++t[k] < t_max) break;
        t[k] = 0;
        if (k == 0) {
          const double tail = 1.0 - std::pow(1.0 - std::pow(q, static_cast<double>(t_max)), n);
          return {static_cast<double>(total), tail};
        }
        --k;
      }
      depth = k;
    } else {
      prefix[d + 1] = weight;
      depth = d + 1;
    }
  }
}

}  // namespace repchain
