#include "repchain/rates.hpp"

#include <cmath>
#include <sstream>

#include "repchain/errors.hpp"
#include "repchain/recursion.hpp"

namespace repchain {

namespace {

// Inclusion-exclusion alternates with binomial weights; past this many
// segments the cancellation costs more than the direct tail sum.
constexpr int kInclusionExclusionMaxN = 20;

void validate_np(int n, double p) {
  if (n < 1) throw ParameterError("number of segments must be >= 1");
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("p must lie in (0, 1]");
}

// (1 - q^t)^n without losing digits when q^t is tiny
double all_done_by(int n, double q, double t) {
  if (t <= 0.0) return 0.0;
  return std::exp(n * std::log1p(-std::pow(q, t)));
}

}  // namespace

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw ParameterError("entropy argument must lie in [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double skf_bb84(WernerParam w) {
  const double qber = (1.0 - w.value()) / 2.0;
  return std::max(0.0, 1.0 - 2.0 * binary_entropy(qber));
}

double lambda_min() {
  static const double root = [] {
    auto f = [](double l) { return 1.0 - 2.0 * binary_entropy((1.0 - l) / 2.0); };
    double lo = 0.5, hi = 1.0;  // f(lo) < 0 < f(hi)
    while (hi - lo > 1e-15) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (f(mid) > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return root;
}

std::optional<int> binned_k_max(double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ParameterError("lambda must lie in (0, 1]");
  if (lambda == 1.0) return std::nullopt;
  return static_cast<int>(std::ceil(std::log(lambda_min()) / std::log(lambda)));
}

double expected_delivery_no_cutoff(int n, double p) {
  validate_np(n, p);
  if (p == 1.0) return 1.0;
  const double q = 1.0 - p;
  if (n <= kInclusionExclusionMaxN) {
    double sum = 0.0;
    double binom = 1.0;
    for (int k = 1; k <= n; ++k) {
      binom = binom * (n - k + 1) / k;
      sum += ((k % 2) ? 1.0 : -1.0) * binom / (1.0 - std::pow(q, k));
    }
    return sum;
  }
  // E[max] = sum_{t >= 0} P(max > t)
  double sum = 0.0;
  for (long t = 0;; ++t) {
    const double term = -std::expm1(n * std::log1p(-std::pow(q, static_cast<double>(t))));
    sum += term;
    if (t > 0 && term < 1e-17 * sum) break;
  }
  return sum;
}

double expected_delivery_cutoff(int n, double p, int cutoff) {
  validate_np(n, p);
  if (cutoff < 1) throw ParameterError("cut-off must be >= 1");
  const double q = 1.0 - p;
  const double success = all_done_by(n, q, cutoff);
  // conditional mean of max t given max t <= T_c
  double within = 0.0;
  double prev = 0.0;
  for (int t = 1; t <= cutoff; ++t) {
    const double cur = all_done_by(n, q, t);
    within += t * (cur - prev);
    prev = cur;
  }
  return (1.0 / success - 1.0) * cutoff + within / success;
}

double expected_delivery_wait_full_window(int n, double p, int cutoff) {
  validate_np(n, p);
  if (cutoff < 1) throw ParameterError("cut-off must be >= 1");
  return cutoff / all_done_by(n, 1.0 - p, cutoff);
}

RateReport skr(const ChainParams& params) {
  RateReport r;
  const double raw = expected_lambda(params);
  r.expected_lambda = apply_generation_noise(WernerParam(std::min(1.0, std::max(0.0, raw))), params).value();
  r.expected_delivery_rounds = params.cutoff ? expected_delivery_cutoff(params.n, params.p, *params.cutoff)
                                             : expected_delivery_no_cutoff(params.n, params.p);
  r.skf = skf_bb84(WernerParam(r.expected_lambda));
  r.skr_per_round = r.skf / r.expected_delivery_rounds;
  return r;
}

RateReport skr_binned(const ChainParams& params, const RoughnessPMF& pmf) {
  if (pmf.n != params.n || std::abs(pmf.q - params.q) > 1e-15 || pmf.cutoff != params.cutoff) {
    std::ostringstream os;
    os << "pmf (n=" << pmf.n << ", q=" << pmf.q << ") does not describe the chain (n=" << params.n
       << ", q=" << params.q << ")";
    throw ParameterError(os.str());
  }
  RateReport r = skr(params);
  BinnedRate b;
  b.k_max = binned_k_max(params.lambda);
  const double noise = params.noise_factor();
  std::size_t last = pmf.probs.size();
  if (b.k_max) last = std::min(last, static_cast<std::size_t>(*b.k_max) + 1);
  double lk = 1.0;
  for (std::size_t k = 0; k < last; ++k) {
    b.skf_binned += pmf.probs[k] * skf_bb84(WernerParam(lk * noise));
    lk *= params.lambda;
  }
  b.skr_binned = b.skf_binned / r.expected_delivery_rounds;
  r.binned = b;
  return r;
}

CutoffOptimum optimize_cutoff(const ChainParams& params, int t_lo, int t_hi) {
  if (t_lo < 1 || t_hi < t_lo) throw ParameterError("cut-off range must be a nonempty range of integers >= 1");
  CutoffOptimum out;
  out.no_cutoff = skr(params.with_cutoff(std::nullopt));
  out.skr_by_cutoff.reserve(static_cast<std::size_t>(t_hi - t_lo + 1));
  bool first = true;
  for (int t = t_lo; t <= t_hi; ++t) {
    const RateReport r = skr(params.with_cutoff(t));
    out.skr_by_cutoff.push_back(r.skr_per_round);
    // strict comparison keeps the smallest T_c among equals
    if (first || r.skr_per_round > out.best.skr_per_round) {
      out.cutoff = t;
      out.best = r;
      first = false;
    }
  }
  return out;
}

std::vector<SegmentOptimum> optimize_segments(double total_length_km, double lambda, double lambda_gen, int n_lo,
                                              int n_hi, int t_lo, int t_hi, double attenuation_km) {
  if (!(total_length_km > 0.0)) throw ParameterError("total length must be positive");
  if (n_lo < 1 || n_hi < n_lo) throw ParameterError("segment range must be a nonempty range of integers >= 1");
  std::vector<SegmentOptimum> table;
  for (int n = n_lo; n <= n_hi; ++n) {
    SegmentOptimum row;
    row.n = n;
    row.p = segment_success_prob(total_length_km, n, attenuation_km);
    const auto params = ChainParams::make(n, row.p, lambda, lambda_gen, 1.0);
    row.optimum = optimize_cutoff(params, t_lo, t_hi);
    table.push_back(std::move(row));
  }
  return table;
}

}  // namespace repchain
