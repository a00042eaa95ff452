#include "repchain/chain_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include "repchain/errors.hpp"

namespace repchain {

namespace {

void check_factor(double f, const char* what) {
  if (!(f > 0.0 && f <= 1.0)) {
    std::ostringstream os;
    os << what << " must lie in (0, 1], got " << f;
    throw ParameterError(os.str());
  }
}

}  // namespace

WernerParam::WernerParam(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    std::ostringstream os;
    os << "Werner parameter must lie in [0, 1], got " << value;
    throw ParameterError(os.str());
  }
}

ChainParams ChainParams::make(int n, double p, double lambda, std::optional<int> cutoff) {
  return make(n, p, lambda, 1.0, 1.0, cutoff);
}

ChainParams ChainParams::make(int n, double p, double lambda, double lambda_gen, double lambda_swap,
                              std::optional<int> cutoff) {
  if (n < 1) throw ParameterError("number of segments must be >= 1");
  return make(n, p, lambda, std::vector<double>(static_cast<std::size_t>(n), lambda_gen),
              std::vector<double>(static_cast<std::size_t>(n - 1), lambda_swap), cutoff);
}

ChainParams ChainParams::make(int n, double p, double lambda, std::vector<double> lambda_gen,
                              std::vector<double> lambda_swap, std::optional<int> cutoff) {
  if (n < 1) throw ParameterError("number of segments must be >= 1");
  if (!(p > 0.0 && p <= 1.0)) {
    std::ostringstream os;
    os << "success probability p must lie in (0, 1], got " << p;
    throw ParameterError(os.str());
  }
  check_factor(lambda, "lambda");
  if (lambda_gen.size() != static_cast<std::size_t>(n)) {
    throw ParameterError("lambda_gen must have exactly n entries");
  }
  if (lambda_swap.size() != static_cast<std::size_t>(n - 1)) {
    throw ParameterError("lambda_swap must have exactly n - 1 entries");
  }
  for (double f : lambda_gen) check_factor(f, "lambda_gen");
  for (double f : lambda_swap) check_factor(f, "lambda_swap");
  if (cutoff && *cutoff < 1) throw ParameterError("cut-off must be >= 1");

  ChainParams c;
  c.n = n;
  c.p = p;
  c.q = 1.0 - p;
  c.lambda = lambda;
  c.lambda_gen = std::move(lambda_gen);
  c.lambda_swap = std::move(lambda_swap);
  c.cutoff = cutoff;
  return c;
}

double ChainParams::noise_factor() const {
  double f = 1.0;
  for (double g : lambda_gen) f *= g;
  for (double s : lambda_swap) f *= s;
  return f;
}

ChainParams ChainParams::with_cutoff(std::optional<int> c) const {
  if (c && *c < 1) throw ParameterError("cut-off must be >= 1");
  ChainParams out = *this;
  out.cutoff = c;
  return out;
}

Instance::Instance(std::vector<std::int64_t> t) : t_(std::move(t)) {
  if (t_.empty()) throw ParameterError("instance must contain at least one segment");
  for (auto v : t_) {
    if (v < 1) throw ParameterError("instance rounds must be >= 1");
  }
}

std::int64_t Instance::max_round() const { return *std::max_element(t_.begin(), t_.end()); }

std::int64_t roughness(const Instance& inst) {
  auto t = inst.rounds();
  std::int64_t k = 0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) k += std::llabs(t[i] - t[i + 1]);
  return k;
}

double instance_probability(const Instance& inst, double q) {
  if (!(q >= 0.0 && q < 1.0)) throw ParameterError("q must lie in [0, 1)");
  double prob = 1.0;
  for (auto t : inst.rounds()) prob *= (1.0 - q) * std::pow(q, static_cast<double>(t - 1));
  return prob;
}

double fidelity_from_lambda(WernerParam w) { return 0.75 * w.value() + 0.25; }

WernerParam apply_generation_noise(WernerParam w, const ChainParams& params) {
  return WernerParam(w.value() * params.noise_factor());
}

double segment_success_prob(double total_length_km, int n, double attenuation_km) {
  if (!(total_length_km >= 0.0)) throw ParameterError("total length must be >= 0");
  if (n < 1) throw ParameterError("number of segments must be >= 1");
  if (!(attenuation_km > 0.0)) throw ParameterError("attenuation length must be > 0");
  return std::exp(-total_length_km / (static_cast<double>(n) * attenuation_km));
}

}  // namespace repchain
