#include "repchain/recursion.hpp"

#include <cmath>
#include <sstream>

#include "repchain/errors.hpp"
#include "repchain/regularise.hpp"

namespace repchain {

namespace {

// Rounding slack tolerated before a result is reported as out of range.
constexpr double kRangeSlack = 1e-9;

void check_denominator(double den, int a, int b, double q, double lambda, const char* which) {
  if (std::abs(den) < kSingularityThreshold) {
    std::ostringstream os;
    os << "near-singular coefficient " << which << "^{" << a << "," << b << "} at q=" << q
       << ", lambda=" << lambda;
    throw NearSingularParameters(os.str());
  }
}

// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// sum_{t=1}^{T} r^t, stable for r near 1 and for r > 1.
double truncated_geometric(double r, int cutoff) {
  if (std::abs(r - 1.0) < 1e-13) return static_cast<double>(cutoff) * r;
  return r * (1.0 - std::pow(r, cutoff)) / (1.0 - r);
}

double basis_sum(BasisIndex idx, const RecursionCoeffs& c) {
  const double r = std::pow(c.q, idx.a) * std::pow(c.lambda, idx.b);
  if (c.cutoff) return truncated_geometric(r, *c.cutoff);
  if (std::abs(1.0 - r) < kSingularityThreshold) {
    throw NearSingularParameters("linear form diverges: q^a lambda^b is 1");
  }
  return r / (1.0 - r);
}

double prefactor(int n, const RecursionCoeffs& c) {
  double ratio = (1.0 - c.q) / c.q;
  if (c.cutoff) ratio /= (1.0 - std::pow(c.q, *c.cutoff));
  return std::pow(ratio, n);
}

void validate(int n, double q, double lambda, std::optional<int> cutoff) {
  if (n < 1) throw ParameterError("number of segments must be >= 1");
  if (!(q >= 0.0 && q < 1.0)) throw ParameterError("q must lie in [0, 1)");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ParameterError("lambda must lie in (0, 1]");
  if (cutoff && *cutoff < 1) throw ParameterError("cut-off must be >= 1");
}

double exact_expected_lambda(int n, double q, double lambda, std::optional<int> cutoff) {
  // p = 1, a single-round cut-off or a single segment all force K = 0.
  if (n == 1 || q == 0.0 || lambda == 1.0 || (cutoff && *cutoff == 1)) return 1.0;
  const RecursionCoeffs c(q, lambda, cutoff);
  const double value = prefactor(n, c) * partition_sum(n, c);
  if (!std::isfinite(value)) throw NearSingularParameters("non-finite expected lambda");
  if (value < -kRangeSlack || value > 1.0 + kRangeSlack) {
    std::ostringstream os;
    os << "expected lambda " << value << " outside [0, 1] (n=" << n << ", q=" << q
       << ", lambda=" << lambda << "); cancellation in the recursion";
    throw NumericError(os.str());
  }
  return value;
}

}  // namespace

TermVector::TermVector(std::initializer_list<std::pair<const BasisIndex, double>> init) {
  for (const auto& [idx, c] : init) add(idx, c);
}

void TermVector::add(BasisIndex idx, double coeff) {
  if (coeff == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(idx, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double TermVector::coeff(BasisIndex idx) const {
  auto it = terms_.find(idx);
  return it == terms_.end() ? 0.0 : it->second;
}

TermVector TermVector::scaled(double s) const {
  TermVector out;
  for (const auto& [idx, c] : terms_) out.add(idx, c * s);
  return out;
}

RecursionCoeffs::RecursionCoeffs(double q_, double lambda_, std::optional<int> cutoff_)
    : q(q_), lambda(lambda_), cutoff(cutoff_) {
  if (!(q >= 0.0 && q < 1.0)) throw ParameterError("q must lie in [0, 1)");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ParameterError("lambda must lie in (0, 1]");
  if (cutoff && *cutoff < 1) throw ParameterError("cut-off must be >= 1");
}

double coeff_C(int a, int b, double q, double lambda) {
  const double qa = std::pow(q, a);
  const double d1 = 1.0 - std::pow(lambda, b - 1) * qa;
  const double d2 = 1.0 - std::pow(lambda, b + 1) * qa;
  check_denominator(d1, a, b, q, lambda, "C");
  check_denominator(d2, a, b, q, lambda, "C");
  return -qa * std::pow(lambda, b) * (1.0 / lambda - lambda) / (d1 * d2);
}

double coeff_D(int a, int b, double q, double lambda) {
  const double qa = std::pow(q, a);
  const double den = std::pow(lambda, 1 - b) - qa;
  check_denominator(den, a, b, q, lambda, "D");
  return qa / den;
}

double coeff_E(int a, int b, double q, double lambda, int cutoff) {
  const double r = std::pow(q, a) * std::pow(lambda, b + 1);
  const double den = 1.0 - r;
  check_denominator(den, a, b, q, lambda, "E");
  return -std::pow(r, cutoff + 1) / den;
}

TermVector step(const TermVector& v, const RecursionCoeffs& c) {
  TermVector out;
  for (const auto& [idx, w] : v.terms()) {
    out.add({idx.a + 1, idx.b}, w * coeff_C(idx.a, idx.b, c.q, c.lambda));
    out.add({1, 1}, w * coeff_D(idx.a, idx.b, c.q, c.lambda));
    if (c.cutoff) out.add({1, -1}, w * coeff_E(idx.a, idx.b, c.q, c.lambda, *c.cutoff));
  }
  TermVector pruned;
  for (const auto& [idx, w] : out.terms()) {
    if (std::abs(w) >= kPruneThreshold) pruned.add(idx, w);
  }
  return pruned;
}

double linear_form(const TermVector& v, const RecursionCoeffs& c) {
  CompensatedSum acc;
  for (const auto& [idx, w] : v.terms()) acc.add(w * basis_sum(idx, c));
  return acc.value();
}

double partition_sum(int n, const RecursionCoeffs& c) {
  if (n < 1) throw ParameterError("number of segments must be >= 1");
  TermVector v{{BasisIndex{1, 0}, 1.0}};
  for (int i = 1; i < n; ++i) v = step(v, c);
  return linear_form(v, c);
}

Evaluation evaluate_expected_lambda(int n, double q, double lambda, std::optional<int> cutoff) {
  validate(n, q, lambda, cutoff);
  try {
    return {exact_expected_lambda(n, q, lambda, cutoff), false, {}};
  } catch (const NearSingularParameters& first) {
    // Removable singularity: interpolate from regular evaluations around lambda.
    Evaluation ev;
    ev.nudged = true;
    ev.value = apply_stencil(nudge_stencil(lambda), lambda,
                             [&](double l) { return exact_expected_lambda(n, q, l, cutoff); });
    std::ostringstream os;
    os << first.what() << "; extrapolated from lambda +- " << kNudgeStep;
    ev.warning = os.str();
    return ev;
  }
}

double expected_lambda(int n, double q, double lambda) {
  return evaluate_expected_lambda(n, q, lambda).value;
}

double expected_lambda_moment(int n, int m, double q, double lambda) {
  if (m < 1) throw ParameterError("moment order must be >= 1");
  return expected_lambda(n, q, std::pow(lambda, m));
}

double expected_lambda_cutoff(int n, double q, double lambda, int cutoff) {
  if (cutoff < 1) throw ParameterError("cut-off must be >= 1");
  return evaluate_expected_lambda(n, q, lambda, cutoff).value;
}

double expected_lambda(const ChainParams& params) {
  return evaluate_expected_lambda(params.n, params.q, params.lambda, params.cutoff).value;
}

}  // namespace repchain
