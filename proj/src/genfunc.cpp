#include "repchain/genfunc.hpp"

#include <cmath>
#include <sstream>

#include "repchain/errors.hpp"
#include "repchain/recursion.hpp"
#include "repchain/regularise.hpp"

namespace repchain {

namespace {

constexpr double kTermRelTol = 1e-16;
constexpr int kNegligibleRun = 3;
constexpr double kBisectionWidth = 1e-14;
constexpr double kPoleResidualTol = 1e-12;
constexpr int kMaxScanSteps = 4000;

// Value together with its derivative in one scalar variable.
struct Dual {
  double v = 0.0;
  double d = 0.0;
};
Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
Dual operator*(double s, Dual a) { return {s * a.v, s * a.d}; }
Dual operator-(double s, Dual a) { return {s - a.v, -a.d}; }

void validate_q(double q) {
  if (!(q > 0.0 && q < 1.0)) throw ParameterError("q must lie in (0, 1) for the q-series");
}

void validate_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ParameterError("lambda must lie in (0, 1]");
}

// Series at an argument that is itself a function of y: returns F(z(y)) and dF/dy.
Dual series(std::vector<double> num, std::vector<double> den, double q, Dual z) {
  const SeriesValue s = q_hypergeometric_series({std::move(num), std::move(den), q, z.v});
  return {s.value, s.derivative * z.d};
}

double safe_inverse(double den, const char* what) {
  if (std::abs(den) < kSingularityThreshold) {
    std::ostringstream os;
    os << "near-singular prefactor " << what;
    throw NearSingularParameters(os.str());
  }
  return 1.0 / den;
}

}  // namespace

double q_pochhammer(double a, double q, int m) {
  if (m < 0) throw ParameterError("q-Pochhammer length must be >= 0");
  double prod = 1.0;
  double aq = a;
  for (int i = 0; i < m; ++i) {
    prod *= 1.0 - aq;
    aq *= q;
  }
  return prod;
}

SeriesValue q_hypergeometric_series(const QHypergeometricSpec& spec) {
  validate_q(spec.q);
  const double q = spec.q;
  const double z = spec.argument;
  const int sign_power = 1 + static_cast<int>(spec.denominator_params.size()) -
                         static_cast<int>(spec.numerator_params.size());

  SeriesValue out;
  out.value = 1.0;
  out.terms = 1;
  if (z == 0.0) {
    // derivative is the m = 1 coefficient
    double c1 = 1.0;
    for (double c : spec.numerator_params) c1 *= 1.0 - c;
    for (double d : spec.denominator_params) c1 /= 1.0 - d;
    c1 /= 1.0 - q;
    if (sign_power != 0) c1 *= std::pow(-1.0, sign_power);
    out.derivative = c1;
    return out;
  }

  // Extended precision: for q near 1 the terms grow large and alternate before
  // the q^{m(m-1)/2} damping wins, and the cancellation costs digits.
  using wide = long double;
  wide value = 1.0L;
  wide deriv = 0.0L;
  wide term = 1.0L;  // c_m z^m
  wide qm = 1.0L;    // q^m
  int negligible = 0;
  for (int m = 0; m < kSeriesMaxTerms; ++m) {
    // term_{m+1} / term_m
    wide ratio = z;
    for (double c : spec.numerator_params) ratio *= 1.0L - c * qm;
    for (double d : spec.denominator_params) {
      const wide den = 1.0L - d * qm;
      if (std::abs(den) < kSingularityThreshold) {
        std::ostringstream os;
        os << "q-series denominator parameter " << d << " meets q^-" << m;
        throw NearSingularParameters(os.str());
      }
      ratio /= den;
    }
    ratio /= 1.0L - qm * q;
    if (sign_power != 0) ratio *= std::pow(-qm, sign_power);
    term *= ratio;
    qm *= q;

    const int idx = m + 1;
    const wide dterm = idx * term / z;
    value += term;
    deriv += dterm;
    out.value = static_cast<double>(value);
    out.derivative = static_cast<double>(deriv);
    out.terms = idx + 1;
    if (!std::isfinite(out.value) || !std::isfinite(out.derivative)) break;

    const bool small = std::abs(term) <= kTermRelTol * std::abs(value) && std::abs(dterm) <= kTermRelTol * std::abs(deriv);
    negligible = small ? negligible + 1 : 0;
    if (negligible >= kNegligibleRun) return out;
  }
  std::ostringstream os;
  os << "q-series failed to converge within " << kSeriesMaxTerms << " terms at argument " << z;
  throw SeriesDivergence(os.str());
}

double q_hypergeometric(const QHypergeometricSpec& spec) { return q_hypergeometric_series(spec).value; }

namespace {

double ascent_argument(double x, double q, double lambda) { return x * (1.0 - q) * q * (1.0 / lambda - lambda); }
double loop_slope(double q, double lambda) { return (1.0 - q) * q * (1.0 - lambda * lambda); }

double phi1(double x, double q, double lambda) {
  return q_hypergeometric({{q, q, 0.0}, {q * q, lambda * q, q / lambda}, q, ascent_argument(x, q, lambda)});
}
double phi2(double x, double q, double lambda) {
  return q_hypergeometric({{q, 0.0}, {q * q / lambda, lambda * q}, q, ascent_argument(x, q, lambda)});
}
// value and d/dx
Dual phi3(double x, double q, double lambda) {
  return series({q, 0.0}, {q * q, q * lambda * lambda}, q, Dual{x * loop_slope(q, lambda), loop_slope(q, lambda)});
}
double phi4(double x, double q, double lambda) {
  return q_hypergeometric({{lambda * q, 0.0}, {lambda * q * q, q * lambda * lambda}, q, x * loop_slope(q, lambda)});
}

}  // namespace

PhiValues phi_functions(double x, double q, double lambda) {
  validate_q(q);
  validate_lambda(lambda);
  PhiValues out;
  out.phi1 = phi1(x, q, lambda);
  out.phi2 = phi2(x, q, lambda);
  const Dual p3 = phi3(x, q, lambda);
  out.phi3 = p3.v;
  out.dphi3 = p3.d;
  out.phi4 = phi4(x, q, lambda);
  return out;
}

namespace {

double link_factor(double q, double lambda) {
  const double p = 1.0 - q;
  return p * p * lambda * safe_inverse((lambda - q) * (1.0 - lambda * q), "(lambda - q)(1 - lambda q)");
}

}  // namespace

double generating_function(double x, double q, double lambda) {
  const PhiValues phi = phi_functions(x, q, lambda);
  return x * phi.phi1 + x * x * link_factor(q, lambda) * phi.phi2 * phi.phi4 / (1.0 - x * phi.phi3);
}

namespace {

double cutoff_scale(double q, int cutoff) { return (1.0 - q) / (q * (1.0 - std::pow(q, cutoff))); }

}  // namespace

CutoffPhiValues cutoff_phi_functions(double x, double q, double lambda, int cutoff) {
  validate_q(q);
  validate_lambda(lambda);
  if (cutoff < 1) throw ParameterError("cut-off must be >= 1");

  const Dual y{cutoff_scale(q, cutoff) * x, 1.0};
  const double l2 = lambda * lambda;
  const double ascent = 1.0 / lambda - lambda;  // argument slope of the series climbing in a
  const double loop_up = 1.0 - l2;
  const double loop_down = 1.0 / l2 - 1.0;
  const double qT1 = std::pow(q, cutoff + 1);
  const double qT2 = qT1 * q;

  Dual to_end0, to_end1, to_end2;
  double qt = q;
  double qlt = q * lambda;
  double qdt = q / lambda;
  for (int t = 1; t <= cutoff; ++t) {
    const double qt1 = qt * q;
    to_end0 = to_end0 + (qt * y) * series({q, 0.0}, {q / lambda, lambda * q}, q, (qt1 * ascent) * y);
    to_end1 = to_end1 + qlt * series({0.0}, {q * l2}, q, (qt1 * loop_up) * y);
    to_end2 = to_end2 + qdt * series({0.0}, {q / l2}, q, (qt1 * loop_down) * y);
    qt = qt1;
    qlt *= q * lambda;
    qdt *= q / lambda;
  }

  const Dual d01 = (-safe_inverse(1.0 - lambda / q, "1 - lambda/q") * y) *
                   series({q, 0.0}, {q * q / lambda, q * lambda}, q, (q * q * ascent) * y);
  const Dual d02 = (-std::pow(q * lambda, cutoff + 1) * safe_inverse(1.0 - lambda * q, "1 - lambda q") * y) *
                   series({q, 0.0}, {q / lambda, q * q * lambda}, q, (qT2 * ascent) * y);
  const Dual d11 = (q / (1.0 - q) * y) * series({q, 0.0}, {q * q, q * l2}, q, (q * q * loop_up) * y);
  const Dual d22 = (-qT1 / (1.0 - q) * y) * series({q, 0.0}, {q * q, q / l2}, q, (qT2 * loop_down) * y);
  const Dual d12 = (-std::pow(q * l2, cutoff + 1) * safe_inverse(1.0 - q * l2, "1 - q lambda^2") * y) *
                   series({q, 0.0}, {q, q * q * l2}, q, (qT2 * loop_up) * y);
  const Dual d21 = (-safe_inverse(1.0 - l2 / q, "1 - lambda^2/q") * y) *
                   series({q, 0.0}, {q, q * q / l2}, q, (q * q * loop_down) * y);

  const Dual loop = d11 + d22 + d12 * d21 - d11 * d22;
  const Dual feed = d01 * ((1.0 - d22) * to_end1 + d12 * to_end2) + d02 * (d21 * to_end1 + (1.0 - d11) * to_end2);

  CutoffPhiValues out;
  out.to_end0 = to_end0.v;
  out.d01 = d01.v;
  out.d02 = d02.v;
  out.d11 = d11.v;
  out.d22 = d22.v;
  out.d12 = d12.v;
  out.d21 = d21.v;
  out.to_end1 = to_end1.v;
  out.to_end2 = to_end2.v;
  out.loop = loop.v;
  out.dloop = loop.d;
  out.feed = feed.v;
  out.dfeed = feed.d;
  return out;
}

double generating_function_cutoff(double x, double q, double lambda, int cutoff) {
  const CutoffPhiValues phi = cutoff_phi_functions(x, q, lambda, cutoff);
  const double y = cutoff_scale(q, cutoff) * x;
  return phi.to_end0 + y * phi.feed / (1.0 - phi.loop);
}

double first_positive_root(const std::function<double(double)>& f, double step, int max_scan_steps, double tol,
                           RootSolverReport* report) {
  if (!(step > 0.0)) throw ParameterError("scan step must be positive");
  RootSolverReport rep;
  double lo = 0.0;
  double f_lo = f(lo);
  if (!(f_lo > 0.0)) throw RootNotBracketed("root scan expects f(0) > 0");
  double hi = lo;
  double f_hi = f_lo;
  while (f_hi > 0.0) {
    if (rep.scan_steps >= max_scan_steps) {
      std::ostringstream os;
      os << "no sign change of the pole denominator up to x = " << hi;
      throw RootNotBracketed(os.str());
    }
    lo = hi;
    f_lo = f_hi;
    hi = lo + step;
    f_hi = f(hi);
    ++rep.scan_steps;
    if (std::isnan(f_hi)) throw RootNotBracketed("pole denominator is not finite during the scan");
  }
  if (f_hi == 0.0) lo = hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    ++rep.bisection_steps;
    if (f_mid > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // The bracket is at the resolution of f itself; report its best point.
  double root = 0.5 * (lo + hi);
  rep.residual = std::abs(f(root));
  for (double x : {lo, hi}) {
    const double r = std::abs(f(x));
    if (r < rep.residual) {
      root = x;
      rep.residual = r;
    }
  }
  rep.bracket_lo = lo;
  rep.bracket_hi = hi;
  if (report) *report = rep;
  return root;
}

namespace {

void check_residual(const RootSolverReport& rep) {
  if (!(rep.residual < kPoleResidualTol)) {
    std::ostringstream os;
    os << "pole residual " << rep.residual << " exceeds " << kPoleResidualTol;
    throw NumericError(os.str());
  }
}

PoleAsymptotics unit_asymptotics() {
  PoleAsymptotics out;
  out.rho = 1.0;
  out.A = 1.0;
  out.B = 1.0;
  out.residue = -1.0;
  return out;
}

// Evaluates at the regular stencil points around lambda and recombines.
template <class F>
PoleAsymptotics nudged_asymptotics(double lambda, F&& exact) {
  const NudgeStencil st = nudge_stencil(lambda);
  PoleAsymptotics out;
  out.rho = 0.0;
  out.A = 0.0;
  for (std::size_t i = 0; i < st.size; ++i) {
    const PoleAsymptotics at = exact(lambda + st.offsets[i]);
    out.rho += st.weights[i] * at.rho;
    out.A += st.weights[i] * at.A;
    if (i == 0) out.solver = at.solver;
  }
  out.B = 1.0 / out.rho;
  out.residue = -out.A * out.rho;
  out.nudged = true;
  return out;
}

PoleAsymptotics exact_asymptotic_AB(double q, double lambda) {
  PoleAsymptotics out;
  out.rho = find_dominant_pole(q, lambda, &out.solver);
  const Dual p3 = phi3(out.rho, q, lambda);
  out.A = link_factor(q, lambda) * out.rho * phi2(out.rho, q, lambda) * phi4(out.rho, q, lambda) /
          (p3.v + out.rho * p3.d);
  out.B = 1.0 / out.rho;
  out.residue = -out.A * out.rho;
  return out;
}

PoleAsymptotics exact_asymptotic_AB_cutoff(double q, double lambda, int cutoff) {
  auto denominator = [&](double x) { return 1.0 - cutoff_phi_functions(x, q, lambda, cutoff).loop; };
  const double at_one = cutoff_phi_functions(1.0, q, lambda, cutoff).loop;
  const double guess = at_one > 0.0 ? 1.0 / at_one : 1.0;

  PoleAsymptotics out;
  out.rho = first_positive_root(denominator, 0.05 * guess, kMaxScanSteps, kBisectionWidth, &out.solver);
  check_residual(out.solver);
  const CutoffPhiValues phi = cutoff_phi_functions(out.rho, q, lambda, cutoff);
  // N(y)/(1 - S(y)) with y = R x: the R of dS/dx cancels the R in front of N.
  out.A = phi.feed / phi.dloop;
  out.B = 1.0 / out.rho;
  out.residue = -out.A * out.rho;
  return out;
}

}  // namespace

double find_dominant_pole(double q, double lambda, RootSolverReport* report) {
  validate_q(q);
  validate_lambda(lambda);
  if (lambda == 1.0) {
    if (report) *report = {};
    return 1.0;
  }
  auto denominator = [&](double x) { return 1.0 - x * phi3(x, q, lambda).v; };
  const double guess = 1.0 / phi3(1.0, q, lambda).v;
  RootSolverReport rep;
  const double rho = first_positive_root(denominator, 0.05 * guess, kMaxScanSteps, kBisectionWidth, &rep);
  check_residual(rep);
  if (report) *report = rep;
  return rho;
}

PoleAsymptotics asymptotic_AB(double q, double lambda) {
  if (!(q >= 0.0 && q < 1.0)) throw ParameterError("q must lie in [0, 1)");
  validate_lambda(lambda);
  if (lambda == 1.0 || q == 0.0) return unit_asymptotics();
  try {
    return exact_asymptotic_AB(q, lambda);
  } catch (const NearSingularParameters&) {
    return nudged_asymptotics(lambda, [&](double l) { return exact_asymptotic_AB(q, l); });
  }
}

PoleAsymptotics asymptotic_AB_cutoff(double q, double lambda, int cutoff) {
  if (!(q >= 0.0 && q < 1.0)) throw ParameterError("q must lie in [0, 1)");
  validate_lambda(lambda);
  if (cutoff < 1) throw ParameterError("cut-off must be >= 1");
  if (cutoff == 1 || lambda == 1.0 || q == 0.0) return unit_asymptotics();
  try {
    return exact_asymptotic_AB_cutoff(q, lambda, cutoff);
  } catch (const NearSingularParameters&) {
    return nudged_asymptotics(lambda, [&](double l) { return exact_asymptotic_AB_cutoff(q, l, cutoff); });
  }
}

FibonacciCheck fibonacci_check() {
  FibonacciCheck out;
  out.rho = first_positive_root([](double x) { return 1.0 - x - x * x; }, 0.05, kMaxScanSteps, kBisectionWidth,
                                &out.solver);
  // residue of x / (1 - x - x^2): numerator over the derivative of the denominator
  out.residue = out.rho / (-1.0 - 2.0 * out.rho);
  out.approx_f10 = -out.residue / std::pow(out.rho, 11);
  return out;
}

}  // namespace repchain
