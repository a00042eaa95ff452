#pragma once

// Qudit Pauli channels and their Fourier description.
//
// A Pauli channel applies X^a Z^b with probability p(a, b), where
// X|j> = |j+1 mod d> and Z|j> = w^j |j>, w = exp(2 pi i / d). Its lambda-vector
// is the Fourier transform over C_d x C_d,
//
//   lambda(u, v) = sum_{a,b} p(a, b) w^{-(u a + v b)},
//
// stored row-major in (u, v) with lambda(0, 0) = 1 first. Composition of
// channels is convolution, hence pointwise multiplication of lambda-vectors.

#include <array>
#include <complex>
#include <span>
#include <string>
#include <vector>

namespace repchain {

using Complex = std::complex<double>;

/// Dimension cap for the explicit density-matrix checks (matrices of size d^4).
inline constexpr int kMaxOracleDim = 5;

class PauliChannel {
 public:
  /// probs[a * d + b] is the probability of X^a Z^b.
  PauliChannel(int d, std::vector<double> probs);

  static PauliChannel identity(int d);
  /// Identity with probability p_identity, every other Pauli equally likely.
  static PauliChannel depolarizing(int d, double p_identity);
  /// Z^b (b != 0) with total probability p, spread evenly over the d - 1 powers.
  static PauliChannel dephasing(int d, double p);
  static PauliChannel qubit(double p_i, double p_x, double p_y, double p_z);

  int dim() const { return d_; }
  double prob(int a, int b) const;
  std::span<const double> probs() const& { return probs_; }
  std::vector<double> probs() && { return std::move(probs_); }

 private:
  int d_;
  std::vector<double> probs_;
};

class LambdaVector {
 public:
  LambdaVector(int d, std::vector<Complex> entries);

  int dim() const { return d_; }
  Complex at(int u, int v) const;
  std::span<const Complex> entries() const& { return entries_; }
  std::vector<Complex> entries() && { return std::move(entries_); }

 private:
  int d_;
  std::vector<Complex> entries_;
};

LambdaVector to_lambda(const PauliChannel& ch);

/// Inverse transform. Throws NotAChannel if the result is not a distribution within 1e-10.
PauliChannel from_lambda(const LambdaVector& lv);

/// Channel ch2 after ch1 (the order is immaterial: the group is abelian up to phase).
PauliChannel compose(const PauliChannel& ch1, const PauliChannel& ch2);

/// Convex combination w ch1 + (1 - w) ch2.
PauliChannel mix(const PauliChannel& ch1, const PauliChannel& ch2, double w);

LambdaVector pointwise_product(const LambdaVector& l1, const LambdaVector& l2);

/// max |l1 - l2| over entries.
double max_deviation(const LambdaVector& l1, const LambdaVector& l2);

/// p(a, b) == p(-a, b) within 1e-12.
bool is_x_symmetric(const PauliChannel& ch);

struct SwapOutcome {
  LambdaVector lambda;
  double deviation = 0.0;     // distance from the pointwise product
  bool multiplicative = true; // deviation <= 1e-10
  std::string warning;        // set when the result is not the pointwise product
};

/// Explicit density-matrix entanglement swap of two noisy maximally entangled
/// pairs: ch1 on A of AB, ch2 on D of CD, Bell measurement on BC, Pauli
/// correction on D, mixture over all outcomes. The result is the pointwise
/// product when both channels are X-symmetric. Throws ResourceLimit for d > 5.
SwapOutcome swap_oracle(const PauliChannel& ch1, const PauliChannel& ch2);

/// Whether applying ch to either half of the maximally entangled state gives
/// the same state (trace distance below 1e-10). Throws ResourceLimit for d > 5.
bool transpose_side_check(const PauliChannel& ch);

/// Qubit lambda-vector in the conventional order (lambda_1..lambda_4) =
/// (lambda(0,0), lambda(0,1), lambda(1,1), lambda(1,0)); lambda_1 = 1.
std::array<Complex, 4> qubit_lambda_order(const LambdaVector& lv);

}  // namespace repchain
