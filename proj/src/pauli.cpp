#include "repchain/pauli.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <sstream>

#include "repchain/errors.hpp"

namespace repchain {

namespace {

constexpr double kProbTol = 1e-12;
constexpr double kInverseTol = 1e-10;
constexpr double kStateTol = 1e-10;

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

void check_dim(int d) {
  if (d < 2) throw ParameterError("qudit dimension must be >= 2");
}

void check_oracle_dim(int d) {
  if (d > kMaxOracleDim) {
    std::ostringstream os;
    os << "density-matrix check limited to d <= " << kMaxOracleDim << ", got " << d;
    throw ResourceLimit(os.str());
  }
}

Complex root_of_unity(int d, long k) {
  const long r = ((k % d) + d) % d;
  // quarter turns are exact, so real channels give real qubit lambda-vectors
  if ((4 * r) % d == 0) {
    static constexpr std::array<Complex, 4> quarter{Complex(1, 0), Complex(0, 1), Complex(-1, 0), Complex(0, -1)};
    return quarter[static_cast<std::size_t>(4 * r / d)];
  }
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(r) / d;
  return {std::cos(angle), std::sin(angle)};
}

int mod(int x, int d) { return ((x % d) + d) % d; }

// X^a Z^b as a d x d matrix: |j> -> w^{b j} |j + a>.
Matrix weyl(int d, int a, int b) {
  Matrix u = Matrix::Zero(d, d);
  for (int j = 0; j < d; ++j) u(mod(j + a, d), j) = root_of_unity(d, static_cast<long>(b) * j);
  return u;
}

// (1/sqrt d) sum_j |j j>
Vector max_entangled(int d) {
  Vector v = Vector::Zero(d * d);
  for (int j = 0; j < d; ++j) v(j * d + j) = 1.0 / std::sqrt(static_cast<double>(d));
  return v;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// ch applied to the second (or first) half of the maximally entangled state
Matrix noisy_pair(const PauliChannel& ch, bool on_second) {
  const int d = ch.dim();
  const Matrix id = Matrix::Identity(d, d);
  const Vector psi = max_entangled(d);
  Matrix rho = Matrix::Zero(d * d, d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      const double p = ch.prob(a, b);
      if (p == 0.0) continue;
      const Matrix u = weyl(d, a, b);
      const Vector v = on_second ? Vector(kron(id, u) * psi) : Vector(kron(u, id) * psi);
      rho += p * v * v.adjoint();
    }
  return rho;
}

}  // namespace

PauliChannel::PauliChannel(int d, std::vector<double> probs) : d_(d), probs_(std::move(probs)) {
  check_dim(d);
  if (probs_.size() != static_cast<std::size_t>(d) * d) throw ParameterError("Pauli channel needs d^2 probabilities");
  double sum = 0.0;
  for (double& p : probs_) {
    if (!(p >= -kProbTol)) throw ParameterError("Pauli channel probabilities must be nonnegative");
    if (p < 0.0) p = 0.0;
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbTol) {
    std::ostringstream os;
    os << "Pauli channel probabilities sum to " << sum << ", not 1";
    throw ParameterError(os.str());
  }
}

PauliChannel PauliChannel::identity(int d) {
  check_dim(d);
  std::vector<double> p(static_cast<std::size_t>(d) * d, 0.0);
  p[0] = 1.0;
  return {d, std::move(p)};
}

PauliChannel PauliChannel::depolarizing(int d, double p_identity) {
  check_dim(d);
  if (!(p_identity >= 0.0 && p_identity <= 1.0)) throw ParameterError("identity probability must lie in [0, 1]");
  const std::size_t n = static_cast<std::size_t>(d) * d;
  std::vector<double> p(n, (1.0 - p_identity) / static_cast<double>(n - 1));
  p[0] = p_identity;
  return {d, std::move(p)};
}

PauliChannel PauliChannel::dephasing(int d, double p) {
  check_dim(d);
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("dephasing probability must lie in [0, 1]");
  std::vector<double> probs(static_cast<std::size_t>(d) * d, 0.0);
  probs[0] = 1.0 - p;
  for (int b = 1; b < d; ++b) probs[static_cast<std::size_t>(b)] = p / (d - 1);
  return {d, std::move(probs)};
}

PauliChannel PauliChannel::qubit(double p_i, double p_x, double p_y, double p_z) {
  // (a, b): I = (0,0), Z = (0,1), X = (1,0), Y ~ XZ = (1,1)
  return {2, {p_i, p_z, p_x, p_y}};
}

double PauliChannel::prob(int a, int b) const {
  return probs_[static_cast<std::size_t>(mod(a, d_) * d_ + mod(b, d_))];
}

LambdaVector::LambdaVector(int d, std::vector<Complex> entries) : d_(d), entries_(std::move(entries)) {
  check_dim(d);
  if (entries_.size() != static_cast<std::size_t>(d) * d) throw ParameterError("lambda-vector needs d^2 entries");
}

Complex LambdaVector::at(int u, int v) const {
  return entries_[static_cast<std::size_t>(mod(u, d_) * d_ + mod(v, d_))];
}

LambdaVector to_lambda(const PauliChannel& ch) {
  const int d = ch.dim();
  std::vector<Complex> out(static_cast<std::size_t>(d) * d);
  for (int u = 0; u < d; ++u)
    for (int v = 0; v < d; ++v) {
      Complex s = 0.0;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) s += ch.prob(a, b) * root_of_unity(d, -(static_cast<long>(u) * a + v * b));
      out[static_cast<std::size_t>(u * d + v)] = s;
    }
  return {d, std::move(out)};
}

PauliChannel from_lambda(const LambdaVector& lv) {
  const int d = lv.dim();
  if (std::abs(lv.at(0, 0) - 1.0) > kInverseTol) throw NotAChannel("lambda(0,0) must equal 1");
  std::vector<double> probs(static_cast<std::size_t>(d) * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      Complex s = 0.0;
      for (int u = 0; u < d; ++u)
        for (int v = 0; v < d; ++v) s += lv.at(u, v) * root_of_unity(d, static_cast<long>(u) * a + v * b);
      s /= static_cast<double>(d * d);
      if (std::abs(s.imag()) > kInverseTol || s.real() < -kInverseTol) {
        std::ostringstream os;
        os << "inverse transform gives p(" << a << "," << b << ") = " << s.real() << (s.imag() < 0 ? "" : "+")
           << s.imag() << "i";
        throw NotAChannel(os.str());
      }
      probs[static_cast<std::size_t>(a * d + b)] = std::max(0.0, s.real());
    }
  // renormalise only the rounding left by clamping
  double sum = 0.0;
  for (double p : probs) sum += p;
  if (std::abs(sum - 1.0) > kInverseTol) throw NotAChannel("inverse transform is not normalised");
  for (double& p : probs) p /= sum;
  return {d, std::move(probs)};
}

PauliChannel compose(const PauliChannel& ch1, const PauliChannel& ch2) {
  const int d = ch1.dim();
  if (ch2.dim() != d) throw ParameterError("channels must act on the same dimension");
  std::vector<double> out(static_cast<std::size_t>(d) * d, 0.0);
  for (int a1 = 0; a1 < d; ++a1)
    for (int b1 = 0; b1 < d; ++b1)
      for (int a2 = 0; a2 < d; ++a2)
        for (int b2 = 0; b2 < d; ++b2)
          out[static_cast<std::size_t>(mod(a1 + a2, d) * d + mod(b1 + b2, d))] += ch1.prob(a1, b1) * ch2.prob(a2, b2);
  return {d, std::move(out)};
}

PauliChannel mix(const PauliChannel& ch1, const PauliChannel& ch2, double w) {
  if (ch1.dim() != ch2.dim()) throw ParameterError("channels must act on the same dimension");
  if (!(w >= 0.0 && w <= 1.0)) throw ParameterError("mixing weight must lie in [0, 1]");
  std::vector<double> out(ch1.probs().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w * ch1.probs()[i] + (1.0 - w) * ch2.probs()[i];
  return {ch1.dim(), std::move(out)};
}

LambdaVector pointwise_product(const LambdaVector& l1, const LambdaVector& l2) {
  if (l1.dim() != l2.dim()) throw ParameterError("lambda-vectors must have the same dimension");
  std::vector<Complex> out(l1.entries().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = l1.entries()[i] * l2.entries()[i];
  return {l1.dim(), std::move(out)};
}

double max_deviation(const LambdaVector& l1, const LambdaVector& l2) {
  if (l1.dim() != l2.dim()) throw ParameterError("lambda-vectors must have the same dimension");
  double m = 0.0;
  for (std::size_t i = 0; i < l1.entries().size(); ++i) m = std::max(m, std::abs(l1.entries()[i] - l2.entries()[i]));
  return m;
}

bool is_x_symmetric(const PauliChannel& ch) {
  const int d = ch.dim();
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      if (std::abs(ch.prob(a, b) - ch.prob(-a, b)) > kProbTol) return false;
  return true;
}

SwapOutcome swap_oracle(const PauliChannel& ch1, const PauliChannel& ch2) {
  const int d = ch1.dim();
  if (ch2.dim() != d) throw ParameterError("channels must act on the same dimension");
  check_oracle_dim(d);
  const int d2 = d * d;
  const Vector psi = max_entangled(d);

  // Qudits ordered A B C D; index ((i_A d + i_B) d + i_C) d + i_D. The noise
  // sits on the outer qudits A and D. Noise on B would be teleported onto D
  // unchanged, so only this layout is sensitive to X-symmetry.
  const Matrix rho = kron(noisy_pair(ch1, false), noisy_pair(ch2, true));
  const Vector ideal = kron(psi, psi);

  Matrix rho_ad = Matrix::Zero(d2, d2);
  for (int ka = 0; ka < d; ++ka)
    for (int kb = 0; kb < d; ++kb) {
      // project B C onto (I x X^ka Z^kb)|psi>, leaving A D
      const Vector bell = kron(Matrix::Identity(d, d), weyl(d, ka, kb)) * psi;
      Matrix project = Matrix::Zero(d2, d2 * d2);
      for (int i = 0; i < d; ++i)
        for (int l = 0; l < d; ++l)
          for (int j = 0; j < d; ++j)
            for (int m = 0; m < d; ++m)
              project(i * d + l, ((i * d + j) * d + m) * d + l) = std::conj(bell(j * d + m));

      // Outcome-dependent correction on D: the unitary V with (I x V)|psi> equal
      // to the noiseless post-measurement state; undoing it restores |psi>.
      const Vector target = project * ideal;
      Matrix v(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) v(i, j) = target(j * d + i);
      v /= std::sqrt((v.adjoint() * v)(0, 0).real());
      const Matrix fix = kron(Matrix::Identity(d, d), v.adjoint());

      const Matrix post = project * rho * project.adjoint();
      rho_ad += fix * post * fix.adjoint();
    }

  // Pauli-diagonal weights of the output state
  std::vector<double> probs(static_cast<std::size_t>(d2));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      const Vector basis = kron(Matrix::Identity(d, d), weyl(d, a, b)) * psi;
      probs[static_cast<std::size_t>(a * d + b)] = (basis.adjoint() * rho_ad * basis)(0, 0).real();
    }

  SwapOutcome out{to_lambda(PauliChannel(d, std::move(probs))), 0.0, true, {}};
  out.deviation = max_deviation(out.lambda, pointwise_product(to_lambda(ch1), to_lambda(ch2)));
  out.multiplicative = out.deviation <= kStateTol;
  if (!out.multiplicative) {
    std::ostringstream os;
    os << "NonMultiplicative: swapped lambda-vector deviates from the pointwise product by " << out.deviation;
    if (!is_x_symmetric(ch1) || !is_x_symmetric(ch2)) os << " (inputs are not X-symmetric)";
    out.warning = os.str();
  }
  return out;
}

bool transpose_side_check(const PauliChannel& ch) {
  check_oracle_dim(ch.dim());
  const Matrix diff = noisy_pair(ch, true) - noisy_pair(ch, false);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(diff, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().sum() < kStateTol;
}

std::array<Complex, 4> qubit_lambda_order(const LambdaVector& lv) {
  if (lv.dim() != 2) throw ParameterError("qubit ordering needs d = 2");
  return {lv.at(0, 0), lv.at(0, 1), lv.at(1, 1), lv.at(1, 0)};
}

}  // namespace repchain
