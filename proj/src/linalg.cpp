#include "pqcm/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace pqcm {

namespace {

const Complex kI{0.0, 1.0};

int bit_of(int index, int qubit, int n_qubits) {
  return (index >> (n_qubits - 1 - qubit)) & 1;
}

}  // namespace

int qubit_count(Eigen::Index dim) {
  if (dim < 2 || (dim & (dim - 1)) != 0)
    throw std::invalid_argument("dimension is not a power of two");
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  return n;
}

const Eigen::Matrix2cd& pauli_x() {
  static const Eigen::Matrix2cd m = (Eigen::Matrix2cd() << 0, 1, 1, 0).finished();
  return m;
}

const Eigen::Matrix2cd& pauli_y() {
  static const Eigen::Matrix2cd m = (Eigen::Matrix2cd() << 0, -kI, kI, 0).finished();
  return m;
}

const Eigen::Matrix2cd& pauli_z() {
  static const Eigen::Matrix2cd m = (Eigen::Matrix2cd() << 1, 0, 0, -1).finished();
  return m;
}

Eigen::Matrix2cd ry(double angle) {
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  return (Eigen::Matrix2cd() << c, -s, s, c).finished();
}

Eigen::Matrix2cd hadamard() {
  const double r = 1.0 / std::sqrt(2.0);
  return (Eigen::Matrix2cd() << r, r, r, -r).finished();
}

Eigen::Matrix4cd cnot() {
  Eigen::Matrix4cd g = Eigen::Matrix4cd::Identity();
  g(2, 2) = g(3, 3) = 0;
  g(2, 3) = g(3, 2) = 1;
  return g;
}

Eigen::Matrix4cd controlled_ry(double angle) {
  Eigen::Matrix4cd g = Eigen::Matrix4cd::Identity();
  g.topLeftCorner<2, 2>() = ry(angle);
  return g;
}

StateVector basis_state(int n_qubits, int index) {
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  if (index < 0 || index >= dim) throw std::out_of_range("basis index out of range");
  StateVector psi = StateVector::Zero(dim);
  psi(index) = 1.0;
  return psi;
}

DensityMatrix pure_density(const StateVector& psi) { return psi * psi.adjoint(); }

bool is_normalized(const StateVector& psi, double tol) {
  return std::abs(psi.squaredNorm() - 1.0) <= tol;
}

bool is_hermitian(const Eigen::Ref<const Eigen::MatrixXcd>& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_unitary(const Eigen::Ref<const Unitary>& u, double tol) {
  if (u.rows() != u.cols()) return false;
  const Eigen::MatrixXcd res =
      u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols());
  return res.cwiseAbs().maxCoeff() <= tol;
}

bool is_density_matrix(const DensityMatrix& rho, double tol) {
  if (!is_hermitian(rho, tol)) return false;
  if (std::abs(rho.trace().real() - 1.0) > tol || std::abs(rho.trace().imag()) > tol)
    return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -10 * tol;
}

static void check_targets(int n_qubits, Eigen::Index gate_dim,
                          const std::vector<int>& targets) {
  if (gate_dim != (Eigen::Index{1} << targets.size()))
    throw std::invalid_argument("gate dimension does not match target count");
  for (size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 || targets[i] >= n_qubits)
      throw std::out_of_range("target qubit index out of range");
    for (size_t j = i + 1; j < targets.size(); ++j)
      if (targets[i] == targets[j]) throw std::invalid_argument("repeated target qubit");
  }
}

StateVector apply_gate(const StateVector& state, const Eigen::Ref<const Unitary>& gate,
                       const std::vector<int>& targets) {
  const int n = qubit_count(state.size());
  check_targets(n, gate.rows(), targets);
  const int k = static_cast<int>(targets.size());
  const int sub = 1 << k;

  StateVector out = StateVector::Zero(state.size());
  // Strides of each target bit in the full index.
  std::vector<Eigen::Index> stride(targets.size());
  for (int t = 0; t < k; ++t) stride[t] = Eigen::Index{1} << (n - 1 - targets[t]);

  for (Eigen::Index base = 0; base < state.size(); ++base) {
    bool is_base = true;
    for (int t = 0; t < k && is_base; ++t) is_base = (base & stride[t]) == 0;
    if (!is_base) continue;
    // Gather the 2^k amplitudes living over this assignment of spectator bits.
    Eigen::VectorXcd block(sub);
    for (int li = 0; li < sub; ++li) {
      Eigen::Index idx = base;
      for (int t = 0; t < k; ++t)
        if ((li >> (k - 1 - t)) & 1) idx += stride[t];
      block(li) = state(idx);
    }
    block = gate * block;
    for (int li = 0; li < sub; ++li) {
      Eigen::Index idx = base;
      for (int t = 0; t < k; ++t)
        if ((li >> (k - 1 - t)) & 1) idx += stride[t];
      out(idx) = block(li);
    }
  }
  return out;
}

Unitary embed_gate(int n_qubits, const Eigen::Ref<const Unitary>& gate,
                   const std::vector<int>& targets) {
  check_targets(n_qubits, gate.rows(), targets);
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  Unitary full = Unitary::Zero(dim, dim);
  const int k = static_cast<int>(targets.size());
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      bool spectators_equal = true;
      for (int q = 0; q < n_qubits && spectators_equal; ++q) {
        bool is_target = false;
        for (int t : targets) is_target |= (t == q);
        if (!is_target)
          spectators_equal = bit_of(static_cast<int>(i), q, n_qubits) ==
                             bit_of(static_cast<int>(j), q, n_qubits);
      }
      if (!spectators_equal) continue;
      int li = 0, lj = 0;
      for (int t = 0; t < k; ++t) {
        li = (li << 1) | bit_of(static_cast<int>(i), targets[t], n_qubits);
        lj = (lj << 1) | bit_of(static_cast<int>(j), targets[t], n_qubits);
      }
      full(i, j) = gate(li, lj);
    }
  }
  return full;
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
  const int n = qubit_count(rho.rows());
  if (keep.empty()) throw std::invalid_argument("empty keep set in partial trace");
  std::vector<int> kept = keep;
  std::sort(kept.begin(), kept.end());
  for (size_t i = 0; i < kept.size(); ++i) {
    if (kept[i] < 0 || kept[i] >= n) throw std::out_of_range("keep index out of range");
    if (i > 0 && kept[i] == kept[i - 1])
      throw std::invalid_argument("repeated keep index");
  }
  std::vector<int> traced;
  for (int q = 0; q < n; ++q)
    if (std::find(kept.begin(), kept.end(), q) == kept.end()) traced.push_back(q);

  const int nk = static_cast<int>(kept.size());
  const int nt = static_cast<int>(traced.size());
  const Eigen::Index dk = Eigen::Index{1} << nk;
  DensityMatrix out = DensityMatrix::Zero(dk, dk);

  auto full_index = [&](int kept_bits, int traced_bits) {
    int idx = 0;
    for (int i = 0; i < nk; ++i)
      idx |= ((kept_bits >> (nk - 1 - i)) & 1) << (n - 1 - kept[i]);
    for (int i = 0; i < nt; ++i)
      idx |= ((traced_bits >> (nt - 1 - i)) & 1) << (n - 1 - traced[i]);
    return idx;
  };

  for (int i = 0; i < dk; ++i)
    for (int j = 0; j < dk; ++j)
      for (int t = 0; t < (1 << nt); ++t)
        out(i, j) += rho(full_index(i, t), full_index(j, t));
  return out;
}

PostSelection post_select(const StateVector& state, int qubit, int outcome) {
  const int n = qubit_count(state.size());
  if (qubit < 0 || qubit >= n) throw std::out_of_range("qubit index out of range");
  if (outcome != 0 && outcome != 1) throw std::invalid_argument("outcome must be 0 or 1");

  const Eigen::Index stride = Eigen::Index{1} << (n - 1 - qubit);
  const Eigen::Index half = state.size() / 2;
  StateVector branch(half);
  Eigen::Index w = 0;
  double prob = 0.0;
  for (Eigen::Index i = 0; i < state.size(); ++i) {
    if ((((i & stride) != 0) ? 1 : 0) != outcome) continue;
    branch(w++) = state(i);
    prob += std::norm(state(i));
  }

  PostSelection result;
  result.probability = prob;
  if (prob >= kBranchTol) result.state = branch / std::sqrt(prob);
  return result;
}

double fidelity_pure(const DensityMatrix& rho0, const DensityMatrix& rho) {
  if (rho0.rows() != rho.rows() || rho0.cols() != rho.cols())
    throw std::invalid_argument("fidelity_pure: dimension mismatch");
  const double purity = (rho0 * rho0).trace().real();
  if (std::abs(purity - 1.0) > kMatrixTol)
    throw std::invalid_argument("fidelity_pure: rho0 is not pure");
  return (rho0 * rho).trace().real();
}

BlochVector bloch_vector(const DensityMatrix& rho) {
  if (rho.rows() != 2 || rho.cols() != 2)
    throw std::invalid_argument("bloch_vector expects a single-qubit density matrix");
  return {(rho * pauli_x()).trace().real(), (rho * pauli_y()).trace().real(),
          (rho * pauli_z()).trace().real()};
}

double ray_distance(const StateVector& a, const StateVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("ray_distance: size mismatch");
  // Computed as an explicit difference: sqrt(2 - 2|<b|a>|) loses half the
  // significant digits near zero, which matters at 1e-8 tolerances.
  Complex ov = b.dot(a);
  const Complex phase = (std::abs(ov) > 1e-15) ? ov / std::abs(ov) : Complex{1.0, 0.0};
  return (a - phase * b).norm();
}

}  // namespace pqcm
