#pragma once

// Dense complex linear algebra for small multi-qubit registers (n <= ~10,
// n = 3 in practice): states, gates, partial trace, post-selection, fidelity.
//
// Basis convention: qubit 0 is the most significant bit of the basis index,
// so for three qubits the ket |abc> has index a*4 + b*2 + c.

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <vector>

namespace pqcm {

using Complex = std::complex<double>;
using StateVector = Eigen::VectorXcd;
using DensityMatrix = Eigen::MatrixXcd;
using Unitary = Eigen::MatrixXcd;
using BlochVector = Eigen::Vector3d;  // components (rx, ry, rz)

// Tolerances: arithmetic identities vs accumulated matrix-level checks.
inline constexpr double kStateTol = 1e-12;
inline constexpr double kMatrixTol = 1e-10;
// Below this probability a post-selected branch is reported as empty.
inline constexpr double kBranchTol = 1e-14;

/// Number of qubits for a dimension; throws unless dim is a power of two.
int qubit_count(Eigen::Index dim);

const Eigen::Matrix2cd& pauli_x();
const Eigen::Matrix2cd& pauli_y();
const Eigen::Matrix2cd& pauli_z();

/// y-rotation, fixed so that ry(t)|0> = cos(t/2)|0> + sin(t/2)|1>.
Eigen::Matrix2cd ry(double angle);

Eigen::Matrix2cd hadamard();

/// CNOT in |control,target> order: flips the target when the control is |1>.
Eigen::Matrix4cd cnot();

/// Controlled y-rotation in |control,target> order. The rotation fires when
/// the control is |0>: this is the polarity of the cloning network, whose
/// probe flags success with |0>.
Eigen::Matrix4cd controlled_ry(double angle);

/// Kronecker product; dimensions multiply, row-major block layout.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(
      a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b.derived();
  return out;
}

/// |index> in an n-qubit register.
StateVector basis_state(int n_qubits, int index);

/// |psi><psi|
DensityMatrix pure_density(const StateVector& psi);

bool is_normalized(const StateVector& psi, double tol = kStateTol);
bool is_hermitian(const Eigen::Ref<const Eigen::MatrixXcd>& m, double tol = kStateTol);
bool is_unitary(const Eigen::Ref<const Unitary>& u, double tol = kMatrixTol);
/// Hermitian within tol, unit trace within tol, eigenvalues >= -10*tol.
bool is_density_matrix(const DensityMatrix& rho, double tol = kMatrixTol);

/// Embeds `gate` on the ordered target qubits (identity elsewhere) and applies
/// it. The first target is the most significant bit of the gate's own basis.
/// Throws on dimension mismatch or repeated/out-of-range targets.
StateVector apply_gate(const StateVector& state, const Eigen::Ref<const Unitary>& gate,
                       const std::vector<int>& targets);

/// Full-register embedding of `gate` on the ordered targets.
Unitary embed_gate(int n_qubits, const Eigen::Ref<const Unitary>& gate,
                   const std::vector<int>& targets);

/// Reduced density matrix over `keep` (ascending order kept); trace preserved.
/// Throws on an empty keep set.
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep);

struct PostSelection {
  double probability = 0.0;
  // Renormalized state of the remaining qubits; disengaged on an empty branch
  // (probability below kBranchTol).
  std::optional<StateVector> state;
};

/// Projects `qubit` onto `outcome` (0 or 1) and renormalizes the rest.
PostSelection post_select(const StateVector& state, int qubit, int outcome);

/// Tr(rho0 * rho) for a pure rho0; throws if rho0 is not rank one.
double fidelity_pure(const DensityMatrix& rho0, const DensityMatrix& rho);

/// (Tr(rho*sx), Tr(rho*sy), Tr(rho*sz)) of a single-qubit density matrix.
BlochVector bloch_vector(const DensityMatrix& rho);

/// min over unit phases of ||a - phase*b||; 0 when the rays coincide.
double ray_distance(const StateVector& a, const StateVector& b);

}  // namespace pqcm
