#pragma once

// The 1->2 probabilistic cloning machine for the two-state set
// { cos(t/2)|0> + sin(t/2)|1>, cos(t/2)|0> - sin(t/2)|1> }, t in [0, pi/2].
// Register order |abc>: a = probe, b = input / first clone, c = second clone.

#include "pqcm/linalg.hpp"

#include <optional>

namespace pqcm {

enum class Sign : int { plus = +1, minus = -1 };

inline double sign_value(Sign s) { return s == Sign::plus ? 1.0 : -1.0; }

/// Machine angles derived from the set angle theta.
///   alpha = 2 acos(sqrt((1 + tan^4(t/2)) / 2))
///   beta  = 2 acos((sqrt(2 / (1 + tan^4(t/2))) + sqrt(2 tan^4(t/2) / (1 + tan^4(t/2)))) / 2)
///   gamma = 1 / (1 + cos t), the optimal success probability.
struct CloneParameters {
  double theta = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

/// Throws outside [0, pi/2]. arccos arguments are clamped to [-1, 1]; near
/// theta = pi/2 alpha has a square-root cusp, so alpha(fl(pi/2)) ~ 2e-8
/// rather than exactly 0.
CloneParameters clone_angles(double theta);

struct CloneSet {
  double theta = 0.0;
  Sign sign = Sign::plus;
};

/// |0>_a (cos(t/2)|0> +- sin(t/2)|1>)_b |0>_c
StateVector input_state(const CloneSet& set);

/// sqrt(gamma)|0>|psi|psi> + sqrt(1-gamma)|1>|Phi>_bc with the failure state
/// |Phi>_bc = -sqrt(1/(1+tan^4(t/2)))|00> - sqrt(tan^4(t/2)/(1+tan^4(t/2)))|11>,
/// which is the same for both signs.
StateVector target_output(const CloneSet& set);

/// The failure state |Phi>_bc alone (two qubits).
StateVector failure_state(double theta);

/// Deterministic unitary completion: Gram-Schmidt on {input+, input-} in that
/// order, mapped to the identically-combined orthonormalized outputs, both
/// bases completed over e0..e7 in index order (residuals below 1e-10 dropped).
/// Throws if the input/output Gram matrices disagree beyond 1e-10.
Unitary build_cloning_unitary(double theta);

struct CloneRunResult {
  double success_prob = 0.0;
  DensityMatrix clone_b;
  DensityMatrix clone_c;
  // Probe-|1> branch (two qubits); disengaged when the branch is empty.
  std::optional<StateVector> failure;
};

/// Runs `machine` on input_state(set) and post-selects the probe.
CloneRunResult run_clone(const CloneSet& set, const Eigen::Ref<const Unitary>& machine);

}  // namespace pqcm
