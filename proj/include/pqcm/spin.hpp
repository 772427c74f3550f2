#pragma once

// NMR-level simulation of the three-spin register (a = 1H, b = 13C, c = 19F):
// the rotating-frame Hamiltonian, hard pulses, free-evolution delays,
// refocused gate-to-pulse compilation, and pseudo-pure states.

#include "pqcm/layout.hpp"

#include <string>
#include <variant>
#include <vector>

namespace pqcm {

struct SpinSystem {
  std::array<std::string, 3> labels = {"1H", "13C", "19F"};
  Eigen::Vector3d offsets = Eigen::Vector3d::Zero();  // rad/s, rotating frame
  double j_ab = 161.3;   // Hz
  double j_bc = -192.2;  // Hz
  double j_ac = 47.6;    // Hz

  double coupling(int p, int q) const;
};

/// H = sum_i w_i Iz_i + 2 pi sum_{i<j} J_ij Iz_i Iz_j with Iz = sz/2.
/// Diagonal (all terms commute); units rad/s.
Eigen::MatrixXcd hamiltonian(const SpinSystem& sys);

// An instantaneous rf rotation of the target spins about an axis in the
// xy-plane. `amp_error` scales the flip angle by (1 + amp_error), modelling
// rf amplitude miscalibration.
struct Pulse {
  std::vector<int> targets;
  double phase = 0.0;      // axis angle from x, radians
  double flip = 0.0;       // in (-2 pi, 2 pi]
  double amp_error = 0.0;  // dimensionless
};

struct Delay {
  double duration = 0.0;  // seconds, >= 0
};

using PulseEvent = std::variant<Pulse, Delay>;

struct PulseSequence {
  std::vector<PulseEvent> events;

  double total_duration() const;  // sum of delays; pulses are instantaneous
  void append(const PulseSequence& tail);
};

/// exp(-i H t); exact per-basis-state phases when H is diagonal.
/// Throws on non-Hermitian H or negative t.
StateVector evolve(const StateVector& psi, const Eigen::Ref<const Eigen::MatrixXcd>& h,
                   double t);
DensityMatrix evolve(const DensityMatrix& rho, const Eigen::Ref<const Eigen::MatrixXcd>& h,
                     double t);

/// Simultaneous rotation of the pulse's targets by flip*(1+amp_error) about
/// (cos phase, sin phase, 0), embedded in the three-spin register.
Unitary pulse_unitary(const Pulse& p);

StateVector apply_pulse(const StateVector& psi, const Pulse& p);
DensityMatrix apply_pulse(const DensityMatrix& rho, const Pulse& p);

/// Ordered product of the sequence's event propagators.
Unitary sequence_propagator(const PulseSequence& seq, const SpinSystem& sys);

template <typename State>
std::pair<State, Unitary> simulate_sequence(const PulseSequence& seq,
                                            const SpinSystem& sys, const State& input);

/// Copy of the sequence with every pulse's amp_error set to `delta`
/// (or per spin: a pulse takes the error of its first target).
PulseSequence with_amplitude_error(const PulseSequence& seq, double delta);
PulseSequence with_amplitude_error(const PulseSequence& seq,
                                   const Eigen::Vector3d& delta_per_spin);

// Gate compilation. Every two-qubit gate is realized as local rotations plus
// one zz evolution window of total time 1/(2|J|) (CNOT) or |angle|/(2 pi |J|)
// (CRY), split into four quarters with pi-pulse sandwiches that refocus both
// chemical shifts and spectator couplings. Propagators match the ideal gates
// up to a global phase at working precision. Throws when the gate's spin
// pair has zero coupling.
PulseSequence compile_hadamard(int spin);
PulseSequence compile_cnot(int control, int target, const SpinSystem& sys);
PulseSequence compile_controlled_ry(int control, int target, double angle,
                                    const SpinSystem& sys);
PulseSequence compile_gate(const Gate& gate, const CloneParameters& params,
                           const SpinSystem& sys);

/// Preparation pulse ry(+-theta) on spin b followed by the compiled circuit.
PulseSequence full_experiment_sequence(double theta, Sign sign, const SpinSystem& sys,
                                       const GateCircuit& circuit);

// eps |000><000| + (1-eps)/8 I, kept in (epsilon, pure part) form: the
// identity component is invariant under any unitary, so evolution touches
// only the pure part and trace formulas stay exact for every polarization.
struct PseudoPureState {
  double epsilon = 1.0;
  DensityMatrix pure_part;  // |000><000| evolved

  DensityMatrix matrix() const;
  PseudoPureState evolved(const Eigen::Ref<const Unitary>& u) const;
};

/// Throws unless 0 < epsilon <= 1.
PseudoPureState pseudo_pure(double epsilon);

// Pulse-sequence file: one event per line,
//   PULSE spins=<a|b|c list> phase=<rad> flip=<rad> [derr=<float>]
//   DELAY t=<seconds>
// `#` starts a comment. Values are printed round-trip exact.
std::string pulse_sequence_to_text(const PulseSequence& seq, const std::string& header);
PulseSequence parse_pulse_sequence(const std::string& text);
void save_pulse_sequence(const std::string& path, const PulseSequence& seq,
                         const std::string& header);
PulseSequence load_pulse_sequence(const std::string& path);

/// Recognizes the spin-system config keys J_ab, J_bc, J_ac (Hz) and w_a, w_b,
/// w_c (rad/s); returns false for unknown keys.
bool apply_spin_config(SpinSystem& sys, const std::string& key, double value);

}  // namespace pqcm
