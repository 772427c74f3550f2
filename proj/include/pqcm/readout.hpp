#pragma once

// Carbon-channel spectral readout model and the estimators built on it:
// four logical-state-resolved peak integrals in two groups (probe |0> =
// success, probe |1> = failure), cloning efficiency, Bloch-vector
// reconstruction, fidelity, and single-qubit tomography.

#include "pqcm/spin.hpp"

#include <array>
#include <optional>
#include <string>

namespace pqcm {

enum class Acquisition { xy, z };

struct PeakSet {
  Acquisition acquisition = Acquisition::xy;
  // Complex integrals and frequency offsets (Hz), indexed by the spectator
  // logical state (h << 1) | f, h = probe, f = the other clone.
  std::array<Complex, 4> integrals{};
  std::array<double, 4> offsets_hz{};

  Complex at(int h, int f) const { return integrals[(h << 1) | f]; }
};

/// Spectator states in ascending peak-offset order; entry k-1 gives (h, f) of
/// peak k. Offsets are ((-1)^h J_ab + (-1)^f J_bc)/2 for the carbon readout
/// spin; the default couplings order the peaks |10>, |00>, |11>, |01>.
std::array<std::pair<int, int>, 4> peak_order(const SpinSystem& sys);

/// Peak integrals of the observed clone (qubit 1 or 2; the probe is only a
/// group label and is rejected). The observed qubit is brought to the readout
/// channel by an exact logical swap; xy acquisition records
/// Tr[rho' (|h><h| (sx + i sy) |f><f|)], z acquisition first applies the pi/2
/// readout pulse that maps <sz> onto +<sx>. All integrals are divided by
/// `reference` (the |00> z-peak of the initial pseudo-pure state).
PeakSet peak_integrals(const DensityMatrix& rho, int observed, Acquisition acq,
                       const SpinSystem& sys, double reference = 1.0);

/// Same, in (epsilon, pure part) form; the identity component contributes
/// exactly zero to every peak, so results carry no polarization dependence.
PeakSet peak_integrals(const PseudoPureState& pps, int observed, Acquisition acq,
                       const SpinSystem& sys, double reference = 1.0);

/// The normalization reference: the |00> peak of the initial pseudo-pure
/// state under z acquisition (equals the polarization).
double normalization_reference(const PseudoPureState& pps, const SpinSystem& sys);

struct GroupedSignals {
  // p(k-1, c): component c (0 = x, 1 = y, 2 = z) of peak k, peaks numbered in
  // ascending-offset order.
  Eigen::Matrix<double, 4, 3> p = Eigen::Matrix<double, 4, 3>::Zero();
  std::array<std::pair<int, int>, 4> order{};  // k-1 -> (h, f)
};

GroupedSignals group_signals(const PeakSet& xy, const PeakSet& z, const SpinSystem& sys);

/// Cloning efficiency from the success group (probe |0>; peaks 2 and 4 under
/// the default couplings): P_i = |P_2i| + |P_4i|, gamma = ||(Px, Py, Pz)||.
double efficiency_from_signals(const GroupedSignals& sig);

enum class PeakGroup { success, failure };

/// Signed peak sums per component divided by gamma (no absolute values here).
/// Returns nothing when gamma is below tolerance.
std::optional<BlochVector> bloch_from_signals(const GroupedSignals& sig, double gamma,
                                              PeakGroup group = PeakGroup::success);

/// F = (1 + sin(+-theta) rx + cos(theta) rz) / 2.
double fidelity_from_bloch(const BlochVector& r, double theta, Sign sign);

struct Tomography {
  DensityMatrix rho;                 // (I + r.sigma)/2 after projection
  double projection_distance = 0.0;  // how far r was pulled onto the unit ball
};

Tomography tomography_single_qubit(const BlochVector& r);

struct ExperimentRecord {
  double theta = 0.0;
  Sign sign = Sign::plus;
  double gamma_theory = 0.0;
  double gamma_est = 0.0;
  BlochVector bloch_b = BlochVector::Zero();
  BlochVector bloch_c = BlochVector::Zero();
  double f_b = 0.0;
  double f_c = 0.0;
  DensityMatrix rho_b;
  DensityMatrix rho_c;
};

/// Full estimator pipeline on a post-cloning state: peaks for both clones,
/// efficiency from the primary (carbon) readout, Bloch vectors, fidelities,
/// reconstructed density matrices.
ExperimentRecord analyze_state(const PseudoPureState& evolved, double theta, Sign sign,
                               const SpinSystem& sys, double reference);

std::string record_csv_header();
std::string record_csv_row(const ExperimentRecord& r);

}  // namespace pqcm
