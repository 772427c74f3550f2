#include "pqcm/readout.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace pqcm {

namespace {

// sx + i sy = 2|0><1| on the readout spin.
const Eigen::Matrix2cd& lowering_observable() {
  static const Eigen::Matrix2cd m =
      (Eigen::Matrix2cd() << 0, 2, 0, 0).finished();
  return m;
}

Unitary swap_bc() {
  Eigen::Matrix4cd s = Eigen::Matrix4cd::Identity();
  s(1, 1) = s(2, 2) = 0;
  s(1, 2) = s(2, 1) = 1;
  return embed_gate(3, s, {1, 2});
}

// Readout pulse for the z component. The contract is Heisenberg-side:
// conjugation must carry sx back to +sz, so that the x channel of the pulsed
// state reads the z component of the unpulsed one; ry(+pi/2) does exactly
// that (|0> goes to the +x eigenstate, pinned by the reference unit test).
Unitary z_readout_pulse() { return embed_gate(3, ry(std::numbers::pi / 2), {1}); }

PeakSet raw_peak_integrals(const DensityMatrix& rho, int observed, Acquisition acq,
                           const SpinSystem& sys) {
  if (observed != 1 && observed != 2)
    throw std::invalid_argument("observed qubit must be a clone (1 or 2), not the probe");
  if (rho.rows() != 8 || rho.cols() != 8)
    throw std::invalid_argument("peak_integrals expects a three-qubit state");

  DensityMatrix work = rho;
  if (observed == 2) {
    const Unitary s = swap_bc();
    work = s * work * s.adjoint();
  }
  if (acq == Acquisition::z) {
    const Unitary r = z_readout_pulse();
    work = r * work * r.adjoint();
  }

  PeakSet peaks;
  peaks.acquisition = acq;
  for (int h = 0; h < 2; ++h) {
    for (int f = 0; f < 2; ++f) {
      Eigen::Matrix2cd ph = Eigen::Matrix2cd::Zero();
      ph(h, h) = 1;
      Eigen::Matrix2cd pf = Eigen::Matrix2cd::Zero();
      pf(f, f) = 1;
      const Unitary m = kron(kron(ph, lowering_observable()), pf);
      peaks.integrals[(h << 1) | f] = (work * m).trace();
      peaks.offsets_hz[(h << 1) | f] =
          ((h == 0 ? 1.0 : -1.0) * sys.j_ab + (f == 0 ? 1.0 : -1.0) * sys.j_bc) / 2;
    }
  }
  return peaks;
}

}  // namespace

std::array<std::pair<int, int>, 4> peak_order(const SpinSystem& sys) {
  std::array<std::pair<int, int>, 4> order = {{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};
  auto offset = [&](const std::pair<int, int>& hf) {
    return ((hf.first == 0 ? 1.0 : -1.0) * sys.j_ab +
            (hf.second == 0 ? 1.0 : -1.0) * sys.j_bc) / 2;
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](const auto& a, const auto& b) { return offset(a) < offset(b); });
  return order;
}

PeakSet peak_integrals(const DensityMatrix& rho, int observed, Acquisition acq,
                       const SpinSystem& sys, double reference) {
  PeakSet peaks = raw_peak_integrals(rho, observed, acq, sys);
  for (Complex& v : peaks.integrals) v /= reference;
  return peaks;
}

PeakSet peak_integrals(const PseudoPureState& pps, int observed, Acquisition acq,
                       const SpinSystem& sys, double reference) {
  // Tr[(eps rho + (1-eps)/8 I) M] = eps Tr[rho M]: the peak observables are
  // traceless and the identity part survives swap/readout conjugation intact.
  PeakSet peaks = raw_peak_integrals(pps.pure_part, observed, acq, sys);
  for (Complex& v : peaks.integrals) v *= pps.epsilon / reference;
  return peaks;
}

double normalization_reference(const PseudoPureState& pps, const SpinSystem& sys) {
  return peak_integrals(pps, 1, Acquisition::z, sys).at(0, 0).real();
}

GroupedSignals group_signals(const PeakSet& xy, const PeakSet& z, const SpinSystem& sys) {
  if (xy.acquisition != Acquisition::xy || z.acquisition != Acquisition::z)
    throw std::invalid_argument("group_signals expects one xy and one z peak set");
  GroupedSignals sig;
  sig.order = peak_order(sys);
  for (int k = 0; k < 4; ++k) {
    const auto [h, f] = sig.order[k];
    sig.p(k, 0) = xy.at(h, f).real();
    sig.p(k, 1) = xy.at(h, f).imag();
    sig.p(k, 2) = z.at(h, f).real();
  }
  return sig;
}

namespace {

// Peak numbers (0-based) belonging to a probe group: success = probe |0>.
std::array<int, 2> group_members(const GroupedSignals& sig, PeakGroup group) {
  std::array<int, 2> members{};
  int w = 0;
  for (int k = 0; k < 4; ++k)
    if (sig.order[k].first == (group == PeakGroup::success ? 0 : 1)) members[w++] = k;
  return members;
}

}  // namespace

double efficiency_from_signals(const GroupedSignals& sig) {
  const auto members = group_members(sig, PeakGroup::success);
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    const double p = std::abs(sig.p(members[0], c)) + std::abs(sig.p(members[1], c));
    sum += p * p;
  }
  return std::sqrt(sum);
}

std::optional<BlochVector> bloch_from_signals(const GroupedSignals& sig, double gamma,
                                              PeakGroup group) {
  if (gamma <= 1e-12) return std::nullopt;
  const auto members = group_members(sig, group);
  BlochVector r;
  for (int c = 0; c < 3; ++c)
    r(c) = (sig.p(members[0], c) + sig.p(members[1], c)) / gamma;
  return r;
}

double fidelity_from_bloch(const BlochVector& r, double theta, Sign sign) {
  return 0.5 * (1.0 + std::sin(sign_value(sign) * theta) * r(0) +
                std::cos(theta) * r(2));
}

Tomography tomography_single_qubit(const BlochVector& r) {
  Tomography t;
  BlochVector v = r;
  const double len = v.norm();
  if (len > 1.0) {
    v /= len;
    t.projection_distance = len - 1.0;
  }
  t.rho = 0.5 * (Eigen::Matrix2cd::Identity() + v(0) * pauli_x() + v(1) * pauli_y() +
                 v(2) * pauli_z());
  return t;
}

ExperimentRecord analyze_state(const PseudoPureState& evolved, double theta, Sign sign,
                               const SpinSystem& sys, double reference) {
  ExperimentRecord rec;
  rec.theta = theta;
  rec.sign = sign;
  rec.gamma_theory = 1.0 / (1.0 + std::cos(theta));

  const GroupedSignals sig_b =
      group_signals(peak_integrals(evolved, 1, Acquisition::xy, sys, reference),
                    peak_integrals(evolved, 1, Acquisition::z, sys, reference), sys);
  const GroupedSignals sig_c =
      group_signals(peak_integrals(evolved, 2, Acquisition::xy, sys, reference),
                    peak_integrals(evolved, 2, Acquisition::z, sys, reference), sys);

  // One efficiency per run, taken from the carbon readout of the first clone;
  // both Bloch reconstructions compensate their signal loss with it.
  rec.gamma_est = efficiency_from_signals(sig_b);
  const auto r_b = bloch_from_signals(sig_b, rec.gamma_est);
  const auto r_c = bloch_from_signals(sig_c, rec.gamma_est);
  if (!r_b || !r_c) throw std::runtime_error("vanishing efficiency estimate");
  rec.bloch_b = *r_b;
  rec.bloch_c = *r_c;
  rec.f_b = fidelity_from_bloch(rec.bloch_b, theta, sign);
  rec.f_c = fidelity_from_bloch(rec.bloch_c, theta, sign);
  rec.rho_b = tomography_single_qubit(rec.bloch_b).rho;
  rec.rho_c = tomography_single_qubit(rec.bloch_c).rho;
  return rec;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

std::string record_csv_header() {
  return "theta,sign,gamma_theory,gamma_est,Fb,Fc,rx_b,ry_b,rz_b,rx_c,ry_c,rz_c";
}

std::string record_csv_row(const ExperimentRecord& r) {
  std::string row = fmt(r.theta);
  row += r.sign == Sign::plus ? ",+" : ",-";
  for (double v : {r.gamma_theory, r.gamma_est, r.f_b, r.f_c, r.bloch_b(0), r.bloch_b(1),
                   r.bloch_b(2), r.bloch_c(0), r.bloch_c(1), r.bloch_c(2)})
    row += "," + fmt(v);
  return row;
}

}  // namespace pqcm
