#include "pqcm/spin.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pqcm {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI{0.0, 1.0};

void validate_pulse(const Pulse& p) {
  if (p.targets.empty()) throw std::invalid_argument("pulse has no target spins");
  for (size_t i = 0; i < p.targets.size(); ++i) {
    if (p.targets[i] < 0 || p.targets[i] > 2)
      throw std::out_of_range("pulse target spin out of range");
    for (size_t j = i + 1; j < p.targets.size(); ++j)
      if (p.targets[i] == p.targets[j])
        throw std::invalid_argument("repeated pulse target spin");
  }
  if (!(p.flip > -2 * kPi && p.flip <= 2 * kPi))
    throw std::domain_error("pulse flip angle outside (-2pi, 2pi]");
}

}  // namespace

double SpinSystem::coupling(int p, int q) const {
  if (p > q) std::swap(p, q);
  if (p == 0 && q == 1) return j_ab;
  if (p == 1 && q == 2) return j_bc;
  if (p == 0 && q == 2) return j_ac;
  throw std::out_of_range("bad spin pair");
}

Eigen::MatrixXcd hamiltonian(const SpinSystem& sys) {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(8, 8);
  for (int i = 0; i < 8; ++i) {
    // Iz eigenvalue of spin q in basis state i: +1/2 for |0>, -1/2 for |1>.
    const auto z = [&](int q) { return ((i >> (2 - q)) & 1) ? -0.5 : 0.5; };
    double e = 0.0;
    for (int q = 0; q < 3; ++q) e += sys.offsets(q) * z(q);
    e += 2 * kPi * (sys.j_ab * z(0) * z(1) + sys.j_bc * z(1) * z(2) +
                    sys.j_ac * z(0) * z(2));
    h(i, i) = e;
  }
  return h;
}

double PulseSequence::total_duration() const {
  double t = 0.0;
  for (const PulseEvent& ev : events)
    if (const Delay* d = std::get_if<Delay>(&ev)) t += d->duration;
  return t;
}

void PulseSequence::append(const PulseSequence& tail) {
  events.insert(events.end(), tail.events.begin(), tail.events.end());
}

namespace {

Unitary evolution_unitary(const Eigen::Ref<const Eigen::MatrixXcd>& h, double t) {
  if (!is_hermitian(h, 1e-12)) throw std::invalid_argument("evolve: H is not Hermitian");
  if (t < 0) throw std::domain_error("evolve: negative duration");
  const Eigen::Index dim = h.rows();
  Eigen::MatrixXcd off = h;
  off.diagonal().setZero();
  if (off.cwiseAbs().maxCoeff() == 0.0) {
    Unitary u = Unitary::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      u(i, i) = std::exp(-kI * h(i, i).real() * t);
    return u;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXcd phases =
      (-kI * t * es.eigenvalues().cast<Complex>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

StateVector evolve(const StateVector& psi, const Eigen::Ref<const Eigen::MatrixXcd>& h,
                   double t) {
  return evolution_unitary(h, t) * psi;
}

DensityMatrix evolve(const DensityMatrix& rho, const Eigen::Ref<const Eigen::MatrixXcd>& h,
                     double t) {
  const Unitary u = evolution_unitary(h, t);
  return u * rho * u.adjoint();
}

Unitary pulse_unitary(const Pulse& p) {
  validate_pulse(p);
  const double flip = p.flip * (1.0 + p.amp_error);
  const Eigen::Matrix2cd axis =
      std::cos(p.phase) * pauli_x() + std::sin(p.phase) * pauli_y();
  const Eigen::Matrix2cd r = std::cos(flip / 2) * Eigen::Matrix2cd::Identity() -
                             kI * std::sin(flip / 2) * axis;
  Unitary u = Unitary::Identity(8, 8);
  for (int spin : p.targets) u = embed_gate(3, r, {spin}) * u;
  return u;
}

StateVector apply_pulse(const StateVector& psi, const Pulse& p) {
  return pulse_unitary(p) * psi;
}

DensityMatrix apply_pulse(const DensityMatrix& rho, const Pulse& p) {
  const Unitary u = pulse_unitary(p);
  return u * rho * u.adjoint();
}

Unitary sequence_propagator(const PulseSequence& seq, const SpinSystem& sys) {
  const Eigen::MatrixXcd h = hamiltonian(sys);
  Unitary u = Unitary::Identity(8, 8);
  for (const PulseEvent& ev : seq.events) {
    if (const Pulse* p = std::get_if<Pulse>(&ev))
      u = pulse_unitary(*p) * u;
    else
      u = evolution_unitary(h, std::get<Delay>(ev).duration) * u;
  }
  return u;
}

template <typename State>
std::pair<State, Unitary> simulate_sequence(const PulseSequence& seq,
                                            const SpinSystem& sys, const State& input) {
  const Unitary u = sequence_propagator(seq, sys);
  if constexpr (std::is_same_v<State, StateVector>)
    return {u * input, u};
  else
    return {u * input * u.adjoint(), u};
}

template std::pair<StateVector, Unitary> simulate_sequence<StateVector>(
    const PulseSequence&, const SpinSystem&, const StateVector&);
template std::pair<DensityMatrix, Unitary> simulate_sequence<DensityMatrix>(
    const PulseSequence&, const SpinSystem&, const DensityMatrix&);

PulseSequence with_amplitude_error(const PulseSequence& seq, double delta) {
  return with_amplitude_error(seq, Eigen::Vector3d::Constant(delta));
}

PulseSequence with_amplitude_error(const PulseSequence& seq,
                                   const Eigen::Vector3d& delta_per_spin) {
  PulseSequence out = seq;
  for (PulseEvent& ev : out.events)
    if (Pulse* p = std::get_if<Pulse>(&ev)) p->amp_error = delta_per_spin(p->targets.front());
  return out;
}

// ---------------------------------------------------------------------------
// Gate compilation
// ---------------------------------------------------------------------------

namespace {

constexpr double kPhaseX = 0.0;
constexpr double kPhaseY = kPi / 2;

PulseSequence& push_pulse(PulseSequence& seq, std::vector<int> targets, double phase,
                          double flip) {
  seq.events.push_back(Pulse{std::move(targets), phase, flip, 0.0});
  return seq;
}

PulseSequence& push_delay(PulseSequence& seq, double t) {
  seq.events.push_back(Delay{t});
  return seq;
}

// Composite z rotation from xy pulses: Rz(a) = Rx(pi/2) Ry(a) Rx(-pi/2).
void push_rz(PulseSequence& seq, int spin, double angle) {
  push_pulse(seq, {spin}, kPhaseX, -kPi / 2);
  push_pulse(seq, {spin}, kPhaseY, angle);
  push_pulse(seq, {spin}, kPhaseX, kPi / 2);
}

// exp(-i s_w Z_p Z_q) on the coupled pair (p, q), spectator s refocused.
//
// The window is split into four quarters with pi_x pulses on s at T/4 and
// 3T/4 and on {p, q} at T/2 and T; tracking each spin's +-1 orientation per
// quarter, every chemical shift and every coupling except J_pq averages to
// zero while J_pq survives with full weight. When the surviving sign does
// not match the requested one, the whole window is conjugated by pi_x on p,
// which flips the accumulated zz sign and nothing else.
void push_zz(PulseSequence& seq, int p, int q, double s_w, const SpinSystem& sys) {
  if (s_w == 0.0) return;
  const double j = sys.coupling(p, q);
  if (j == 0.0) throw std::invalid_argument("zero coupling between gate spins");
  const int spectator = 3 - p - q;
  const double total = 2 * std::abs(s_w) / (kPi * std::abs(j));
  const double sign = (s_w > 0 ? 1.0 : -1.0) * (j > 0 ? 1.0 : -1.0);

  const bool flip_pair = sign < 0;
  if (flip_pair) push_pulse(seq, {p}, kPhaseX, kPi);
  push_delay(seq, total / 4);
  push_pulse(seq, {spectator}, kPhaseX, kPi);
  push_delay(seq, total / 4);
  push_pulse(seq, {p, q}, kPhaseX, kPi);
  push_delay(seq, total / 4);
  push_pulse(seq, {spectator}, kPhaseX, kPi);
  push_delay(seq, total / 4);
  push_pulse(seq, {p, q}, kPhaseX, kPi);
  if (flip_pair) push_pulse(seq, {p}, kPhaseX, kPi);
}

void check_spin_pair(int control, int target) {
  if (control < 0 || control > 2 || target < 0 || target > 2 || control == target)
    throw std::invalid_argument("bad spin pair for two-qubit gate");
}

}  // namespace

PulseSequence compile_hadamard(int spin) {
  if (spin < 0 || spin > 2) throw std::out_of_range("bad spin for Hadamard");
  // H = (phase) Rx(pi) Ry(pi/2); pulses only, zero added delay.
  PulseSequence seq;
  push_pulse(seq, {spin}, kPhaseY, kPi / 2);
  push_pulse(seq, {spin}, kPhaseX, kPi);
  return seq;
}

PulseSequence compile_cnot(int control, int target, const SpinSystem& sys) {
  check_spin_pair(control, target);
  // CNOT = H_t CZ H_t with CZ = (phase) Rz_c(pi/2) Rz_t(pi/2) exp(+i pi/4 ZZ);
  // the zz window lasts 1/(2|J|) in total.
  PulseSequence seq = compile_hadamard(target);
  push_rz(seq, control, kPi / 2);
  push_rz(seq, target, kPi / 2);
  push_zz(seq, control, target, -kPi / 4, sys);
  seq.append(compile_hadamard(target));
  return seq;
}

PulseSequence compile_controlled_ry(int control, int target, double angle,
                                    const SpinSystem& sys) {
  check_spin_pair(control, target);
  // CRY(a) fires on control |0>:
  //   CRY(a) = Ry_t(a/2) exp(-i a Z_c Y_t / 4)
  //          = Ry_t(a/2) Rx_t(-pi/2) exp(-i a Z_c Z_t / 4) Rx_t(pi/2),
  // i.e. half the rotation applied locally, half conditioned through the
  // coupling; the zz window lasts |a|/(2 pi |J|) in total.
  PulseSequence seq;
  if (angle == 0.0) return seq;
  push_pulse(seq, {target}, kPhaseX, kPi / 2);
  push_zz(seq, control, target, angle / 4, sys);
  push_pulse(seq, {target}, kPhaseX, -kPi / 2);
  push_pulse(seq, {target}, kPhaseY, angle / 2);
  return seq;
}

PulseSequence compile_gate(const Gate& gate, const CloneParameters& params,
                           const SpinSystem& sys) {
  switch (gate.kind) {
    case GateKind::hadamard: return compile_hadamard(gate.target);
    case GateKind::cnot: return compile_cnot(gate.control, gate.target, sys);
    case GateKind::cry:
      return compile_controlled_ry(gate.control, gate.target,
                                   resolve_angle(gate.angle, params), sys);
  }
  throw std::invalid_argument("unknown gate kind");
}

PulseSequence full_experiment_sequence(double theta, Sign sign, const SpinSystem& sys,
                                       const GateCircuit& circuit) {
  const CloneParameters params = clone_angles(theta);
  PulseSequence seq;
  push_pulse(seq, {1}, kPhaseY, sign_value(sign) * theta);
  for (const Gate& g : circuit) seq.append(compile_gate(g, params, sys));
  return seq;
}

// ---------------------------------------------------------------------------
// Pseudo-pure states
// ---------------------------------------------------------------------------

PseudoPureState pseudo_pure(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw std::domain_error("pseudo-pure polarization must lie in (0, 1]");
  PseudoPureState pps;
  pps.epsilon = epsilon;
  pps.pure_part = pure_density(basis_state(3, 0));
  return pps;
}

DensityMatrix PseudoPureState::matrix() const {
  return epsilon * pure_part +
         (1.0 - epsilon) / 8.0 * DensityMatrix::Identity(8, 8);
}

PseudoPureState PseudoPureState::evolved(const Eigen::Ref<const Unitary>& u) const {
  PseudoPureState out;
  out.epsilon = epsilon;
  out.pure_part = u * pure_part * u.adjoint();
  return out;
}

// ---------------------------------------------------------------------------
// Pulse-sequence files
// ---------------------------------------------------------------------------

namespace {

std::string spin_names(const std::vector<int>& targets) {
  std::string s;
  for (int t : targets) {
    if (!s.empty()) s += ',';
    s += static_cast<char>('a' + t);
  }
  return s;
}

}  // namespace

std::string pulse_sequence_to_text(const PulseSequence& seq, const std::string& header) {
  std::ostringstream out;
  out.precision(17);
  if (!header.empty()) out << "# " << header << "\n";
  for (const PulseEvent& ev : seq.events) {
    if (const Pulse* p = std::get_if<Pulse>(&ev)) {
      out << "PULSE spins=" << spin_names(p->targets) << " phase=" << p->phase
          << " flip=" << p->flip;
      if (p->amp_error != 0.0) out << " derr=" << p->amp_error;
      out << "\n";
    } else {
      out << "DELAY t=" << std::get<Delay>(ev).duration << "\n";
    }
  }
  return out.str();
}

PulseSequence parse_pulse_sequence(const std::string& text) {
  PulseSequence seq;
  std::istringstream in(text);
  std::string line;
  auto value_of = [](const std::string& token, const std::string& key) {
    if (token.rfind(key + "=", 0) != 0)
      throw std::runtime_error("expected " + key + "= in pulse file, got: " + token);
    return token.substr(key.size() + 1);
  };
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "PULSE") {
      std::string spins, phase, flip, extra;
      ls >> spins >> phase >> flip;
      Pulse p;
      for (char ch : value_of(spins, "spins")) {
        if (ch == ',') continue;
        if (ch < 'a' || ch > 'c') throw std::runtime_error("bad spin name in pulse file");
        p.targets.push_back(ch - 'a');
      }
      p.phase = std::stod(value_of(phase, "phase"));
      p.flip = std::stod(value_of(flip, "flip"));
      if (ls >> extra) p.amp_error = std::stod(value_of(extra, "derr"));
      validate_pulse(p);
      seq.events.push_back(std::move(p));
    } else if (word == "DELAY") {
      std::string t;
      ls >> t;
      Delay d{std::stod(value_of(t, "t"))};
      if (d.duration < 0) throw std::runtime_error("negative delay in pulse file");
      seq.events.push_back(d);
    } else {
      throw std::runtime_error("bad event kind in pulse file: " + word);
    }
  }
  return seq;
}

void save_pulse_sequence(const std::string& path, const PulseSequence& seq,
                         const std::string& header) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write pulse file: " + path);
  f << pulse_sequence_to_text(seq, header);
}

PulseSequence load_pulse_sequence(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("missing pulse file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_pulse_sequence(buf.str());
}

bool apply_spin_config(SpinSystem& sys, const std::string& key, double value) {
  if (key == "J_ab") sys.j_ab = value;
  else if (key == "J_bc") sys.j_bc = value;
  else if (key == "J_ac") sys.j_ac = value;
  else if (key == "w_a") sys.offsets(0) = value;
  else if (key == "w_b") sys.offsets(1) = value;
  else if (key == "w_c") sys.offsets(2) = value;
  else return false;
  return true;
}

}  // namespace pqcm
