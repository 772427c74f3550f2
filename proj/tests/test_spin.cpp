#include "pqcm/spin.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace pqcm;
using namespace pqcm::testing;

namespace {

constexpr double kPi = std::numbers::pi;

SpinSystem default_sys() { return SpinSystem{}; }

SpinSystem bare_sys() {
  SpinSystem sys;
  sys.j_ab = sys.j_bc = sys.j_ac = 0.0;
  return sys;
}

const GateCircuit& network() {
  static const GateCircuit circuit =
      search_figure_layout({kPi / 12, kPi / 4, 5 * kPi / 12}, 1e-8).circuit;
  return circuit;
}

Unitary ideal_gate_full(const Gate& g, double theta) {
  const CloneParameters p = clone_angles(theta);
  if (g.kind == GateKind::hadamard) return embed_gate(3, hadamard(), {g.target});
  if (g.kind == GateKind::cnot) return embed_gate(3, cnot(), {g.control, g.target});
  return embed_gate(3, controlled_ry(resolve_angle(g.angle, p)), {g.control, g.target});
}

}  // namespace

TEST_CASE("hamiltonian: zero system gives the zero matrix") {
  CHECK(hamiltonian(bare_sys()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hamiltonian: single offset has eigenvalues +-w/2, multiplicity 4") {
  SpinSystem sys = bare_sys();
  sys.offsets(0) = 100.0;
  const Eigen::VectorXd diag = hamiltonian(sys).diagonal().real();
  int plus = 0, minus = 0;
  for (int i = 0; i < 8; ++i) {
    if (std::abs(diag(i) - 50.0) < 1e-12) ++plus;
    if (std::abs(diag(i) + 50.0) < 1e-12) ++minus;
  }
  CHECK(plus == 4);
  CHECK(minus == 4);
}

TEST_CASE("hamiltonian: |000> entry with the molecule couplings") {
  const Eigen::MatrixXcd h = hamiltonian(default_sys());
  CHECK(is_hermitian(h, 0.0));
  const double expected = 2 * kPi * (161.3 - 192.2 + 47.6) / 4;
  CHECK(h(0, 0).real() == doctest::Approx(expected).epsilon(1e-14));
  Eigen::MatrixXcd off = h;
  off.diagonal().setZero();
  CHECK(off.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("evolve: identity at t = 0 and the semigroup property") {
  const Eigen::MatrixXcd h = hamiltonian(default_sys());
  std::mt19937_64 rng(41);
  const StateVector psi = random_state(rng, 3);
  CHECK(max_abs_diff(evolve(psi, h, 0.0), psi) == 0.0);

  const StateVector two_step = evolve(evolve(psi, h, 1e-3), h, 2e-3);
  CHECK(max_abs_diff(two_step, evolve(psi, h, 3e-3)) < 1e-12);

  CHECK_THROWS_AS(evolve(psi, h, -1.0), std::domain_error);
  Eigen::MatrixXcd bad = h;
  bad(0, 1) = 1.0;  // not Hermitian
  CHECK_THROWS_AS(evolve(psi, bad, 1e-3), std::invalid_argument);
}

TEST_CASE("evolve and apply_pulse: density-matrix route matches the pure route") {
  const Eigen::MatrixXcd h = hamiltonian(default_sys());
  std::mt19937_64 rng(46);
  const StateVector psi = random_state(rng, 3);
  const DensityMatrix rho = pure_density(psi);

  const DensityMatrix evolved = evolve(rho, h, 2.5e-3);
  CHECK(max_abs_diff(evolved, pure_density(evolve(psi, h, 2.5e-3))) < 1e-12);
  CHECK(is_density_matrix(evolved));

  const Pulse p{{0, 2}, 0.3, kPi / 2, 0.01};
  CHECK(max_abs_diff(apply_pulse(rho, p), pure_density(apply_pulse(psi, p))) < 1e-12);

  const auto [out, prop] =
      simulate_sequence(compile_cnot(1, 2, default_sys()), default_sys(), rho);
  CHECK(max_abs_diff(out, DensityMatrix(prop * rho * prop.adjoint())) < 1e-12);
}

TEST_CASE("evolve: handles non-diagonal Hermitian generators") {
  // Cross-check the eigensolver path against a known rotation: sx/2 generates
  // the same one-parameter group as an x pulse.
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 2);
  h = 0.5 * pauli_x();
  const StateVector psi = StateVector(Eigen::Vector2cd(1, 0));
  const StateVector evolved = evolve(psi, h, kPi / 2);
  const Eigen::Matrix2cd expected = std::cos(kPi / 4) * Eigen::Matrix2cd::Identity() -
                                    Complex{0, 1} * std::sin(kPi / 4) * pauli_x();
  CHECK(max_abs_diff(evolved, StateVector(expected * psi)) < 1e-12);
}

TEST_CASE("evolve: pure zz coupling for 1/(2J) is a controlled phase up to local z") {
  SpinSystem sys = bare_sys();
  sys.j_bc = 100.0;
  const double t = 1.0 / (2 * sys.j_bc);
  const Eigen::MatrixXcd h = hamiltonian(sys);

  std::mt19937_64 rng(42);
  const StateVector psi = random_state(rng, 3);
  const StateVector evolved = evolve(psi, h, t);

  // exp(-i pi/4 ZZ) = e^{i pi/4} Rz(pi/2) Rz(pi/2) CZ on the coupled pair.
  Eigen::Matrix2cd rz = (Eigen::Matrix2cd() << std::exp(Complex{0, -kPi / 4}), 0, 0,
                         std::exp(Complex{0, kPi / 4}))
                            .finished();
  Eigen::Matrix4cd cz = Eigen::Matrix4cd::Identity();
  cz(3, 3) = -1;
  const Unitary expected = std::exp(Complex{0, kPi / 4}) *
                           embed_gate(3, rz, {1}) * embed_gate(3, rz, {2}) *
                           embed_gate(3, cz, {1, 2});
  CHECK(max_abs_diff(evolved, StateVector(expected * psi)) < 1e-12);
}

TEST_CASE("apply_pulse: pi pulse inverts populations") {
  const Pulse flip{{1}, 0.0, kPi, 0.0};
  const StateVector out = apply_pulse(basis_state(3, 0), flip);
  CHECK(std::norm(out(2)) == doctest::Approx(1.0).epsilon(1e-14));  // |010>
}

TEST_CASE("apply_pulse: amplitude error shifts the overlap as cos^2") {
  const StateVector zero = basis_state(3, 0);
  const StateVector ideal = apply_pulse(zero, Pulse{{0}, 0.0, kPi / 2, 0.0});
  const StateVector off = apply_pulse(zero, Pulse{{0}, 0.0, kPi / 2, 0.03});
  const double overlap = std::norm(ideal.dot(off));
  CHECK(overlap == doctest::Approx(std::pow(std::cos(0.03 * kPi / 4), 2)).epsilon(1e-12));
}

TEST_CASE("apply_pulse: two pi pulses about one axis are the identity ray") {
  std::mt19937_64 rng(43);
  const StateVector psi = random_state(rng, 3);
  const Pulse p{{2}, 0.7, kPi, 0.0};
  CHECK(ray_distance(apply_pulse(apply_pulse(psi, p), p), psi) < 1e-12);
}

TEST_CASE("apply_pulse: validation") {
  CHECK_THROWS_AS(pulse_unitary(Pulse{{}, 0, kPi, 0}), std::invalid_argument);
  CHECK_THROWS_AS(pulse_unitary(Pulse{{1, 1}, 0, kPi, 0}), std::invalid_argument);
  CHECK_THROWS_AS(pulse_unitary(Pulse{{3}, 0, kPi, 0}), std::out_of_range);
  CHECK_THROWS_AS(pulse_unitary(Pulse{{0}, 0, 3 * kPi, 0}), std::domain_error);
}

TEST_CASE("simulate_sequence: empty sequence is the identity") {
  const auto [out, prop] = simulate_sequence(PulseSequence{}, default_sys(),
                                             StateVector(basis_state(3, 5)));
  CHECK(max_abs_diff(prop, Unitary(Unitary::Identity(8, 8))) == 0.0);
  CHECK(max_abs_diff(out, basis_state(3, 5)) == 0.0);
}

TEST_CASE("simulate_sequence: spin echo refocuses a single offset") {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> tau(1e-5, 5e-3);
  for (int spin = 0; spin < 3; ++spin) {
    SpinSystem sys = bare_sys();
    sys.offsets(spin) = 120.0 + 40.0 * spin;
    for (int trial = 0; trial < 10; ++trial) {
      const double t = tau(rng);
      PulseSequence echo;
      echo.events = {Delay{t}, Pulse{{spin}, 0.0, kPi, 0.0}, Delay{t},
                     Pulse{{spin}, 0.0, kPi, 0.0}};
      const Unitary prop = sequence_propagator(echo, sys);
      CHECK(phase_free_diff(prop, Unitary::Identity(8, 8)) < 1e-10);
    }
  }
}

TEST_CASE("compile_hadamard: pulses only, matches the gate") {
  for (int spin = 0; spin < 3; ++spin) {
    const PulseSequence seq = compile_hadamard(spin);
    CHECK(seq.total_duration() == 0.0);
    for (const PulseEvent& ev : seq.events) CHECK(std::holds_alternative<Pulse>(ev));
    const Unitary prop = sequence_propagator(seq, default_sys());
    CHECK(phase_free_diff(prop, embed_gate(3, hadamard(), {spin})) < 1e-12);
  }
}

TEST_CASE("compile_cnot: delay budget 1/(2|J|) and correctness") {
  const SpinSystem sys = default_sys();
  const PulseSequence seq = compile_cnot(1, 2, sys);
  CHECK(seq.total_duration() ==
        doctest::Approx(1.0 / (2 * 192.2)).epsilon(1e-12));  // ~2.601 ms
  CHECK(phase_free_diff(sequence_propagator(seq, sys), embed_gate(3, cnot(), {1, 2})) <
        1e-12);

  // Sector check: the compiled gate flips c when b is set.
  const Unitary prop = sequence_propagator(seq, sys);
  const StateVector in = basis_state(3, 2);   // |010>
  const StateVector out = prop * in;
  CHECK(std::norm(out(3)) == doctest::Approx(1.0).epsilon(1e-12));  // |011>

  for (const auto [c, t] : std::vector<std::pair<int, int>>{
           {0, 1}, {1, 0}, {2, 1}, {0, 2}, {2, 0}}) {
    const PulseSequence s = compile_cnot(c, t, sys);
    CHECK(phase_free_diff(sequence_propagator(s, sys), embed_gate(3, cnot(), {c, t})) <
          1e-12);
  }
}

TEST_CASE("compile_controlled_ry: delay budget |angle|/(2 pi |J|)") {
  const SpinSystem sys = default_sys();
  const double alpha = clone_angles(kPi / 4).alpha;
  const PulseSequence seq = compile_controlled_ry(1, 0, -alpha, sys);
  CHECK(seq.total_duration() == doctest::Approx(alpha / (2 * kPi * 161.3)).epsilon(1e-12));
}

TEST_CASE("compile_controlled_ry: sound for random angles and pairs") {
  const SpinSystem sys = default_sys();
  std::mt19937_64 rng(45);
  std::uniform_real_distribution<double> angle(-kPi + 1e-6, kPi);
  std::uniform_int_distribution<int> pair(0, 5);
  const std::array<std::pair<int, int>, 6> pairs = {
      {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}}};
  for (int trial = 0; trial < 100; ++trial) {
    const double a = angle(rng);
    const auto [c, t] = pairs[pair(rng)];
    const PulseSequence seq = compile_controlled_ry(c, t, a, sys);
    const Unitary prop = sequence_propagator(seq, sys);
    CHECK(phase_free_diff(prop, embed_gate(3, controlled_ry(a), {c, t})) < 1e-6);
  }
}

TEST_CASE("compile: refocusing holds with synthetic chemical shifts") {
  SpinSystem sys = default_sys();
  sys.offsets = Eigen::Vector3d(50.0, -80.0, 120.0);
  CHECK(phase_free_diff(sequence_propagator(compile_cnot(2, 1, sys), sys),
                        embed_gate(3, cnot(), {2, 1})) < 1e-10);
  CHECK(phase_free_diff(sequence_propagator(compile_controlled_ry(1, 0, -0.9, sys), sys),
                        embed_gate(3, controlled_ry(-0.9), {1, 0})) < 1e-10);
}

TEST_CASE("compile: zero coupling is rejected") {
  SpinSystem sys = default_sys();
  sys.j_ac = 0.0;
  CHECK_THROWS_AS(compile_cnot(0, 2, sys), std::invalid_argument);
  CHECK_THROWS_AS(compile_controlled_ry(0, 2, 1.0, sys), std::invalid_argument);
}

TEST_CASE("compiled gates and full sequences stay unitary") {
  const SpinSystem sys = default_sys();
  for (double theta : {kPi / 12, kPi / 4, 5 * kPi / 12}) {
    const PulseSequence seq = full_experiment_sequence(theta, Sign::plus, sys, network());
    CHECK(is_unitary(sequence_propagator(seq, sys), 1e-10));
  }
}

TEST_CASE("full_experiment_sequence: reproduces the machine within 1e-6") {
  const SpinSystem sys = default_sys();
  for (double theta : {0.0, kPi / 12, kPi / 6, kPi / 4, kPi / 3, 5 * kPi / 12, kPi / 2}) {
    for (Sign sign : {Sign::plus, Sign::minus}) {
      const PulseSequence seq = full_experiment_sequence(theta, sign, sys, network());
      const Unitary prop = sequence_propagator(seq, sys);
      CHECK(ray_distance(StateVector(prop * basis_state(3, 0)),
                         target_output({theta, sign})) < 1e-6);
      CHECK(seq.total_duration() < 10e-3);
    }
  }
}

TEST_CASE("full_experiment_sequence: success probability 2/3 at pi/3") {
  const SpinSystem sys = default_sys();
  const PulseSequence seq = full_experiment_sequence(kPi / 3, Sign::plus, sys, network());
  const StateVector out = sequence_propagator(seq, sys) * basis_state(3, 0);
  CHECK(std::abs(post_select(out, 0, 0).probability - 2.0 / 3.0) < 1e-6);
}

TEST_CASE("full_experiment_sequence: rotation delays vanish at pi/2") {
  const SpinSystem sys = default_sys();
  const PulseSequence seq = full_experiment_sequence(kPi / 2, Sign::plus, sys, network());
  // Only the two CNOT windows remain; the CRY windows collapse with
  // alpha, beta -> 0 (up to the fl(pi/2) cusp, i.e. below a nanosecond).
  const double cnot_time = 1.0 / (2 * 161.3) + 1.0 / (2 * 192.2);
  CHECK(std::abs(seq.total_duration() - cnot_time) < 1e-9);
}

TEST_CASE("gate-by-gate compilation matches each ideal gate of the network") {
  const SpinSystem sys = default_sys();
  const CloneParameters params = clone_angles(kPi / 4);
  for (const Gate& g : network()) {
    const PulseSequence seq = compile_gate(g, params, sys);
    CHECK(phase_free_diff(sequence_propagator(seq, sys), ideal_gate_full(g, kPi / 4)) <
          1e-10);
  }
}

TEST_CASE("pseudo_pure: structure and range checks") {
  const PseudoPureState pure = pseudo_pure(1.0);
  CHECK(max_abs_diff(pure.matrix(), pure_density(basis_state(3, 0))) == 0.0);

  const PseudoPureState pps = pseudo_pure(1e-5);
  const DensityMatrix rho = pps.matrix();
  CHECK(rho(0, 0).real() == doctest::Approx(1e-5 + (1 - 1e-5) / 8).epsilon(1e-14));
  for (int i = 1; i < 8; ++i)
    CHECK(rho(i, i).real() == doctest::Approx((1 - 1e-5) / 8).epsilon(1e-14));
  CHECK(std::abs(rho.trace().real() - 1.0) < 1e-14);
  CHECK(is_density_matrix(rho));

  CHECK_THROWS_AS(pseudo_pure(0.0), std::domain_error);
  CHECK_THROWS_AS(pseudo_pure(1.5), std::domain_error);
}

TEST_CASE("pseudo_pure: traceless observables scale linearly in epsilon") {
  const Unitary u = sequence_propagator(
      full_experiment_sequence(kPi / 4, Sign::plus, default_sys(), network()),
      default_sys());
  for (int spin = 0; spin < 3; ++spin) {
    const Unitary sx = embed_gate(3, pauli_x(), {spin});
    const double pure_expect =
        (pseudo_pure(1.0).evolved(u).matrix() * sx).trace().real();
    for (double eps : {1e-2, 1e-5}) {
      const double expect = (pseudo_pure(eps).evolved(u).matrix() * sx).trace().real();
      CHECK(expect == doctest::Approx(eps * pure_expect).epsilon(1e-10));
    }
  }
}

TEST_CASE("error continuity: infidelity grows from zero with the rf error") {
  const SpinSystem sys = default_sys();
  auto mean_infidelity = [&](double delta) {
    double sum = 0.0;
    int n = 0;
    for (int k = 0; k <= 6; ++k) {
      const double theta = kPi / 2 * k / 6;
      for (Sign sign : {Sign::plus, Sign::minus}) {
        // The full sequence already prepares the input, so run from |000>.
        PulseSequence seq = full_experiment_sequence(theta, sign, sys, network());
        seq = with_amplitude_error(seq, delta);
        const StateVector out = sequence_propagator(seq, sys) * basis_state(3, 0);
        const PostSelection success = post_select(out, 0, 0);
        REQUIRE(success.state.has_value());
        const DensityMatrix rho_bc = pure_density(*success.state);
        const DensityMatrix rho0 = pure_density(StateVector(Eigen::Vector2cd(
            std::cos(theta / 2), sign_value(sign) * std::sin(theta / 2))));
        sum += 1.0 - fidelity_pure(rho0, partial_trace(rho_bc, {0}));
        sum += 1.0 - fidelity_pure(rho0, partial_trace(rho_bc, {1}));
        n += 2;
      }
    }
    return sum / n;
  };
  const double at0 = mean_infidelity(0.0);
  const double at1 = mean_infidelity(0.01);
  const double at2 = mean_infidelity(0.02);
  const double at4 = mean_infidelity(0.04);
  CHECK(std::abs(at0) < 1e-12);
  CHECK(at1 <= at2);
  CHECK(at2 <= at4);
  CHECK(at1 > 0.0);
}

TEST_CASE("with_amplitude_error: uniform and per-spin") {
  PulseSequence seq = compile_cnot(1, 2, default_sys());
  const PulseSequence uniform = with_amplitude_error(seq, 0.05);
  for (const PulseEvent& ev : uniform.events)
    if (const Pulse* p = std::get_if<Pulse>(&ev)) CHECK(p->amp_error == 0.05);

  const PulseSequence per_spin =
      with_amplitude_error(seq, Eigen::Vector3d(0.01, 0.02, 0.03));
  for (const PulseEvent& ev : per_spin.events)
    if (const Pulse* p = std::get_if<Pulse>(&ev))
      CHECK(p->amp_error == doctest::Approx(0.01 * (p->targets.front() == 0) +
                                            0.02 * (p->targets.front() == 1) +
                                            0.03 * (p->targets.front() == 2)));
}

TEST_CASE("pulse files: round-trip is value-exact and propagator-identical") {
  const SpinSystem sys = default_sys();
  const PulseSequence seq = full_experiment_sequence(kPi / 4, Sign::minus, sys, network());
  const std::string text = pulse_sequence_to_text(seq, "round trip");
  const PulseSequence parsed = parse_pulse_sequence(text);
  REQUIRE(parsed.events.size() == seq.events.size());

  const Unitary a = sequence_propagator(seq, sys);
  const Unitary b = sequence_propagator(parsed, sys);
  CHECK((a.array() == b.array()).all());  // bit-for-bit
  CHECK(parsed.total_duration() == seq.total_duration());
}

TEST_CASE("pulse files: parse errors and noise annotations") {
  CHECK_THROWS_AS(parse_pulse_sequence("WAIT t=1\n"), std::runtime_error);
  CHECK_THROWS_AS(parse_pulse_sequence("PULSE spins=d phase=0 flip=1\n"),
                  std::runtime_error);
  CHECK_THROWS_AS(parse_pulse_sequence("DELAY t=-1\n"), std::runtime_error);

  const PulseSequence noisy = with_amplitude_error(compile_hadamard(0), 0.02);
  const PulseSequence parsed = parse_pulse_sequence(pulse_sequence_to_text(noisy, ""));
  for (const PulseEvent& ev : parsed.events)
    CHECK(std::get<Pulse>(ev).amp_error == 0.02);
}

TEST_CASE("spin config keys") {
  SpinSystem sys;
  CHECK(apply_spin_config(sys, "J_ab", 150.0));
  CHECK(apply_spin_config(sys, "w_c", -10.0));
  CHECK(sys.j_ab == 150.0);
  CHECK(sys.offsets(2) == -10.0);
  CHECK(!apply_spin_config(sys, "J_xy", 1.0));
}
