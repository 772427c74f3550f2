#include "pqcm/linalg.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace pqcm;
using namespace pqcm::testing;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("kron: identity and pauli products") {
  const Eigen::MatrixXcd i2 = Eigen::Matrix2cd::Identity();
  CHECK(max_abs_diff(kron(i2, i2), Eigen::Matrix4cd::Identity()) == 0.0);

  const Eigen::MatrixXcd zz = kron(pauli_z(), pauli_z());
  const Eigen::Vector4cd diag = zz.diagonal();
  CHECK(diag(0) == Complex{1, 0});
  CHECK(diag(1) == Complex{-1, 0});
  CHECK(diag(2) == Complex{-1, 0});
  CHECK(diag(3) == Complex{1, 0});
  CHECK(max_abs_diff(zz, Eigen::Vector4cd(1, -1, -1, 1).asDiagonal().toDenseMatrix()) ==
        0.0);
}

TEST_CASE("kron: 8-dim embedding matches the element-wise index loop") {
  Eigen::Matrix2cd p0 = Eigen::Matrix2cd::Zero();
  p0(0, 0) = 1;
  const Eigen::MatrixXcd a = kron(p0, pauli_x());  // |0><0| x sx
  const Eigen::MatrixXcd m = kron(a, Eigen::Matrix2cd::Identity());
  REQUIRE(m.rows() == 8);
  // Brute-force oracle over all 64 entries.
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      const Complex expected =
          a(i / 2, j / 2) * ((i % 2) == (j % 2) ? 1.0 : 0.0);
      CHECK(std::abs(m(i, j) - expected) == 0.0);
    }
}

TEST_CASE("ry: fixed sign convention") {
  CHECK(max_abs_diff(ry(0), Eigen::Matrix2cd::Identity()) == 0.0);

  const Eigen::Vector2cd flipped = ry(kPi) * Eigen::Vector2cd(1, 0);
  CHECK(std::abs(flipped(0)) < 1e-15);
  CHECK(std::abs(flipped(1) - Complex{1, 0}) < 1e-15);

  const Eigen::Vector2cd rotated = ry(kPi / 3) * Eigen::Vector2cd(1, 0);
  CHECK(rotated(0).real() == doctest::Approx(std::cos(kPi / 6)).epsilon(1e-14));
  CHECK(rotated(1).real() == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("apply_gate: basic gates with qubit 0 as the most significant bit") {
  const StateVector zero3 = basis_state(3, 0);

  const StateVector x0 = apply_gate(zero3, pauli_x(), {0});
  CHECK(max_abs_diff(x0, basis_state(3, 4)) == 0.0);  // |100>

  const StateVector h0 = apply_gate(zero3, hadamard(), {0});
  CHECK(std::abs(h0(0) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(h0(4) - 1.0 / std::sqrt(2.0)) < 1e-15);

  StateVector plus(8);
  plus.setZero();
  plus(0) = plus(2) = 1.0 / std::sqrt(2.0);  // (|000> + |010>)/sqrt2
  const StateVector after = apply_gate(plus, cnot(), {1, 2});
  StateVector expected(8);
  expected.setZero();
  expected(0) = expected(3) = 1.0 / std::sqrt(2.0);  // (|000> + |011>)/sqrt2
  CHECK(max_abs_diff(after, expected) < 1e-15);
}

TEST_CASE("apply_gate: error paths") {
  const StateVector psi = basis_state(2, 0);
  CHECK_THROWS_AS(apply_gate(psi, cnot(), {0}), std::invalid_argument);
  CHECK_THROWS_AS(apply_gate(psi, cnot(), {0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(apply_gate(psi, pauli_x(), {2}), std::out_of_range);
}

TEST_CASE("apply_gate agrees with the brute-force kron expansion") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const StateVector psi = random_state(rng, 3);
    const Unitary g1 = random_unitary(rng, 2);
    for (int target = 0; target < 3; ++target) {
      const StateVector direct = apply_gate(psi, g1, {target});
      const StateVector full = brute_force_embed(3, g1, {target}) * psi;
      CHECK(max_abs_diff(direct, full) < 1e-12);
    }
    const Unitary g2 = random_unitary(rng, 4);
    for (const auto& targets : std::vector<std::vector<int>>{
             {0, 1}, {1, 0}, {0, 2}, {2, 0}, {1, 2}, {2, 1}}) {
      const StateVector direct = apply_gate(psi, g2, targets);
      const StateVector full = brute_force_embed(3, g2, targets) * psi;
      CHECK(max_abs_diff(direct, full) < 1e-12);
      CHECK(max_abs_diff(embed_gate(3, g2, targets), brute_force_embed(3, g2, targets)) <
            1e-14);
    }
    CHECK(is_normalized(apply_gate(psi, g2, {2, 0})));
  }
}

TEST_CASE("unitarity closure under products and kron") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Unitary a = random_unitary(rng, 4);
    const Unitary b = random_unitary(rng, 2);
    CHECK(is_unitary(a));
    CHECK(is_unitary(Unitary(a * a)));
    CHECK(is_unitary(Unitary(kron(a, b))));
  }
}

TEST_CASE("partial_trace: separable and maximally entangled cases") {
  const DensityMatrix rho00 = pure_density(basis_state(2, 0));
  Eigen::Matrix2cd p0 = Eigen::Matrix2cd::Zero();
  p0(0, 0) = 1;
  CHECK(max_abs_diff(partial_trace(rho00, {0}), p0) == 0.0);

  StateVector bell(4);
  bell.setZero();
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const DensityMatrix rho_bell = pure_density(bell);
  const Eigen::MatrixXcd half = 0.5 * Eigen::Matrix2cd::Identity();
  CHECK(max_abs_diff(partial_trace(rho_bell, {0}), half) < 1e-15);
  CHECK(max_abs_diff(partial_trace(rho_bell, {1}), half) < 1e-15);

  CHECK_THROWS_AS(partial_trace(rho_bell, {}), std::invalid_argument);
}

TEST_CASE("partial_trace: trace preserved on random states") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const DensityMatrix rho = pure_density(random_state(rng, 3));
    for (const auto& keep : std::vector<std::vector<int>>{{0}, {1}, {2}, {0, 2}, {1, 2}}) {
      const DensityMatrix red = partial_trace(rho, keep);
      CHECK(std::abs(red.trace().real() - 1.0) < 1e-12);
      CHECK(is_density_matrix(red));
    }
  }
}

TEST_CASE("post_select: trivial and empty branches") {
  const auto sure = post_select(basis_state(3, 0), 0, 0);
  CHECK(sure.probability == doctest::Approx(1.0).epsilon(1e-15));
  REQUIRE(sure.state.has_value());
  CHECK(max_abs_diff(*sure.state, basis_state(2, 0)) == 0.0);

  const auto empty = post_select(basis_state(3, 0), 0, 1);
  CHECK(empty.probability == 0.0);
  CHECK(!empty.state.has_value());
}

TEST_CASE("fidelity_pure: reference values") {
  const DensityMatrix zero = pure_density(StateVector(Eigen::Vector2cd(1, 0)));
  const DensityMatrix one = pure_density(StateVector(Eigen::Vector2cd(0, 1)));
  CHECK(fidelity_pure(zero, zero) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(fidelity_pure(zero, one) == doctest::Approx(0.0).epsilon(1e-14));

  const DensityMatrix mixed = 0.5 * Eigen::Matrix2cd::Identity();
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> angle(0.0, kPi / 2);
  for (int trial = 0; trial < 10; ++trial) {
    const double theta = angle(rng);
    const StateVector psi =
        StateVector(Eigen::Vector2cd(std::cos(theta / 2), std::sin(theta / 2)));
    CHECK(fidelity_pure(pure_density(psi), mixed) ==
          doctest::Approx(0.5).epsilon(1e-14));
  }
  CHECK_THROWS_AS(fidelity_pure(mixed, zero), std::invalid_argument);
}

TEST_CASE("fidelity_pure: bounded on random states") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 100; ++trial) {
    const DensityMatrix pure = pure_density(random_state(rng, 2));
    // Random mixed state: convex mix of two pure states.
    const double w = std::uniform_real_distribution<double>(0, 1)(rng);
    const DensityMatrix mixed =
        w * pure_density(random_state(rng, 2)) +
        (1 - w) * pure_density(random_state(rng, 2));
    const double f = fidelity_pure(pure, mixed);
    CHECK(f >= -1e-12);
    CHECK(f <= 1.0 + 1e-10);
  }
}

TEST_CASE("bloch_vector: poles, equator, centre") {
  const DensityMatrix zero = pure_density(StateVector(Eigen::Vector2cd(1, 0)));
  CHECK(max_abs_diff(Eigen::Vector3d(bloch_vector(zero)),
                     Eigen::Vector3d(0, 0, 1)) == 0.0);

  // theta = pi/2 member of the cloning set lies on +x.
  const StateVector px =
      StateVector(Eigen::Vector2cd(std::cos(kPi / 4), std::sin(kPi / 4)));
  const BlochVector r = bloch_vector(pure_density(px));
  CHECK(r(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(r(1)) < 1e-15);
  CHECK(std::abs(r(2)) < 1e-15);

  const DensityMatrix centre = 0.5 * Eigen::Matrix2cd::Identity();
  CHECK(bloch_vector(centre).norm() == 0.0);
}

TEST_CASE("bloch_vector: purity vs entanglement") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    const StateVector psi1 = random_state(rng, 1);
    CHECK(bloch_vector(pure_density(psi1)).norm() == doctest::Approx(1.0).epsilon(1e-10));
  }
  StateVector bell(4);
  bell.setZero();
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  CHECK(bloch_vector(partial_trace(pure_density(bell), {0})).norm() < 1e-12);
}

TEST_CASE("ray_distance: phase invariance") {
  std::mt19937_64 rng(17);
  const StateVector psi = random_state(rng, 3);
  const Complex phase = std::exp(Complex{0, 1.234});
  CHECK(ray_distance(psi, StateVector(phase * psi)) < 1e-12);
  const StateVector other = random_state(rng, 3);
  CHECK(ray_distance(psi, other) > 0.1);  // generic states are far apart
}
