#include "pqcm/cloning.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pqcm {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

void check_theta(double theta) {
  if (!(theta >= 0.0 && theta <= kHalfPi))
    throw std::domain_error("theta must lie in [0, pi/2]");
}

Eigen::Vector2cd set_state(double theta, Sign sign) {
  return {std::cos(theta / 2), sign_value(sign) * std::sin(theta / 2)};
}

}  // namespace

CloneParameters clone_angles(double theta) {
  check_theta(theta);
  const double t2 = std::pow(std::tan(theta / 2), 2);
  const double t4 = t2 * t2;
  CloneParameters p;
  p.theta = theta;
  p.alpha = 2 * std::acos(clamp_unit(std::sqrt((1 + t4) / 2)));
  // 2/(1+tan^-4) is evaluated as 2 t4/(1+t4), which is finite at theta = 0.
  p.beta = 2 * std::acos(clamp_unit(
               (std::sqrt(2 / (1 + t4)) + std::sqrt(2 * t4 / (1 + t4))) / 2));
  p.gamma = 1.0 / (1.0 + std::cos(theta));
  return p;
}

StateVector input_state(const CloneSet& set) {
  check_theta(set.theta);
  const Eigen::Vector2cd zero{1.0, 0.0};
  return kron(kron(zero, set_state(set.theta, set.sign)), zero);
}

StateVector failure_state(double theta) {
  check_theta(theta);
  const double t2 = std::pow(std::tan(theta / 2), 2);
  const double t4 = t2 * t2;
  StateVector phi = StateVector::Zero(4);
  phi(0) = -std::sqrt(1.0 / (1.0 + t4));
  phi(3) = -std::sqrt(t4 / (1.0 + t4));
  return phi;
}

StateVector target_output(const CloneSet& set) {
  const CloneParameters p = clone_angles(set.theta);
  const Eigen::Vector2cd zero{1.0, 0.0};
  const Eigen::Vector2cd one{0.0, 1.0};
  const Eigen::Vector2cd psi = set_state(set.theta, set.sign);
  const StateVector success = kron(kron(zero, psi), psi);
  const StateVector fail = kron(one, failure_state(set.theta));
  return std::sqrt(p.gamma) * success + std::sqrt(std::max(0.0, 1.0 - p.gamma)) * fail;
}

namespace {

// Appends v orthonormalized against basis; returns false when the residual is
// below the drop threshold. Two projection passes keep the result orthogonal
// to working precision even for nearly dependent inputs.
bool gram_schmidt_append(std::vector<StateVector>& basis, StateVector v) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& u : basis) v -= u.dot(v) * u;
  if (v.norm() < 1e-10) return false;
  basis.push_back(v.normalized());
  return true;
}

}  // namespace

Unitary build_cloning_unitary(double theta) {
  check_theta(theta);
  const StateVector in_p = input_state({theta, Sign::plus});
  const StateVector in_m = input_state({theta, Sign::minus});
  const StateVector out_p = target_output({theta, Sign::plus});
  const StateVector out_m = target_output({theta, Sign::minus});

  const Complex gram_in = in_p.dot(in_m);
  const Complex gram_out = out_p.dot(out_m);
  if (std::abs(gram_in - gram_out) > 1e-10)
    throw std::runtime_error(
        "cloning unitary: input/output Gram matrices disagree; "
        "target_output is inconsistent with the success probability");

  std::vector<StateVector> in_basis, out_basis;
  gram_schmidt_append(in_basis, in_p);
  gram_schmidt_append(out_basis, out_p);
  // At theta = 0 both pairs collapse onto one ray and the second vector drops
  // out of both bases together (the Gram matrices agree).
  const bool in_kept = gram_schmidt_append(in_basis, in_m);
  const bool out_kept = gram_schmidt_append(out_basis, out_m);
  if (in_kept != out_kept)
    throw std::runtime_error("cloning unitary: inconsistent subspace collapse");

  const size_t dim = 8;
  for (size_t k = 0; k < dim && in_basis.size() < dim; ++k)
    gram_schmidt_append(in_basis, basis_state(3, static_cast<int>(k)));
  for (size_t k = 0; k < dim && out_basis.size() < dim; ++k)
    gram_schmidt_append(out_basis, basis_state(3, static_cast<int>(k)));
  if (in_basis.size() != dim || out_basis.size() != dim)
    throw std::runtime_error("cloning unitary: basis completion failed");

  Unitary u = Unitary::Zero(dim, dim);
  for (size_t k = 0; k < dim; ++k) u += out_basis[k] * in_basis[k].adjoint();
  return u;
}

CloneRunResult run_clone(const CloneSet& set, const Eigen::Ref<const Unitary>& machine) {
  const StateVector out = machine * input_state(set);
  const PostSelection success = post_select(out, 0, 0);

  CloneRunResult result;
  result.success_prob = success.probability;
  if (success.state) {
    const DensityMatrix rho_bc = pure_density(*success.state);
    result.clone_b = partial_trace(rho_bc, {0});
    result.clone_c = partial_trace(rho_bc, {1});
  }
  const PostSelection fail = post_select(out, 0, 1);
  if (fail.state) result.failure = fail.state;
  return result;
}

}  // namespace pqcm
