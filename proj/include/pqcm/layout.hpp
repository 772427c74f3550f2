#pragma once

// Discrete reconstruction of the five-gate cloning network
// {H x1, CNOT x2, CRY x2} by exhaustive, lexicographically ordered search
// against the state-level contract, plus the plain-text layout cache.

#include "pqcm/cloning.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pqcm {

enum class GateKind { hadamard, cnot, cry };

// Symbolic rotation angle of a CRY gate; resolved per theta.
enum class AngleExpr { none, plus_alpha, minus_alpha, plus_beta, minus_beta };

struct Gate {
  GateKind kind = GateKind::hadamard;
  int control = -1;  // -1 when the gate has no control (H)
  int target = 0;
  AngleExpr angle = AngleExpr::none;
};

using GateCircuit = std::vector<Gate>;

double resolve_angle(AngleExpr expr, const CloneParameters& params);

/// 4x4 or 2x2 matrix of one gate at the given machine angles.
Unitary gate_unitary(const Gate& gate, const CloneParameters& params);

StateVector apply_circuit(const GateCircuit& circuit, double theta,
                          const StateVector& state);

/// Ordered product of the circuit's embedded gates (8x8).
Unitary circuit_unitary(const GateCircuit& circuit, double theta);

// Candidate enumeration: 30 kind-orderings of the multiset [H,CNOT,CNOT,CRY,CRY]
// in ascending kind-rank order (H < CNOT < CRY); within a slot, qubit
// assignment before angle choice; pairs ordered (0,1),(0,2),(1,0),(1,2),
// (2,0),(2,1); signed angles ordered +alpha, -alpha, +beta, -beta with each
// magnitude used once. 933120 candidates total.
inline constexpr std::int64_t kLayoutCandidates = 933120;

struct LayoutSearchResult {
  bool found = false;
  GateCircuit circuit;             // winner, or nearest miss when !found
  std::int64_t candidate_index = -1;
  std::int64_t candidates_checked = 0;
  double residual = 0.0;           // winner residual / nearest-miss residual
  std::vector<double> phase;       // accepted global phase per grid theta (radians)
};

/// Lexicographically-first candidate mapping both inputs to both targets, with
/// one shared global phase per theta, within `tol` at every grid theta.
/// Requires at least three interior grid values (0 < theta < pi/2).
LayoutSearchResult search_figure_layout(const std::vector<double>& theta_grid,
                                        double tol = 1e-8);

/// Max residual of the circuit over the grid (both signs, shared phase).
double verify_layout(const GateCircuit& circuit, const std::vector<double>& theta_grid);

// Cache file: `# pqcm-layout ...` header recording grid/tolerance, then one
// gate per line, `KIND control target [angle]`, control `-` for H.
std::string layout_to_text(const LayoutSearchResult& result,
                           const std::vector<double>& theta_grid, double tol);
void save_layout(const std::string& path, const LayoutSearchResult& result,
                 const std::vector<double>& theta_grid, double tol);
GateCircuit parse_layout(const std::string& text);
/// Throws std::runtime_error when the file does not exist.
GateCircuit load_layout(const std::string& path);

}  // namespace pqcm
