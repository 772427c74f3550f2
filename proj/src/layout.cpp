#include "pqcm/layout.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pqcm {

namespace {

constexpr std::array<std::pair<int, int>, 6> kPairs = {
    {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}}};

constexpr std::array<AngleExpr, 4> kAngles = {AngleExpr::plus_alpha, AngleExpr::minus_alpha,
                                              AngleExpr::plus_beta, AngleExpr::minus_beta};

int angle_code(AngleExpr e) {
  switch (e) {
    case AngleExpr::plus_alpha: return 0;
    case AngleExpr::minus_alpha: return 1;
    case AngleExpr::plus_beta: return 2;
    case AngleExpr::minus_beta: return 3;
    default: return -1;
  }
}

const char* angle_token(AngleExpr e) {
  switch (e) {
    case AngleExpr::plus_alpha: return "+alpha";
    case AngleExpr::minus_alpha: return "-alpha";
    case AngleExpr::plus_beta: return "+beta";
    case AngleExpr::minus_beta: return "-beta";
    default: return "";
  }
}

// The 30 distinct orderings of [H, CNOT, CNOT, CRY, CRY], ascending.
std::vector<std::array<GateKind, 5>> kind_orderings() {
  std::array<int, 5> ranks = {0, 1, 1, 2, 2};
  std::vector<std::array<GateKind, 5>> out;
  do {
    std::array<GateKind, 5> seq;
    for (int i = 0; i < 5; ++i)
      seq[i] = ranks[i] == 0 ? GateKind::hadamard
                             : (ranks[i] == 1 ? GateKind::cnot : GateKind::cry);
    out.push_back(seq);
  } while (std::next_permutation(ranks.begin(), ranks.end()));
  return out;
}

}  // namespace

double resolve_angle(AngleExpr expr, const CloneParameters& params) {
  switch (expr) {
    case AngleExpr::plus_alpha: return params.alpha;
    case AngleExpr::minus_alpha: return -params.alpha;
    case AngleExpr::plus_beta: return params.beta;
    case AngleExpr::minus_beta: return -params.beta;
    default: throw std::invalid_argument("gate has no angle");
  }
}

Unitary gate_unitary(const Gate& gate, const CloneParameters& params) {
  switch (gate.kind) {
    case GateKind::hadamard: return hadamard();
    case GateKind::cnot: return cnot();
    case GateKind::cry: return controlled_ry(resolve_angle(gate.angle, params));
  }
  throw std::invalid_argument("unknown gate kind");
}

static std::vector<int> gate_targets(const Gate& g) {
  if (g.kind == GateKind::hadamard) return {g.target};
  return {g.control, g.target};
}

StateVector apply_circuit(const GateCircuit& circuit, double theta,
                          const StateVector& state) {
  const CloneParameters params = clone_angles(theta);
  StateVector psi = state;
  for (const Gate& g : circuit) psi = apply_gate(psi, gate_unitary(g, params), gate_targets(g));
  return psi;
}

Unitary circuit_unitary(const GateCircuit& circuit, double theta) {
  const CloneParameters params = clone_angles(theta);
  Unitary u = Unitary::Identity(8, 8);
  for (const Gate& g : circuit)
    u = embed_gate(3, gate_unitary(g, params), gate_targets(g)) * u;
  return u;
}

namespace {

struct GridPoint {
  // Embedded 8x8 gate matrices at this theta, indexed by enumeration choice.
  std::array<Unitary, 3> h;                   // H on qubit q
  std::array<Unitary, 6> cx;                  // CNOT on pair p
  std::array<std::array<Unitary, 4>, 6> cry;  // CRY on pair p with angle code a
  StateVector in_p, in_m, out_p, out_m;
};

GridPoint make_grid_point(double theta) {
  GridPoint g;
  const CloneParameters params = clone_angles(theta);
  for (int q = 0; q < 3; ++q) g.h[q] = embed_gate(3, hadamard(), {q});
  for (int p = 0; p < 6; ++p) {
    const auto [c, t] = kPairs[p];
    g.cx[p] = embed_gate(3, cnot(), {c, t});
    for (int a = 0; a < 4; ++a)
      g.cry[p][a] =
          embed_gate(3, controlled_ry(resolve_angle(kAngles[a], params)), {c, t});
  }
  g.in_p = input_state({theta, Sign::plus});
  g.in_m = input_state({theta, Sign::minus});
  g.out_p = target_output({theta, Sign::plus});
  g.out_m = target_output({theta, Sign::minus});
  return g;
}

struct Choice {
  int pair = -1;   // qubit (H) or pair index
  int angle = -1;  // angle code, CRY only
};

// Residual of one candidate at one grid point, sharing the + branch's phase
// with the - branch. Returns the worse of the two.
double candidate_residual(const std::array<Choice, 5>& choices,
                          const std::array<GateKind, 5>& kinds, const GridPoint& g,
                          Complex* phase_out = nullptr) {
  StateVector vp = g.in_p;
  for (int s = 0; s < 5; ++s) {
    const Choice& c = choices[s];
    const Unitary& m = kinds[s] == GateKind::hadamard
                           ? g.h[c.pair]
                           : (kinds[s] == GateKind::cnot ? g.cx[c.pair]
                                                         : g.cry[c.pair][c.angle]);
    vp = m * vp;
  }
  const Complex ov = g.out_p.dot(vp);
  const Complex phase = (std::abs(ov) > 1e-12) ? ov / std::abs(ov) : Complex{1, 0};
  if (phase_out) *phase_out = phase;
  double res = (vp - phase * g.out_p).norm();
  if (res > 0.5) return res;  // hopeless; skip the - branch

  StateVector vm = g.in_m;
  for (int s = 0; s < 5; ++s) {
    const Choice& c = choices[s];
    const Unitary& m = kinds[s] == GateKind::hadamard
                           ? g.h[c.pair]
                           : (kinds[s] == GateKind::cnot ? g.cx[c.pair]
                                                         : g.cry[c.pair][c.angle]);
    vm = m * vm;
  }
  return std::max(res, (vm - phase * g.out_m).norm());
}

GateCircuit materialize(const std::array<Choice, 5>& choices,
                        const std::array<GateKind, 5>& kinds) {
  GateCircuit circuit;
  for (int s = 0; s < 5; ++s) {
    Gate gate;
    gate.kind = kinds[s];
    if (kinds[s] == GateKind::hadamard) {
      gate.target = choices[s].pair;
    } else {
      gate.control = kPairs[choices[s].pair].first;
      gate.target = kPairs[choices[s].pair].second;
      if (kinds[s] == GateKind::cry) gate.angle = kAngles[choices[s].angle];
    }
    circuit.push_back(gate);
  }
  return circuit;
}

}  // namespace

LayoutSearchResult search_figure_layout(const std::vector<double>& theta_grid,
                                        double tol) {
  constexpr double kHalfPi = std::numbers::pi / 2;
  int interior = 0;
  for (double t : theta_grid)
    if (t > 1e-9 && t < kHalfPi - 1e-9) ++interior;
  if (interior < 3)
    throw std::invalid_argument(
        "layout search needs at least three interior theta values");

  std::vector<GridPoint> grid;
  grid.reserve(theta_grid.size());
  for (double t : theta_grid) grid.push_back(make_grid_point(t));

  LayoutSearchResult result;
  double nearest = std::numeric_limits<double>::infinity();
  std::array<Choice, 5> choices{};

  for (const auto& kinds : kind_orderings()) {
    // Nested per-slot loops, expressed as an explicit odometer so the five
    // slots stay in lexicographic order whatever the kind sequence is.
    std::array<int, 5> limit{};
    for (int s = 0; s < 5; ++s)
      limit[s] = kinds[s] == GateKind::hadamard ? 3 : (kinds[s] == GateKind::cnot ? 6 : 24);

    std::array<int, 5> odo{};
    bool done = false;
    while (!done) {
      bool valid = true;
      int first_cry_mag = -1;
      for (int s = 0; s < 5 && valid; ++s) {
        if (kinds[s] == GateKind::cry) {
          const int pair = odo[s] / 4, angle = odo[s] % 4;
          const int mag = angle / 2;
          if (first_cry_mag < 0)
            first_cry_mag = mag;
          else if (mag == first_cry_mag)
            valid = false;  // each angle magnitude used exactly once
          choices[s] = {pair, angle};
        } else {
          choices[s] = {odo[s], -1};
        }
      }

      if (valid) {
        ++result.candidates_checked;
        double worst = 0.0;
        for (const GridPoint& g : grid) {
          worst = std::max(worst, candidate_residual(choices, kinds, g));
          if (worst > tol) break;
        }
        if (worst <= tol) {
          result.found = true;
          result.circuit = materialize(choices, kinds);
          result.candidate_index = result.candidates_checked - 1;
          result.residual = worst;
          for (const GridPoint& g : grid) {
            Complex phase;
            candidate_residual(choices, kinds, g, &phase);
            result.phase.push_back(std::arg(phase));
          }
          return result;
        }
        if (worst < nearest) {
          nearest = worst;
          result.circuit = materialize(choices, kinds);
          result.candidate_index = result.candidates_checked - 1;
        }
      }

      for (int s = 4;; --s) {
        if (s < 0) { done = true; break; }
        if (++odo[s] < limit[s]) break;
        odo[s] = 0;
      }
    }
  }
  result.residual = nearest;
  return result;
}

double verify_layout(const GateCircuit& circuit, const std::vector<double>& theta_grid) {
  double worst = 0.0;
  for (double theta : theta_grid) {
    const StateVector vp = apply_circuit(circuit, theta, input_state({theta, Sign::plus}));
    const StateVector vm = apply_circuit(circuit, theta, input_state({theta, Sign::minus}));
    const StateVector op = target_output({theta, Sign::plus});
    const StateVector om = target_output({theta, Sign::minus});
    const Complex ov = op.dot(vp);
    const Complex phase = (std::abs(ov) > 1e-12) ? ov / std::abs(ov) : Complex{1, 0};
    worst = std::max({worst, (vp - phase * op).norm(), (vm - phase * om).norm()});
  }
  return worst;
}

std::string layout_to_text(const LayoutSearchResult& result,
                           const std::vector<double>& theta_grid, double tol) {
  std::ostringstream out;
  out.precision(17);
  out << "# pqcm-layout index=" << result.candidate_index << " grid=";
  for (size_t i = 0; i < theta_grid.size(); ++i)
    out << (i ? "," : "") << theta_grid[i];
  out << " tol=" << tol << "\n";
  out << "# phase per grid theta (radians):";
  for (double p : result.phase) out << " " << p;
  out << "\n";
  for (const Gate& g : result.circuit) {
    switch (g.kind) {
      case GateKind::hadamard: out << "H - " << g.target << "\n"; break;
      case GateKind::cnot: out << "CNOT " << g.control << " " << g.target << "\n"; break;
      case GateKind::cry:
        out << "CRY " << g.control << " " << g.target << " " << angle_token(g.angle)
            << "\n";
        break;
    }
  }
  return out.str();
}

void save_layout(const std::string& path, const LayoutSearchResult& result,
                 const std::vector<double>& theta_grid, double tol) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write layout file: " + path);
  f << layout_to_text(result, theta_grid, tol);
}

GateCircuit parse_layout(const std::string& text) {
  GateCircuit circuit;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string kind, control, target, angle;
    ls >> kind >> control >> target;
    Gate g;
    if (kind == "H") {
      g.kind = GateKind::hadamard;
      g.control = -1;
      g.target = std::stoi(target);
    } else if (kind == "CNOT" || kind == "CRY") {
      g.kind = kind == "CNOT" ? GateKind::cnot : GateKind::cry;
      g.control = std::stoi(control);
      g.target = std::stoi(target);
      if (g.kind == GateKind::cry) {
        ls >> angle;
        bool ok = false;
        for (AngleExpr e : kAngles)
          if (angle == angle_token(e)) { g.angle = e; ok = true; }
        if (!ok) throw std::runtime_error("bad CRY angle token: " + angle);
      }
    } else {
      throw std::runtime_error("bad gate kind in layout file: " + kind);
    }
    if (g.target < 0 || g.target > 2 || g.control > 2 || g.control == g.target)
      throw std::runtime_error("bad qubit indices in layout file");
    circuit.push_back(g);
  }
  if (circuit.empty()) throw std::runtime_error("layout file contains no gates");
  return circuit;
}

GateCircuit load_layout(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("missing layout cache: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_layout(buf.str());
}

}  // namespace pqcm
