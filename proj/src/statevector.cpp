#include "phqfno/statevector.hpp"

#include <cmath>
#include <stdexcept>

namespace phqfno {

namespace {

void check_wire(int wire, int num_wires, const char* what) {
  if (wire < 0 || wire >= num_wires)
    throw std::invalid_argument(std::string(what) + " wire " + std::to_string(wire) +
                                " out of range [0," + std::to_string(num_wires) + ")");
}

void check_gate(const Gate& g, int num_wires) {
  check_wire(g.wire0, num_wires, "target");
  if (g.kind == GateKind::Rbs) {
    check_wire(g.wire1, num_wires, "target");
    if (g.wire0 == g.wire1) throw std::invalid_argument("RBS gate with duplicate wires");
  }
  for (int c : g.controls) {
    check_wire(c, num_wires, "control");
    if (c == g.wire0 || (g.kind == GateKind::Rbs && c == g.wire1))
      throw std::invalid_argument("control wire duplicates a target wire");
  }
}

double resolve_angle(const Gate& g, std::span<const double> theta) {
  if (g.param_slot < 0) return g.value;
  if (g.param_slot >= static_cast<int>(theta.size()))
    throw std::invalid_argument("gate references parameter slot " + std::to_string(g.param_slot) +
                                " but only " + std::to_string(theta.size()) + " values supplied");
  return g.coeff * theta[static_cast<std::size_t>(g.param_slot)];
}

}  // namespace

StateVector StateVector::zero_state(int num_qubits) {
  if (num_qubits < 1 || num_qubits > kMaxQubits)
    throw std::invalid_argument("StateVector: qubit count " + std::to_string(num_qubits) +
                                " outside [1," + std::to_string(kMaxQubits) + "]");
  StateVector s;
  s.num_qubits = num_qubits;
  s.amp.assign(std::size_t{1} << num_qubits, {0.0, 0.0});
  s.amp[0] = {1.0, 0.0};
  return s;
}

StateVector StateVector::basis_state(const std::string& label) {
  StateVector s = zero_state(static_cast<int>(label.size()));
  s.amp[0] = {0.0, 0.0};
  std::size_t idx = 0;
  for (char c : label) {
    idx <<= 1;
    if (c == '1')
      idx |= 1;
    else if (c != '0')
      throw std::invalid_argument("basis_state: label must be binary, got '" + label + "'");
  }
  s.amp[idx] = {1.0, 0.0};
  return s;
}

double StateVector::norm() const {
  double s = 0.0;
  for (const auto& a : amp) s += std::norm(a);
  return std::sqrt(s);
}

int CircuitProgram::find_register(const std::string& name) const {
  for (std::size_t i = 0; i < registers.size(); ++i)
    if (registers[i].name == name) return static_cast<int>(i);
  return -1;
}

void CircuitProgram::x(int wire, std::vector<int> controls) {
  gates.push_back(Gate{GateKind::PauliX, wire, -1, std::move(controls), -1, 1.0, 0.0});
}

void CircuitProgram::z(int wire, std::vector<int> controls) {
  gates.push_back(Gate{GateKind::PauliZ, wire, -1, std::move(controls), -1, 1.0, 0.0});
}

void CircuitProgram::phase(int wire, double phi) {
  gates.push_back(Gate{GateKind::Phase, wire, -1, {}, -1, 1.0, phi});
}

void CircuitProgram::rbs(int wire0, int wire1, double theta, std::vector<int> controls) {
  gates.push_back(Gate{GateKind::Rbs, wire0, wire1, std::move(controls), -1, 1.0, theta});
}

void CircuitProgram::rbs_slot(int wire0, int wire1, int slot, double coeff,
                              std::vector<int> controls) {
  if (slot < 0) throw std::invalid_argument("rbs_slot: negative slot");
  gates.push_back(Gate{GateKind::Rbs, wire0, wire1, std::move(controls), slot, coeff, 0.0});
  if (slot >= num_slots) num_slots = slot + 1;
}

void CircuitProgram::append(const CircuitProgram& other) {
  for (const Gate& g : other.gates) gates.push_back(g);
  num_slots = std::max(num_slots, other.num_slots);
}

CircuitProgram CircuitProgram::adjoint() const {
  CircuitProgram out;
  out.num_wires = num_wires;
  out.num_slots = num_slots;
  out.registers = registers;
  out.gates.reserve(gates.size());
  for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
    Gate g = *it;
    if (g.kind == GateKind::Rbs || g.kind == GateKind::Phase) {
      g.coeff = -g.coeff;
      g.value = -g.value;
    }
    out.gates.push_back(std::move(g));
  }
  return out;
}

void apply_gate(StateVector& state, const Gate& gate, std::span<const double> theta) {
  check_gate(gate, state.num_qubits);
  const std::size_t dim = state.dim();
  std::size_t cmask = 0;
  for (int c : gate.controls) cmask |= state.wire_mask(c);
  const std::size_t m0 = state.wire_mask(gate.wire0);

  switch (gate.kind) {
    case GateKind::PauliX: {
      for (std::size_t b = 0; b < dim; ++b) {
        if ((b & m0) || (b & cmask) != cmask) continue;
        std::swap(state.amp[b], state.amp[b | m0]);
      }
      break;
    }
    case GateKind::PauliZ: {
      for (std::size_t b = 0; b < dim; ++b)
        if ((b & m0) && (b & cmask) == cmask) state.amp[b] = -state.amp[b];
      break;
    }
    case GateKind::Phase: {
      const std::complex<double> w = std::polar(1.0, resolve_angle(gate, theta));
      for (std::size_t b = 0; b < dim; ++b)
        if ((b & m0) && (b & cmask) == cmask) state.amp[b] *= w;
      break;
    }
    case GateKind::Rbs: {
      const double angle = resolve_angle(gate, theta);
      const double c = std::cos(angle), s = std::sin(angle);
      const std::size_t m1 = state.wire_mask(gate.wire1);
      for (std::size_t b = 0; b < dim; ++b) {
        // b is the |10> component of the pair (wire0 hot), partner is |01>.
        if (!(b & m0) || (b & m1) || (b & cmask) != cmask) continue;
        const std::size_t p = (b ^ m0) | m1;
        const std::complex<double> a10 = state.amp[b];
        const std::complex<double> a01 = state.amp[p];
        state.amp[b] = c * a10 - s * a01;
        state.amp[p] = s * a10 + c * a01;
      }
      break;
    }
  }
}

StateVector run(const CircuitProgram& program, StateVector initial, std::span<const double> theta) {
  if (program.num_wires > initial.num_qubits)
    throw std::invalid_argument("run: program uses " + std::to_string(program.num_wires) +
                                " wires but state has " + std::to_string(initial.num_qubits));
  for (const Gate& g : program.gates) apply_gate(initial, g, theta);
  return initial;
}

namespace {

// Walks every unary index combination of the registers in row-major order.
template <typename Fn>
void for_each_unary(const StateVector& state, std::span<const RegisterSpec> regs, Fn&& fn) {
  std::vector<std::size_t> idx(regs.size(), 0);
  std::size_t total = 1;
  for (const auto& r : regs) total *= static_cast<std::size_t>(r.width);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    std::size_t basis = 0;
    for (std::size_t r = regs.size(); r-- > 0;) {
      idx[r] = rem % static_cast<std::size_t>(regs[r].width);
      rem /= static_cast<std::size_t>(regs[r].width);
      basis |= state.wire_mask(regs[r].start + static_cast<int>(idx[r]));
    }
    fn(flat, basis);
  }
}

}  // namespace

Tensor measure_unary_probabilities(const StateVector& state, std::span<const RegisterSpec> registers,
                                   double* leaked, double leak_tol) {
  if (registers.empty())
    throw std::invalid_argument("measure_unary_probabilities: no registers given");
  std::vector<std::size_t> shape;
  for (const auto& r : registers) {
    if (r.start < 0 || r.width <= 0 || r.start + r.width > state.num_qubits)
      throw std::invalid_argument("measure_unary_probabilities: register '" + r.name +
                                  "' outside the state");
    shape.push_back(static_cast<std::size_t>(r.width));
  }
  Tensor probs(shape);
  double unary_mass = 0.0;
  for_each_unary(state, registers, [&](std::size_t flat, std::size_t basis) {
    double p = std::norm(state.amp[basis]);
    probs.data[flat] = p;
    unary_mass += p;
  });
  double total = 0.0;
  for (const auto& a : state.amp) total += std::norm(a);
  double leak = std::max(0.0, total - unary_mass);
  if (leaked) *leaked = leak;
  if (leak > leak_tol)
    throw std::runtime_error("measure_unary_probabilities: " + std::to_string(leak) +
                             " probability mass outside the unary subspace (tolerance " +
                             std::to_string(leak_tol) + "); circuit is not unary-preserving");
  return probs;
}

namespace {

Gate daggered(const Gate& g) {
  Gate d = g;
  if (d.kind == GateKind::Rbs || d.kind == GateKind::Phase) {
    d.coeff = -d.coeff;
    d.value = -d.value;
  }
  return d;
}

// tmp = dU/d(angle) |psi> for an RBS gate, zero outside the active subspace.
void apply_rbs_derivative(const StateVector& psi, const Gate& gate, double angle,
                          StateVector& tmp) {
  const double c = std::cos(angle), s = std::sin(angle);
  std::size_t cmask = 0;
  for (int w : gate.controls) cmask |= psi.wire_mask(w);
  const std::size_t m0 = psi.wire_mask(gate.wire0);
  const std::size_t m1 = psi.wire_mask(gate.wire1);
  tmp.num_qubits = psi.num_qubits;
  tmp.amp.assign(psi.dim(), {0.0, 0.0});
  for (std::size_t b = 0; b < psi.dim(); ++b) {
    if (!(b & m0) || (b & m1) || (b & cmask) != cmask) continue;
    const std::size_t p = (b ^ m0) | m1;
    const std::complex<double> a10 = psi.amp[b];
    const std::complex<double> a01 = psi.amp[p];
    tmp.amp[b] = -s * a10 - c * a01;
    tmp.amp[p] = c * a10 - s * a01;
  }
}

}  // namespace

std::vector<double> adjoint_gradient(const CircuitProgram& program, std::span<const double> theta,
                                     const StateVector& initial,
                                     std::span<const RegisterSpec> registers,
                                     const Tensor& cotangent) {
  std::vector<double> grad(static_cast<std::size_t>(program.num_slots), 0.0);
  StateVector psi = run(program, initial, theta);

  // lambda = O |psi> with O the diagonal observable sum_i w_i |u_i><u_i|
  // built from the probability cotangents.
  StateVector lambda;
  lambda.num_qubits = psi.num_qubits;
  lambda.amp.assign(psi.dim(), {0.0, 0.0});
  std::size_t expect = 1;
  for (const auto& r : registers) expect *= static_cast<std::size_t>(r.width);
  if (cotangent.numel() != expect)
    throw std::invalid_argument("adjoint_gradient: cotangent has " +
                                std::to_string(cotangent.numel()) + " entries, expected " +
                                std::to_string(expect));
  for_each_unary(psi, registers, [&](std::size_t flat, std::size_t basis) {
    lambda.amp[basis] = cotangent.data[flat] * psi.amp[basis];
  });

  for (auto it = program.gates.rbegin(); it != program.gates.rend(); ++it) {
    const Gate& g = *it;
    Gate inv = daggered(g);
    apply_gate(psi, inv, theta);  // psi is now the state before gate g
    if (g.kind == GateKind::Rbs && g.param_slot >= 0) {
      static thread_local StateVector tmp;
      apply_rbs_derivative(psi, g, resolve_angle(g, theta), tmp);
      double acc = 0.0;
      for (std::size_t b = 0; b < psi.dim(); ++b)
        acc += std::real(std::conj(lambda.amp[b]) * tmp.amp[b]);
      grad[static_cast<std::size_t>(g.param_slot)] += g.coeff * 2.0 * acc;
    }
    apply_gate(lambda, inv, theta);
  }
  return grad;
}

std::vector<std::vector<std::complex<double>>> program_unitary(const CircuitProgram& program,
                                                               std::span<const double> theta) {
  const int n = program.num_wires;
  const std::size_t dim = std::size_t{1} << n;
  std::vector<std::vector<std::complex<double>>> u(dim, std::vector<std::complex<double>>(dim));
  for (std::size_t col = 0; col < dim; ++col) {
    StateVector s = StateVector::zero_state(n);
    s.amp[0] = {0.0, 0.0};
    s.amp[col] = {1.0, 0.0};
    s = run(program, std::move(s), theta);
    for (std::size_t row = 0; row < dim; ++row) u[row][col] = s.amp[row];
  }
  return u;
}

}  // namespace phqfno
