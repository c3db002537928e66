#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phqfno/tensor.hpp"

namespace phqfno {

inline constexpr int kMaxQubits = 12;

/// Dense state vector over up to 12 qubits. Wire 0 is the leftmost bit of
/// the basis-state label, so |1000> on four wires is index 0b1000.
struct StateVector {
  int num_qubits = 0;
  std::vector<std::complex<double>> amp;

  static StateVector zero_state(int num_qubits);
  /// Basis state from a label like "0100" (wire 0 first).
  static StateVector basis_state(const std::string& label);

  double norm() const;
  std::size_t dim() const { return amp.size(); }
  /// Bit of wire `w` inside basis index `b`.
  bool wire_bit(std::size_t b, int w) const {
    return (b >> (num_qubits - 1 - w)) & 1u;
  }
  std::size_t wire_mask(int w) const { return std::size_t{1} << (num_qubits - 1 - w); }
};

enum class GateKind { PauliX, PauliZ, Phase, Rbs };

/// One gate application. RBS gates may reference a parameter slot, in which
/// case the applied angle is coeff * theta[slot]; fixed gates use `value`.
/// Phase gates store the phase angle phi in `value` and apply exp(i*phi) to
/// the |1> component of their wire. Controls make the gate act only on
/// basis states where every control wire is 1 (Z with one control is the
/// CZ kind, with two controls the CCZ kind).
struct Gate {
  GateKind kind = GateKind::PauliX;
  int wire0 = -1;
  int wire1 = -1;  // second target, RBS only
  std::vector<int> controls;
  int param_slot = -1;
  double coeff = 1.0;
  double value = 0.0;
};

struct RegisterSpec {
  std::string name;
  int start = 0;
  int width = 0;
};

/// Ordered gate list acting on named registers with contiguous wire ranges.
/// Parameter slot ids form a contiguous range [0, num_slots).
struct CircuitProgram {
  int num_wires = 0;
  int num_slots = 0;
  std::vector<Gate> gates;
  std::vector<RegisterSpec> registers;

  int find_register(const std::string& name) const;

  // builder helpers
  void x(int wire, std::vector<int> controls = {});
  void z(int wire, std::vector<int> controls = {});
  void phase(int wire, double phi);
  void rbs(int wire0, int wire1, double theta, std::vector<int> controls = {});
  void rbs_slot(int wire0, int wire1, int slot, double coeff = 1.0, std::vector<int> controls = {});
  void append(const CircuitProgram& other);

  /// Adjoint circuit: reversed gate order, RBS angles and phases negated.
  /// Parameter slots are preserved with flipped coefficients.
  CircuitProgram adjoint() const;
};

void apply_gate(StateVector& state, const Gate& gate, std::span<const double> theta = {});

/// Applies all gates in order. Throws on wire errors; preserves the norm.
StateVector run(const CircuitProgram& program, StateVector initial,
                std::span<const double> theta = {});

/// Squared magnitudes over the Hamming-weight-one basis combinations of the
/// given registers, shaped (width_0, width_1, ...) in register order.
/// `leaked` (if given) receives the probability mass outside that subspace;
/// mass above `leak_tol` throws.
Tensor measure_unary_probabilities(const StateVector& state,
                                   std::span<const RegisterSpec> registers,
                                   double* leaked = nullptr, double leak_tol = 1e-6);

/// Gradient of sum_i cotangent_i * p_i with respect to every parameter slot,
/// where p are the unary-basis probabilities measured on `registers`.
/// Computed by the adjoint (reverse unitary sweep) method.
std::vector<double> adjoint_gradient(const CircuitProgram& program, std::span<const double> theta,
                                     const StateVector& initial,
                                     std::span<const RegisterSpec> registers,
                                     const Tensor& cotangent);

/// Dense unitary of the program restricted to `dim` left-most wires being a
/// full space: columns are images of computational basis states. Test and
/// inspection helper for small wire counts.
std::vector<std::vector<std::complex<double>>> program_unitary(const CircuitProgram& program,
                                                               std::span<const double> theta = {});

}  // namespace phqfno
