#include "phqfno/variational.hpp"

#include <bit>
#include <stdexcept>

#include "phqfno/qft.hpp"

namespace phqfno {

int orthogonal_layer_params(int n) {
  int stages = log2_exact(static_cast<std::size_t>(n));
  return (n / 2) * stages;
}

CircuitProgram orthogonal_layer(int start, int n, int slot_base) {
  ButterflySchedule sched = butterfly_schedule(n);
  CircuitProgram prog;
  prog.num_wires = start + n;
  int slot = slot_base;
  for (const auto& stage : sched.stages)
    for (const ButterflyCross& c : stage)
      prog.rbs_slot(start + c.upper, start + c.lower, slot++);
  return prog;
}

CircuitProgram orthogonal_layer_adjoint_neg(int start, int n, int slot_base) {
  CircuitProgram p = orthogonal_layer(start, n, slot_base);
  CircuitProgram out;
  out.num_wires = p.num_wires;
  out.num_slots = p.num_slots;
  out.gates.assign(p.gates.rbegin(), p.gates.rend());
  return out;
}

Tensor effective_weight(int n, std::span<const double> theta) {
  const int expected = orthogonal_layer_params(n);
  if (static_cast<int>(theta.size()) != expected)
    throw std::invalid_argument("effective_weight: expected " + std::to_string(expected) +
                                " parameters for width " + std::to_string(n) + ", got " +
                                std::to_string(theta.size()));
  CircuitProgram prog = orthogonal_layer(0, n, 0);
  prog.append(orthogonal_layer_adjoint_neg(0, n, 0));
  Tensor w({static_cast<std::size_t>(n), static_cast<std::size_t>(n)});
  for (int s = 0; s < n; ++s) {
    StateVector sv = StateVector::zero_state(n);
    sv.amp[0] = {0.0, 0.0};
    sv.amp[sv.wire_mask(s)] = {1.0, 0.0};
    sv = run(prog, std::move(sv), theta);
    for (int i = 0; i < n; ++i)
      w(static_cast<std::size_t>(i), static_cast<std::size_t>(s)) =
          sv.amp[sv.wire_mask(i)].real();
  }
  return w;
}

std::vector<int> z_conjugation_wires(int n) {
  std::vector<int> s;
  for (int q = 0; q < n; ++q)
    if (std::popcount(static_cast<unsigned>(q)) % 2 == 1) s.push_back(q);
  return s;
}

namespace {

void append_z_layer(CircuitProgram& prog, const RegisterSpec& first,
                    const std::vector<int>& zwires, const std::vector<int>& controls) {
  for (int q : zwires) prog.z(first.start + q, controls);
}

}  // namespace

void append_cz_learning_block(CircuitProgram& prog, const RegisterSpec& first,
                              const RegisterSpec& modes, int K, int slot_base) {
  if (K < 0 || K > modes.width)
    throw std::invalid_argument("cz learning block: K = " + std::to_string(K) +
                                " out of range for a " + std::to_string(modes.width) +
                                "-wide mode register");
  const int d = orthogonal_layer_params(first.width);
  const std::vector<int> zwires = z_conjugation_wires(first.width);
  for (int kappa = 0; kappa < K; ++kappa) {
    const int ctrl = modes.start + kappa;
    const int base = slot_base + kappa * d;
    prog.x(ctrl);
    prog.append(orthogonal_layer(first.start, first.width, base));
    append_z_layer(prog, first, zwires, {ctrl});
    prog.append(orthogonal_layer_adjoint_neg(first.start, first.width, base));
    append_z_layer(prog, first, zwires, {ctrl});
    prog.x(ctrl);
  }
  prog.num_slots = std::max(prog.num_slots, slot_base + K * d);
}

void append_ccz_learning_block(CircuitProgram& prog, const RegisterSpec& first,
                               const RegisterSpec& rows, const RegisterSpec& cols, int Kx, int Ky,
                               int slot_base) {
  if (Kx < 0 || Kx > rows.width)
    throw std::invalid_argument("ccz learning block: Kx = " + std::to_string(Kx) +
                                " out of range for a " + std::to_string(rows.width) +
                                "-wide row register");
  if (Ky < 0 || Ky > cols.width)
    throw std::invalid_argument("ccz learning block: Ky = " + std::to_string(Ky) +
                                " out of range for a " + std::to_string(cols.width) +
                                "-wide column register");
  const int d = orthogonal_layer_params(first.width);
  const std::vector<int> zwires = z_conjugation_wires(first.width);
  int mode = 0;
  for (int kx = 0; kx < Kx; ++kx) {
    for (int ky = 0; ky < Ky; ++ky, ++mode) {
      const int cr = rows.start + kx;
      const int cc = cols.start + ky;
      const int base = slot_base + mode * d;
      prog.x(cr);
      prog.x(cc);
      // Composite controlled-Z layer: fires once on branches differing in one
      // of the two mode wires and three times (net once) when both differ, so
      // every non-selected branch sees an odd number of Z layers.
      auto composite = [&] {
        append_z_layer(prog, first, zwires, {cr, cc});
        append_z_layer(prog, first, zwires, {cr});
        append_z_layer(prog, first, zwires, {cc});
      };
      prog.append(orthogonal_layer(first.start, first.width, base));
      composite();
      prog.append(orthogonal_layer_adjoint_neg(first.start, first.width, base));
      composite();
      prog.x(cr);
      prog.x(cc);
    }
  }
  prog.num_slots = std::max(prog.num_slots, slot_base + Kx * Ky * d);
}

}  // namespace phqfno
