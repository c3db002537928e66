#pragma once

#include <span>

#include "phqfno/statevector.hpp"
#include "phqfno/tensor.hpp"

namespace phqfno {

/// Parameter count of the quantum orthogonal layer on n wires:
/// D = (n/2) * log2(n). n must be a power of two >= 2.
int orthogonal_layer_params(int n);

/// Quantum orthogonal layer P(theta): RBS gates in butterfly topology on
/// wires [start, start + n). Restricted to the unary subspace it acts as an
/// n x n orthogonal matrix. Slots [slot_base, slot_base + D).
CircuitProgram orthogonal_layer(int start, int n, int slot_base);

/// P^dagger(-theta): the same gates in reversed order (RBS(-t)^dagger =
/// RBS(t), so the angles enter with coefficient +1).
CircuitProgram orthogonal_layer_adjoint_neg(int start, int n, int slot_base);

/// Effective weight W^Q(theta) = P^dagger(-theta) P(theta) restricted to the
/// unary subspace, as an n x n real matrix with W(i, s) = <e_i|W^Q|e_s>.
Tensor effective_weight(int n, std::span<const double> theta);

/// Wires of the first register receiving the conjugation Z gates: indices of
/// odd parity. Every butterfly RBS pair differs in exactly one bit, so this
/// set hits each pair exactly once and flips every angle under conjugation.
std::vector<int> z_conjugation_wires(int n);

/// Appends the 2-D learning block: for each mode kappa < K, an X on the mode
/// register wire kappa, the sandwich P(theta) C_Z P^dagger(-theta) C_Z with
/// Z gates on the first register controlled by that wire, and the restoring
/// X. Acts as W^Q(theta_kappa) on mode kappa and as the identity elsewhere.
/// Slots: [slot_base, slot_base + K*D), D per mode.
void append_cz_learning_block(CircuitProgram& prog, const RegisterSpec& first,
                              const RegisterSpec& modes, int K, int slot_base);

/// Appends the 3-D learning block: modes (kx < Kx, ky < Ky) over the row and
/// column registers, with the composite double/single-controlled Z layer that
/// applies an odd number of Z layers on every non-selected branch.
/// Slots: [slot_base, slot_base + Kx*Ky*D), row-major over (kx, ky).
void append_ccz_learning_block(CircuitProgram& prog, const RegisterSpec& first,
                               const RegisterSpec& rows, const RegisterSpec& cols, int Kx, int Ky,
                               int slot_base);

}  // namespace phqfno
