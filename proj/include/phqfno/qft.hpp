#pragma once

#include <cstddef>
#include <vector>

#include "phqfno/statevector.hpp"

namespace phqfno {

/// Bit-reversal permutation for power-of-two n: index i maps to the integer
/// whose log2(n)-bit binary representation is reversed. An involution that
/// fixes 0 and n-1.
std::vector<std::size_t> bit_reversal(std::size_t n);

bool is_power_of_two(std::size_t n);
int log2_exact(std::size_t n);

/// One radix-2 cross of the butterfly: a phase gate on one wire of the pair
/// followed by RBS(pi/4). Realizes (a, b) -> ((a + w b)/sqrt2, (a - w b)/sqrt2)
/// on the unary amplitudes of (upper, lower) with twiddle w = exp(2*pi*i*k/m).
struct ButterflyCross {
  int upper = 0;
  int lower = 0;
  double phi = 0.0;  // phase applied to the lower wire
};

/// Butterfly schedule mirroring the classical Cooley-Tukey stages:
/// log2(n) stages of n/2 crosses each, twiddle exponents generated from the
/// radix-2 recurrence.
struct ButterflySchedule {
  int n = 0;
  std::vector<std::vector<ButterflyCross>> stages;
};

ButterflySchedule butterfly_schedule(int n);

/// Unary QFT circuit fragment on wires [wire_start, wire_start + n). Acting
/// on a bit-reversal-permuted unary input sum_i x_{rev(i)} |e_i>, produces
/// the unitary DFT sum_i xhat_i |e_i> with kernel exp(+2*pi*i*jk/n)/sqrt(n).
/// The inverse flag emits the adjoint circuit.
CircuitProgram qft_fragment(int wire_start, int n, bool inverse = false);

/// Row-wise QFT for a two-register state (registers[0] = rows, registers[1]
/// = columns): transforms the column register, i.e. the DFT of each row.
/// The input must be encoded with column indices bit-reversal-permuted.
StateVector qft_rowwise_2d(StateVector state, std::span<const RegisterSpec> registers,
                           bool inverse = false);

/// 2-D QFT for a three-register state (registers[0] = slices, registers[1]
/// and registers[2] the two transformed dimensions). Both transformed
/// dimensions must be pre-permuted.
StateVector qft_2d_on_3d(StateVector state, std::span<const RegisterSpec> registers,
                         bool inverse = false);

}  // namespace phqfno
