#pragma once

#include <span>
#include <utility>
#include <vector>

#include "phqfno/autodiff.hpp"
#include "phqfno/statevector.hpp"
#include "phqfno/tensor.hpp"

namespace phqfno {

/// Rotation angles loading a unit vector into the unary basis:
/// x_0 = cos t_0, x_k = cos t_k * prod_{j<k} sin t_j, x_{n-1} = prod sin t_j.
/// Computed by a backward recursion over suffix norms with atan2, so every
/// real unit vector (negative tails included) is exactly representable.
/// Throws unless ||x|| = 1 within 1e-12.
std::vector<double> encoding_angles(std::span<const double> x);

/// Same recursion without the unit-norm check; the angles only depend on the
/// direction of x, so any nonzero scaling gives identical angles. An all-zero
/// input yields all-zero angles.
std::vector<double> encoding_angles_unchecked(std::span<const double> x);

/// Amplitudes reconstructed from a set of encoding angles (test oracle for
/// the recursion; length = angles.size() + 1).
std::vector<double> angles_to_amplitudes(std::span<const double> angles);

/// Circuit plan whose RBS angles are parameter slots, for the differentiable
/// model path. Slot layout per builder below.
struct EncodingPlan {
  CircuitProgram program;
  std::vector<RegisterSpec> registers;
};

/// 1-D loader on n wires: one X gate and n-1 chained RBS gates,
/// slots [0, n-1).
EncodingPlan encode_1d_plan(int n);

/// 2-D loader for an m x n matrix on registers (rows m, cols n). Row norms
/// are loaded into the row register, then every row is written by a seed
/// CNOT plus a controlled-RBS chain conditioned on that row's wire.
/// Slots: [0, m-1) row-norm angles, then (n-1) angles per row.
EncodingPlan encode_2d_plan(int m, int n);

/// 3-D loader for an m x n x k tensor with entries y[i][j][l] on registers
/// (slices k, cols n, rows m). Slice Frobenius norms are loaded into the
/// first register; each slice's 2-D load is made branch-exact by an
/// adjoint/load sandwich around its seed.
/// Slots: [0, k-1) slice-norm angles, then per slice the 2-D layout.
EncodingPlan encode_3d_plan(int m, int n, int k);

std::vector<double> encode_1d_slots(std::span<const double> x);
std::vector<double> encode_2d_slots(const Tensor& X);
std::vector<double> encode_3d_slots(const Tensor& Y);

/// Fully materialized encoder circuits (fixed angles) plus the stored norm.
/// Throw on all-zero input. encode_2d skips loader blocks of zero rows; they
/// act on branches that carry no amplitude.
std::pair<CircuitProgram, double> encode_1d(std::span<const double> x);
std::pair<CircuitProgram, double> encode_2d(const Tensor& X);
std::pair<CircuitProgram, double> encode_3d(const Tensor& Y);

/// Inverse of the encoding for measured probabilities: norm * sqrt(p) per
/// index (magnitudes; measurement discards signs). Probabilities below
/// -1e-12 throw; small negative values clamp to zero.
Tensor decode_unary(const Tensor& probabilities, double stored_norm);

/// Tape op: encoding angles of a vector (shape (n) -> (n-1)), differentiable
/// in the vector. Matches encoding_angles_unchecked.
Var encoding_angles_op(Var x);

}  // namespace phqfno
