#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "phqfno/adam.hpp"
#include "phqfno/autodiff.hpp"
#include "phqfno/statevector.hpp"

namespace phqfno {

/// Latent partition configuration (the Table-I axis): d_v lifted channels,
/// of which quantum_groups groups of d_v_q are processed by the quantum
/// Fourier layer and the remaining d_v_c by the classical one.
struct HybridConfig {
  int dim = 1;             // spatial dimensionality of the problem (1 or 2)
  int grid = 8;            // points per axis
  int d_v = 4;             // lifted channel count
  int d_v_q = 4;           // quantum channels per group (0, 2 or 4)
  int quantum_groups = 1;  // sequential quantum groups (1-D only; "4x3" -> 3)
  int modes = 1;           // K, 1-D
  int modes_x = 1;         // Kx, 2-D
  int modes_y = 1;         // Ky, 2-D
  int conv_kernel = 1;     // bypass/global convolution extent (odd)
  int proj_hidden = 32;    // hidden width of the 2-D projection network

  int quantum_share() const { return d_v_q == 0 ? 0 : d_v_q * quantum_groups; }
  int d_v_c() const { return d_v - quantum_share(); }
  /// Quantum share as an integer percentage of d_v (Table-I labels).
  int hybridization_percent() const;
  int input_channels() const { return dim + 1; }
  void validate() const;

  std::string to_canonical_json() const;
  static HybridConfig from_json_string(const std::string& text);
};

/// Probability output of a fixed circuit structure as a recorded tensor op:
/// forward runs the simulator from |0...0>, backward is the adjoint sweep.
/// The output shape follows the program's register widths in order.
Var circuit_probs_op(Var theta, std::shared_ptr<const CircuitProgram> program);

/// Appends u with uniform grid coordinates on [0,1) as trailing channels.
Tensor with_coords_1d(const Tensor& u);   // (n) -> (n, 2)
Tensor with_coords_2d(const Tensor& w);   // (n, n) -> (n, n, 3)

/// The assembled PH-QFNO: lifting, channel partition, quantum and classical
/// Fourier branches, concatenation and projection.
class PhqfnoModel {
 public:
  static PhqfnoModel init(const HybridConfig& cfg, std::uint64_t seed);

  const HybridConfig& config() const { return cfg_; }
  NamedTensors& params() { return params_; }
  const NamedTensors& params() const { return params_; }

  /// Forward pass of one sample. Input (n, 2) for 1-D and (n, n, 3) for
  /// 2-D, coordinate channels included; output (n) resp. (n, n).
  Var forward(Tape& tape, const Tensor& input) const;
  Tensor forward_value(const Tensor& input) const;

  /// Branch outputs from a lifted field (grid x d_v), for the noise sweep
  /// and branch-level tests. The quantum branch concatenates all group /
  /// subblock outputs; the classical branch is the classical Fourier layer.
  Var quantum_branch(Tape& tape, Var lifted) const;
  Var classical_branch(Tape& tape, Var lifted) const;
  Var lift(Tape& tape, Var input2d) const;

  /// Trainable angle count of the quantum learning blocks (all groups or
  /// subblocks) and complex parameter count of the classical spectral
  /// weights.
  int quantum_learning_param_count() const;
  int classical_learning_param_count() const;

  /// Classical-FNO reference forward: the standalone composition without
  /// the partitioning machinery. Only valid for fully classical configs.
  Var classical_reference_forward(Tape& tape, const Tensor& input) const;

 private:
  HybridConfig cfg_;
  NamedTensors params_;
  std::shared_ptr<const CircuitProgram> qprog_;  // per-group / per-subblock structure
  std::vector<std::size_t> spatial_perm_;        // bit reversal on the grid axis (1-D)
  std::vector<std::size_t> block_perm_;          // bit reversal on a 4-point axis (2-D)

  /// Binds every parameter to the tape in declaration order, so gradient
  /// indices always align with params() regardless of downstream use.
  std::vector<Var> bind_all(Tape& tape) const;
  Var bound(const std::vector<Var>& vars, const std::string& name) const;
  Var quantum_branch_bound(const std::vector<Var>& vars, Var lifted) const;
  Var classical_branch_bound(const std::vector<Var>& vars, Var lifted) const;
  Var quantum_group_1d(Var lifted, int group, Var theta_learn) const;
  Var quantum_subblock_2d(Var block, Var theta_learn) const;
  friend PhqfnoModel load_checkpoint_model(const std::string& path, std::string* extra_json);
};

/// Versioned binary checkpoint: magic, version, canonical-JSON header
/// (config plus caller extras), then named little-endian f64 parameter
/// blobs.
void save_checkpoint(const std::string& path, const PhqfnoModel& model,
                     const std::string& extra_json = "{}");
PhqfnoModel load_checkpoint_model(const std::string& path, std::string* extra_json = nullptr);

}  // namespace phqfno
