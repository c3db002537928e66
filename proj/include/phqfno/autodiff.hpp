#pragma once

#include <functional>
#include <string>
#include <vector>

#include "phqfno/tensor.hpp"

namespace phqfno {

class Tape;

/// Handle to a tensor recorded on a tape. A Var with a valid id belongs to
/// exactly one tape; plain constants enter through Tape::constant.
struct Var {
  int id = -1;
  Tape* tape = nullptr;
  bool valid() const { return id >= 0 && tape != nullptr; }
};

/// Reverse-mode tape over dense real tensors. Forward values are computed
/// eagerly as operations are recorded; backward() replays the recorded
/// operations in reverse, accumulating gradients.
///
/// A tape is single-threaded. Parameters are plain tensors that may be
/// copied between workers; they are bound to a tape per forward pass via
/// param().
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Tensor&)>;
  using ComputeFn = std::function<Tensor(const Tape&)>;

  Var constant(Tensor value);
  /// Registers a parameter leaf. Gradients for parameters are kept by
  /// backward(); registration order defines the index in param_grads().
  Var param(const Tensor& value);

  /// Records an operation with an eagerly computed forward value. `backward`
  /// receives the output cotangent and must accumulate into the inputs;
  /// `compute` recomputes the forward value from current input values and is
  /// used by replay().
  Var record(const std::string& op_kind, const std::vector<Var>& inputs, Tensor value,
             BackwardFn backward, ComputeFn compute);

  const Tensor& value(Var v) const { return value(v.id); }
  const Tensor& value(int id) const;

  /// Reverse sweep from a scalar loss. Gradients of all nodes are
  /// accumulated; anything that is not a parameter can be discarded by the
  /// caller. Throws if `loss` is not scalar-shaped.
  void backward(Var loss);

  bool has_grad(int id) const;
  const Tensor& grad(Var v) const;
  /// Parameter gradients aligned with registration order. Parameters that
  /// did not participate in the loss get zero tensors of matching shape.
  std::vector<Tensor> param_grads() const;
  std::size_t num_params() const { return param_nodes_.size(); }

  void accumulate_grad(int id, const Tensor& g);
  void accumulate_grad(int id, Tensor&& g);

  /// Recomputes every node value from the leaves in recorded order and
  /// returns the new values. Replaying a tape is bit-deterministic.
  std::vector<Tensor> replay() const;

  std::size_t size() const { return nodes_.size(); }
  const std::string& op_kind(int id) const { return nodes_[id].op; }

 private:
  struct Node {
    std::string op;
    std::vector<int> inputs;
    Tensor value;
    BackwardFn backward;
    ComputeFn compute;
    int param_index = -1;
  };
  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
  std::vector<char> grad_set_;
  std::vector<int> param_nodes_;
};

// ---- Recorded operations ------------------------------------------------
// Shape mismatches throw std::invalid_argument naming the op kind and the
// offending shapes.

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);                    // elementwise
Var scale(Var a, double c);
Var scalar_mul(Var a, Var s);             // s is scalar-shaped, broadcast over a
Var matmul(Var a, Var b);                 // (m,k) x (k,n) -> (m,n)
Var add_rowvec(Var a, Var v);             // (m,n) + (n) broadcast over rows
Var reshape(Var a, std::vector<std::size_t> shape);
Var transpose(Var a);                     // 2-D
Var gather(Var a, std::size_t axis, std::vector<std::size_t> indices);
Var concat(const std::vector<Var>& parts, std::size_t axis);
Var reduce_sum(Var a);                    // -> scalar
Var gelu(Var a);                          // exact erf form
Var sqrt_shifted(Var a, double eps);      // sqrt(max(a, 0) + eps)
Var row_norms(Var a);                     // (m,n) -> (m)
Var frob_norm(Var a);                     // -> scalar
Var relative_l2(Var pred, Var truth);     // ||p - t|| / ||t||, scalar
Var complex_mul(Var a, Var b);            // packed (2,...) elementwise complex product

}  // namespace phqfno
