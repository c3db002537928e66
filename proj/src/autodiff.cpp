#include "phqfno/autodiff.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace phqfno {

namespace {

[[noreturn]] void shape_error(const std::string& op, const std::string& detail) {
  throw std::invalid_argument("op '" + op + "': " + detail);
}

Tape& same_tape(const std::string& op, std::initializer_list<Var> vars) {
  Tape* t = nullptr;
  for (const Var& v : vars) {
    if (!v.valid()) shape_error(op, "invalid operand");
    if (t && v.tape != t) shape_error(op, "operands belong to different tapes");
    t = v.tape;
  }
  return *t;
}

}  // namespace

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{"constant", {}, std::move(value), nullptr, nullptr, -1});
  return Var{static_cast<int>(nodes_.size() - 1), this};
}

Var Tape::param(const Tensor& value) {
  Node n{"param", {}, value, nullptr, nullptr, static_cast<int>(param_nodes_.size())};
  nodes_.push_back(std::move(n));
  param_nodes_.push_back(static_cast<int>(nodes_.size() - 1));
  return Var{static_cast<int>(nodes_.size() - 1), this};
}

Var Tape::record(const std::string& op_kind, const std::vector<Var>& inputs, Tensor value,
                 BackwardFn backward, ComputeFn compute) {
  std::vector<int> ids;
  ids.reserve(inputs.size());
  for (const Var& v : inputs) {
    if (!v.valid() || v.tape != this)
      throw std::invalid_argument("op '" + op_kind + "': input not on this tape");
    ids.push_back(v.id);
  }
  nodes_.push_back(
      Node{op_kind, std::move(ids), std::move(value), std::move(backward), std::move(compute), -1});
  return Var{static_cast<int>(nodes_.size() - 1), this};
}

const Tensor& Tape::value(int id) const {
  if (id < 0 || id >= static_cast<int>(nodes_.size()))
    throw std::out_of_range("Tape::value: bad node id");
  return nodes_[static_cast<std::size_t>(id)].value;
}

void Tape::accumulate_grad(int id, const Tensor& g) {
  if (!grad_set_[id]) {
    grads_[id] = g;
    grad_set_[id] = 1;
    return;
  }
  Tensor& acc = grads_[id];
  for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += g.data[i];
}

void Tape::accumulate_grad(int id, Tensor&& g) {
  if (!grad_set_[id]) {
    grads_[id] = std::move(g);
    grad_set_[id] = 1;
    return;
  }
  Tensor& acc = grads_[id];
  for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += g.data[i];
}

void Tape::backward(Var loss) {
  if (!loss.valid() || loss.tape != this)
    throw std::invalid_argument("backward: loss is not on this tape");
  if (value(loss).numel() != 1)
    throw std::invalid_argument("backward: loss must be scalar-shaped, got " +
                                shape_to_string(value(loss).shape));
  grads_.assign(nodes_.size(), Tensor{});
  grad_set_.assign(nodes_.size(), 0);
  accumulate_grad(loss.id, Tensor({1}, {1.0}));
  for (int id = loss.id; id >= 0; --id) {
    if (!grad_set_[id]) continue;
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.backward) n.backward(*this, grads_[id]);
  }
}

bool Tape::has_grad(int id) const {
  return id >= 0 && id < static_cast<int>(grad_set_.size()) && grad_set_[id];
}

const Tensor& Tape::grad(Var v) const {
  static const Tensor kEmpty;
  if (!has_grad(v.id)) return kEmpty;
  return grads_[static_cast<std::size_t>(v.id)];
}

std::vector<Tensor> Tape::param_grads() const {
  std::vector<Tensor> out;
  out.reserve(param_nodes_.size());
  for (int id : param_nodes_) {
    if (has_grad(id))
      out.push_back(grads_[static_cast<std::size_t>(id)]);
    else
      out.push_back(Tensor(nodes_[static_cast<std::size_t>(id)].value.shape));
  }
  return out;
}

std::vector<Tensor> Tape::replay() const {
  std::vector<Tensor> out;
  out.reserve(nodes_.size());
  for (const Node& n : nodes_) {
    if (n.compute)
      out.push_back(n.compute(*this));
    else
      out.push_back(n.value);
  }
  return out;
}

// ---- ops ------------------------------------------------------------------

namespace {

Var binary_elementwise(const std::string& kind, Var a, Var b,
                       double (*fwd)(double, double),
                       void (*bwd)(double, double, double, double&, double&)) {
  Tape& t = same_tape(kind, {a, b});
  const Tensor& A = t.value(a);
  const Tensor& B = t.value(b);
  if (!A.same_shape(B))
    shape_error(kind, "shape mismatch " + shape_to_string(A.shape) + " vs " +
                          shape_to_string(B.shape));
  auto compute = [ia = a.id, ib = b.id, fwd](const Tape& t) {
    const Tensor& A = t.value(ia);
    const Tensor& B = t.value(ib);
    Tensor out(A.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = fwd(A.data[i], B.data[i]);
    return out;
  };
  auto backward = [ia = a.id, ib = b.id, bwd](Tape& t, const Tensor& g) {
    const Tensor& A = t.value(ia);
    const Tensor& B = t.value(ib);
    Tensor ga(A.shape), gb(B.shape);
    for (std::size_t i = 0; i < g.data.size(); ++i)
      bwd(A.data[i], B.data[i], g.data[i], ga.data[i], gb.data[i]);
    t.accumulate_grad(ia, std::move(ga));
    t.accumulate_grad(ib, std::move(gb));
  };
  return t.record(kind, {a, b}, compute(t), backward, compute);
}

}  // namespace

Var add(Var a, Var b) {
  return binary_elementwise(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double, double, double g, double& gx, double& gy) {
        gx = g;
        gy = g;
      });
}

Var sub(Var a, Var b) {
  return binary_elementwise(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double, double, double g, double& gx, double& gy) {
        gx = g;
        gy = -g;
      });
}

Var mul(Var a, Var b) {
  return binary_elementwise(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double x, double y, double g, double& gx, double& gy) {
        gx = g * y;
        gy = g * x;
      });
}

Var scale(Var a, double c) {
  Tape& t = same_tape("scale", {a});
  auto compute = [ia = a.id, c](const Tape& t) {
    Tensor out = t.value(ia);
    for (double& v : out.data) v *= c;
    return out;
  };
  auto backward = [ia = a.id, c](Tape& t, const Tensor& g) {
    Tensor ga(g.shape);
    for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] = g.data[i] * c;
    t.accumulate_grad(ia, std::move(ga));
  };
  return t.record("scale", {a}, compute(t), backward, compute);
}

Var scalar_mul(Var a, Var s) {
  Tape& t = same_tape("scalar-mul", {a, s});
  if (t.value(s).numel() != 1)
    shape_error("scalar-mul", "scalar operand has shape " + shape_to_string(t.value(s).shape));
  auto compute = [ia = a.id, is = s.id](const Tape& t) {
    Tensor out = t.value(ia);
    double c = t.value(is).data[0];
    for (double& v : out.data) v *= c;
    return out;
  };
  auto backward = [ia = a.id, is = s.id](Tape& t, const Tensor& g) {
    const Tensor& A = t.value(ia);
    double c = t.value(is).data[0];
    Tensor ga(A.shape);
    double gs = 0.0;
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      ga.data[i] = g.data[i] * c;
      gs += g.data[i] * A.data[i];
    }
    t.accumulate_grad(ia, std::move(ga));
    t.accumulate_grad(is, Tensor({1}, {gs}));
  };
  return t.record("scalar-mul", {a, s}, compute(t), backward, compute);
}

Var matmul(Var a, Var b) {
  Tape& t = same_tape("matmul", {a, b});
  const Tensor& A = t.value(a);
  const Tensor& B = t.value(b);
  if (A.rank() != 2 || B.rank() != 2 || A.shape[1] != B.shape[0])
    shape_error("matmul", "incompatible shapes " + shape_to_string(A.shape) + " x " +
                              shape_to_string(B.shape));
  auto compute = [ia = a.id, ib = b.id](const Tape& t) {
    const Tensor& A = t.value(ia);
    const Tensor& B = t.value(ib);
    std::size_t m = A.shape[0], k = A.shape[1], n = B.shape[1];
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t p = 0; p < k; ++p) {
        double av = A(i, p);
        for (std::size_t j = 0; j < n; ++j) out(i, j) += av * B(p, j);
      }
    return out;
  };
  auto backward = [ia = a.id, ib = b.id](Tape& t, const Tensor& g) {
    const Tensor& A = t.value(ia);
    const Tensor& B = t.value(ib);
    std::size_t m = A.shape[0], k = A.shape[1], n = B.shape[1];
    Tensor ga(A.shape), gb(B.shape);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t p = 0; p < k; ++p) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += g(i, j) * B(p, j);
        ga(i, p) = acc;
      }
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) acc += A(i, p) * g(i, j);
        gb(p, j) = acc;
      }
    t.accumulate_grad(ia, std::move(ga));
    t.accumulate_grad(ib, std::move(gb));
  };
  return t.record("matmul", {a, b}, compute(t), backward, compute);
}

Var add_rowvec(Var a, Var v) {
  Tape& t = same_tape("add-rowvec", {a, v});
  const Tensor& A = t.value(a);
  const Tensor& V = t.value(v);
  if (A.rank() != 2 || V.rank() != 1 || V.shape[0] != A.shape[1])
    shape_error("add-rowvec", "shapes " + shape_to_string(A.shape) + " + " +
                                  shape_to_string(V.shape));
  auto compute = [ia = a.id, iv = v.id](const Tape& t) {
    Tensor out = t.value(ia);
    const Tensor& V = t.value(iv);
    std::size_t m = out.shape[0], n = out.shape[1];
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) out(i, j) += V(j);
    return out;
  };
  auto backward = [ia = a.id, iv = v.id](Tape& t, const Tensor& g) {
    const Tensor& V = t.value(iv);
    Tensor gv(V.shape);
    std::size_t m = g.shape[0], n = g.shape[1];
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) gv(j) += g(i, j);
    t.accumulate_grad(ia, g);
    t.accumulate_grad(iv, std::move(gv));
  };
  return t.record("add-rowvec", {a, v}, compute(t), backward, compute);
}

Var reshape(Var a, std::vector<std::size_t> shape) {
  Tape& t = same_tape("reshape", {a});
  const Tensor& A = t.value(a);
  if (shape_numel(shape) != A.numel())
    shape_error("reshape", "cannot reshape " + shape_to_string(A.shape) + " to " +
                               shape_to_string(shape));
  auto compute = [ia = a.id, shape](const Tape& t) {
    Tensor out = t.value(ia);
    out.shape = shape;
    return out;
  };
  auto backward = [ia = a.id](Tape& t, const Tensor& g) {
    Tensor ga = g;
    ga.shape = t.value(ia).shape;
    t.accumulate_grad(ia, std::move(ga));
  };
  return t.record("reshape", {a}, compute(t), backward, compute);
}

Var transpose(Var a) {
  Tape& t = same_tape("transpose", {a});
  const Tensor& A = t.value(a);
  if (A.rank() != 2) shape_error("transpose", "expects rank-2, got " + shape_to_string(A.shape));
  auto compute = [ia = a.id](const Tape& t) {
    const Tensor& A = t.value(ia);
    Tensor out({A.shape[1], A.shape[0]});
    for (std::size_t i = 0; i < A.shape[0]; ++i)
      for (std::size_t j = 0; j < A.shape[1]; ++j) out(j, i) = A(i, j);
    return out;
  };
  auto backward = [ia = a.id](Tape& t, const Tensor& g) {
    Tensor ga({g.shape[1], g.shape[0]});
    for (std::size_t i = 0; i < g.shape[0]; ++i)
      for (std::size_t j = 0; j < g.shape[1]; ++j) ga(j, i) = g(i, j);
    t.accumulate_grad(ia, std::move(ga));
  };
  return t.record("transpose", {a}, compute(t), backward, compute);
}

namespace {

// Row-major strides for an index space, plus helpers to walk one axis.
struct AxisWalk {
  std::size_t outer, extent, inner;
};

AxisWalk axis_walk(const std::vector<std::size_t>& shape, std::size_t axis) {
  AxisWalk w{1, shape[axis], 1};
  for (std::size_t i = 0; i < axis; ++i) w.outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) w.inner *= shape[i];
  return w;
}

}  // namespace

Var gather(Var a, std::size_t axis, std::vector<std::size_t> indices) {
  Tape& t = same_tape("gather", {a});
  const Tensor& A = t.value(a);
  if (axis >= A.rank()) shape_error("gather", "axis out of range for " + shape_to_string(A.shape));
  for (std::size_t idx : indices)
    if (idx >= A.shape[axis]) shape_error("gather", "index " + std::to_string(idx) + " out of range");
  auto compute = [ia = a.id, axis, indices](const Tape& t) {
    const Tensor& A = t.value(ia);
    AxisWalk w = axis_walk(A.shape, axis);
    std::vector<std::size_t> oshape = A.shape;
    oshape[axis] = indices.size();
    Tensor out(oshape);
    for (std::size_t o = 0; o < w.outer; ++o)
      for (std::size_t e = 0; e < indices.size(); ++e) {
        const double* src = &A.data[(o * w.extent + indices[e]) * w.inner];
        double* dst = &out.data[(o * indices.size() + e) * w.inner];
        std::memcpy(dst, src, w.inner * sizeof(double));
      }
    return out;
  };
  auto backward = [ia = a.id, axis, indices](Tape& t, const Tensor& g) {
    const Tensor& A = t.value(ia);
    AxisWalk w = axis_walk(A.shape, axis);
    Tensor ga(A.shape);
    for (std::size_t o = 0; o < w.outer; ++o)
      for (std::size_t e = 0; e < indices.size(); ++e) {
        const double* src = &g.data[(o * indices.size() + e) * w.inner];
        double* dst = &ga.data[(o * w.extent + indices[e]) * w.inner];
        for (std::size_t i = 0; i < w.inner; ++i) dst[i] += src[i];
      }
    t.accumulate_grad(ia, std::move(ga));
  };
  return t.record("gather", {a}, compute(t), backward, compute);
}

Var concat(const std::vector<Var>& parts, std::size_t axis) {
  if (parts.empty()) throw std::invalid_argument("op 'concat': no inputs");
  Tape& t = same_tape("concat", {parts.front()});
  std::vector<std::size_t> oshape = t.value(parts.front()).shape;
  if (axis >= oshape.size()) shape_error("concat", "axis out of range");
  std::size_t total = 0;
  for (const Var& p : parts) {
    const Tensor& P = same_tape("concat", {p, parts.front()}).value(p);
    if (P.rank() != oshape.size()) shape_error("concat", "rank mismatch");
    for (std::size_t d = 0; d < oshape.size(); ++d)
      if (d != axis && P.shape[d] != oshape[d])
        shape_error("concat", "shape mismatch at axis " + std::to_string(d) + ": " +
                                  shape_to_string(P.shape) + " vs " + shape_to_string(oshape));
    total += P.shape[axis];
  }
  oshape[axis] = total;
  std::vector<int> ids;
  for (const Var& p : parts) ids.push_back(p.id);
  auto compute = [ids, axis, oshape](const Tape& t) {
    Tensor out(oshape);
    AxisWalk w = axis_walk(oshape, axis);
    std::size_t offset = 0;
    for (int id : ids) {
      const Tensor& P = t.value(id);
      std::size_t pe = P.shape[axis];
      for (std::size_t o = 0; o < w.outer; ++o)
        std::memcpy(&out.data[(o * w.extent + offset) * w.inner], &P.data[o * pe * w.inner],
                    pe * w.inner * sizeof(double));
      offset += pe;
    }
    return out;
  };
  auto backward = [ids, axis](Tape& t, const Tensor& g) {
    AxisWalk w = axis_walk(g.shape, axis);
    std::size_t offset = 0;
    for (int id : ids) {
      const Tensor& P = t.value(id);
      std::size_t pe = P.shape[axis];
      Tensor gp(P.shape);
      for (std::size_t o = 0; o < w.outer; ++o)
        std::memcpy(&gp.data[o * pe * w.inner], &g.data[(o * w.extent + offset) * w.inner],
                    pe * w.inner * sizeof(double));
      offset += pe;
      t.accumulate_grad(id, std::move(gp));
    }
  };
  return t.record("concat", parts, compute(t), backward, compute);
}

Var reduce_sum(Var a) {
  Tape& t = same_tape("reduce-sum", {a});
  auto compute = [ia = a.id](const Tape& t) {
    const Tensor& A = t.value(ia);
    double s = 0.0;
    for (double v : A.data) s += v;
    return Tensor::scalar(s);
  };
  auto backward = [ia = a.id](Tape& t, const Tensor& g) {
    Tensor ga(t.value(ia).shape, g.data[0]);
    t.accumulate_grad(ia, std::move(ga));
  };
  return t.record("reduce-sum", {a}, compute(t), backward, compute);
}

Var gelu(Var a) {
  Tape& t = same_tape("gelu", {a});
  constexpr double kInvSqrt2 = 0.7071067811865475244;
  constexpr double kInvSqrt2Pi = 0.3989422804014326779;
  auto compute = [ia = a.id](const Tape& t) {
    Tensor out = t.value(ia);
    for (double& v : out.data) v = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
    return out;
  };
  auto backward = [ia = a.id](Tape& t, const Tensor& g) {
    const Tensor& A = t.value(ia);
    Tensor ga(A.shape);
    for (std::size_t i = 0; i < A.data.size(); ++i) {
      double x = A.data[i];
      double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
      double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
      ga.data[i] = g.data[i] * (cdf + x * pdf);
    }
    t.accumulate_grad(ia, std::move(ga));
  };
  return t.record("gelu", {a}, compute(t), backward, compute);
}

Var sqrt_shifted(Var a, double eps) {
  Tape& t = same_tape("sqrt-shifted", {a});
  auto compute = [ia = a.id, eps](const Tape& t) {
    Tensor out = t.value(ia);
    for (double& v : out.data) v = std::sqrt(std::max(v, 0.0) + eps);
    return out;
  };
  auto backward = [ia = a.id, eps](Tape& t, const Tensor& g) {
    const Tensor& A = t.value(ia);
    Tensor ga(A.shape);
    for (std::size_t i = 0; i < A.data.size(); ++i) {
      double r = std::sqrt(std::max(A.data[i], 0.0) + eps);
      ga.data[i] = A.data[i] > 0.0 ? g.data[i] * 0.5 / r : 0.0;
    }
    t.accumulate_grad(ia, std::move(ga));
  };
  return t.record("sqrt-shifted", {a}, compute(t), backward, compute);
}

Var row_norms(Var a) {
  Tape& t = same_tape("row-norms", {a});
  const Tensor& A = t.value(a);
  if (A.rank() != 2) shape_error("row-norms", "expects rank-2, got " + shape_to_string(A.shape));
  auto compute = [ia = a.id](const Tape& t) {
    const Tensor& A = t.value(ia);
    Tensor out({A.shape[0]});
    for (std::size_t i = 0; i < A.shape[0]; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < A.shape[1]; ++j) s += A(i, j) * A(i, j);
      out(i) = std::sqrt(s);
    }
    return out;
  };
  auto backward = [ia = a.id](Tape& t, const Tensor& g) {
    const Tensor& A = t.value(ia);
    Tensor ga(A.shape);
    for (std::size_t i = 0; i < A.shape[0]; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < A.shape[1]; ++j) s += A(i, j) * A(i, j);
      double r = std::sqrt(s);
      if (r <= 0.0) continue;
      for (std::size_t j = 0; j < A.shape[1]; ++j) ga(i, j) = g(i) * A(i, j) / r;
    }
    t.accumulate_grad(ia, std::move(ga));
  };
  return t.record("row-norms", {a}, compute(t), backward, compute);
}

Var frob_norm(Var a) {
  Tape& t = same_tape("frob-norm", {a});
  auto compute = [ia = a.id](const Tape& t) {
    const Tensor& A = t.value(ia);
    double s = 0.0;
    for (double v : A.data) s += v * v;
    return Tensor::scalar(std::sqrt(s));
  };
  auto backward = [ia = a.id](Tape& t, const Tensor& g) {
    const Tensor& A = t.value(ia);
    double s = 0.0;
    for (double v : A.data) s += v * v;
    double r = std::sqrt(s);
    Tensor ga(A.shape);
    if (r > 0.0)
      for (std::size_t i = 0; i < A.data.size(); ++i) ga.data[i] = g.data[0] * A.data[i] / r;
    t.accumulate_grad(ia, std::move(ga));
  };
  return t.record("frob-norm", {a}, compute(t), backward, compute);
}

Var relative_l2(Var pred, Var truth) {
  Tape& t = same_tape("relative-l2", {pred, truth});
  const Tensor& P = t.value(pred);
  const Tensor& T = t.value(truth);
  if (!P.same_shape(T))
    shape_error("relative-l2", "shape mismatch " + shape_to_string(P.shape) + " vs " +
                                   shape_to_string(T.shape));
  double tn = 0.0;
  for (double v : T.data) tn += v * v;
  if (tn == 0.0) throw std::invalid_argument("op 'relative-l2': target has zero norm");
  auto compute = [ip = pred.id, it = truth.id](const Tape& t) {
    const Tensor& P = t.value(ip);
    const Tensor& T = t.value(it);
    double dn = 0.0, tn = 0.0;
    for (std::size_t i = 0; i < P.data.size(); ++i) {
      double d = P.data[i] - T.data[i];
      dn += d * d;
      tn += T.data[i] * T.data[i];
    }
    return Tensor::scalar(std::sqrt(dn) / std::sqrt(tn));
  };
  auto backward = [ip = pred.id, it = truth.id](Tape& t, const Tensor& g) {
    const Tensor& P = t.value(ip);
    const Tensor& T = t.value(it);
    double dn = 0.0, tn = 0.0;
    for (std::size_t i = 0; i < P.data.size(); ++i) {
      double d = P.data[i] - T.data[i];
      dn += d * d;
      tn += T.data[i] * T.data[i];
    }
    double dnorm = std::sqrt(dn), tnorm = std::sqrt(tn);
    Tensor gp(P.shape);
    if (dnorm > 0.0)
      for (std::size_t i = 0; i < P.data.size(); ++i)
        gp.data[i] = g.data[0] * (P.data[i] - T.data[i]) / (dnorm * tnorm);
    t.accumulate_grad(ip, std::move(gp));
  };
  return t.record("relative-l2", {pred, truth}, compute(t), backward, compute);
}

Var complex_mul(Var a, Var b) {
  Tape& t = same_tape("complex-mul", {a, b});
  const Tensor& A = t.value(a);
  const Tensor& B = t.value(b);
  if (!A.same_shape(B) || A.rank() < 1 || A.shape[0] != 2)
    shape_error("complex-mul", "expects matching packed (2,...) tensors, got " +
                                   shape_to_string(A.shape) + " and " + shape_to_string(B.shape));
  auto compute = [ia = a.id, ib = b.id](const Tape& t) {
    const Tensor& A = t.value(ia);
    const Tensor& B = t.value(ib);
    std::size_t half = A.numel() / 2;
    Tensor out(A.shape);
    for (std::size_t i = 0; i < half; ++i) {
      double ar = A.data[i], ai = A.data[half + i];
      double br = B.data[i], bi = B.data[half + i];
      out.data[i] = ar * br - ai * bi;
      out.data[half + i] = ar * bi + ai * br;
    }
    return out;
  };
  auto backward = [ia = a.id, ib = b.id](Tape& t, const Tensor& g) {
    const Tensor& A = t.value(ia);
    const Tensor& B = t.value(ib);
    std::size_t half = A.numel() / 2;
    Tensor ga(A.shape), gb(B.shape);
    for (std::size_t i = 0; i < half; ++i) {
      double ar = A.data[i], ai = A.data[half + i];
      double br = B.data[i], bi = B.data[half + i];
      double gr = g.data[i], gi = g.data[half + i];
      ga.data[i] = gr * br + gi * bi;
      ga.data[half + i] = -gr * bi + gi * br;
      gb.data[i] = gr * ar + gi * ai;
      gb.data[half + i] = -gr * ai + gi * ar;
    }
    t.accumulate_grad(ia, std::move(ga));
    t.accumulate_grad(ib, std::move(gb));
  };
  return t.record("complex-mul", {a, b}, compute(t), backward, compute);
}

}  // namespace phqfno
