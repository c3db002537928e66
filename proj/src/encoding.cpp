#include "phqfno/encoding.hpp"

#include <cmath>
#include <stdexcept>

namespace phqfno {

namespace {

constexpr double kDegenerate = 1e-14;

std::vector<double> suffix_norms(std::span<const double> x) {
  std::vector<double> rho(x.size() + 1, 0.0);
  double acc = 0.0;
  for (std::size_t k = x.size(); k-- > 0;) {
    acc += x[k] * x[k];
    rho[k] = std::sqrt(acc);
  }
  return rho;
}

}  // namespace

std::vector<double> encoding_angles_unchecked(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) return {};
  std::vector<double> rho = suffix_norms(x);
  std::vector<double> angles(n - 1, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (rho[k] < kDegenerate) break;  // residual underflow: remaining angles stay 0
    if (k == n - 2)
      angles[k] = std::atan2(x[n - 1], x[n - 2]);
    else
      angles[k] = std::atan2(rho[k + 1], x[k]);
  }
  return angles;
}

std::vector<double> encoding_angles(std::span<const double> x) {
  double nrm = 0.0;
  for (double v : x) nrm += v * v;
  nrm = std::sqrt(nrm);
  if (std::abs(nrm - 1.0) > 1e-12)
    throw std::invalid_argument("encoding_angles: input norm " + std::to_string(nrm) +
                                " is not 1 within 1e-12");
  return encoding_angles_unchecked(x);
}

std::vector<double> angles_to_amplitudes(std::span<const double> angles) {
  std::vector<double> amp(angles.size() + 1, 0.0);
  double tail = 1.0;
  for (std::size_t k = 0; k < angles.size(); ++k) {
    amp[k] = std::cos(angles[k]) * tail;
    tail *= std::sin(angles[k]);
  }
  amp[angles.size()] = tail;
  return amp;
}

namespace {

// Appends the raw RBS chain of a 1-D loader (no seed gate). With `values`
// the angles are baked in; otherwise they reference slots.
void append_chain(CircuitProgram& prog, int start, int n, int slot_base,
                  const std::vector<double>* values, const std::vector<int>& controls) {
  for (int k = 0; k + 1 < n; ++k) {
    if (values)
      prog.rbs(start + k, start + k + 1, (*values)[static_cast<std::size_t>(slot_base + k)],
               controls);
    else
      prog.rbs_slot(start + k, start + k + 1, slot_base + k, 1.0, controls);
  }
}

// 2-D loader body: row-norm chain on the row register (assumed seeded by the
// caller), then a seed CNOT plus controlled-RBS chain per row. skip_rows
// marks rows whose loader blocks are omitted (zero rows in the baked path).
CircuitProgram build_load2d(int row_start, int m, int col_start, int n, int slot_base,
                            const std::vector<double>* values,
                            const std::vector<char>* skip_rows) {
  CircuitProgram prog;
  prog.num_wires = std::max(row_start + m, col_start + n);
  append_chain(prog, row_start, m, slot_base, values, {});
  int row_block = n - 1;
  for (int i = 0; i < m; ++i) {
    if (skip_rows && (*skip_rows)[static_cast<std::size_t>(i)]) continue;
    int base = slot_base + (m - 1) + i * row_block;
    prog.x(col_start, {row_start + i});
    append_chain(prog, col_start, n, base, values, {row_start + i});
  }
  return prog;
}

CircuitProgram build_encode_3d(int m, int n, int k, const std::vector<double>* values,
                               const std::vector<char>* skip_slices,
                               const std::vector<std::vector<char>>* skip_rows) {
  CircuitProgram prog;
  prog.num_wires = k + n + m;
  const int col_start = k;
  const int row_start = k + n;
  prog.x(0);
  append_chain(prog, 0, k, 0, values, {});
  const int block = (m - 1) + m * (n - 1);
  for (int l = 0; l < k; ++l) {
    if (skip_slices && (*skip_slices)[static_cast<std::size_t>(l)]) continue;
    int base = (k - 1) + l * block;
    CircuitProgram load = build_load2d(row_start, m, col_start, n, base, values,
                                       skip_rows ? &(*skip_rows)[static_cast<std::size_t>(l)]
                                                 : nullptr);
    // Adjoint/load sandwich: on branches already loaded the pair cancels,
    // on the vacuum branches both halves act trivially, and on slice l the
    // seed in between activates the loader.
    if (l > 0) prog.append(load.adjoint());
    prog.x(row_start, {l});
    prog.append(load);
  }
  return prog;
}

std::vector<RegisterSpec> regs_1d(int n) { return {RegisterSpec{"data", 0, n}}; }

std::vector<RegisterSpec> regs_2d(int m, int n) {
  return {RegisterSpec{"rows", 0, m}, RegisterSpec{"cols", m, n}};
}

std::vector<RegisterSpec> regs_3d(int m, int n, int k) {
  return {RegisterSpec{"slices", 0, k}, RegisterSpec{"cols", k, n},
          RegisterSpec{"rows", k + n, m}};
}

}  // namespace

EncodingPlan encode_1d_plan(int n) {
  EncodingPlan plan;
  plan.registers = regs_1d(n);
  plan.program.num_wires = n;
  plan.program.x(0);
  append_chain(plan.program, 0, n, 0, nullptr, {});
  plan.program.registers = plan.registers;
  return plan;
}

EncodingPlan encode_2d_plan(int m, int n) {
  EncodingPlan plan;
  plan.registers = regs_2d(m, n);
  plan.program.num_wires = m + n;
  plan.program.x(0);
  plan.program.append(build_load2d(0, m, m, n, 0, nullptr, nullptr));
  plan.program.registers = plan.registers;
  return plan;
}

EncodingPlan encode_3d_plan(int m, int n, int k) {
  EncodingPlan plan;
  plan.registers = regs_3d(m, n, k);
  plan.program = build_encode_3d(m, n, k, nullptr, nullptr, nullptr);
  plan.program.registers = plan.registers;
  return plan;
}

std::vector<double> encode_1d_slots(std::span<const double> x) {
  return encoding_angles_unchecked(x);
}

std::vector<double> encode_2d_slots(const Tensor& X) {
  const std::size_t m = X.shape[0], n = X.shape[1];
  std::vector<double> rnorm(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += X(i, j) * X(i, j);
    rnorm[i] = std::sqrt(s);
  }
  std::vector<double> slots = encoding_angles_unchecked(rnorm);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> row(n);
    for (std::size_t j = 0; j < n; ++j) row[j] = X(i, j);
    std::vector<double> a = encoding_angles_unchecked(row);
    slots.insert(slots.end(), a.begin(), a.end());
  }
  return slots;
}

std::vector<double> encode_3d_slots(const Tensor& Y) {
  const std::size_t m = Y.shape[0], n = Y.shape[1], k = Y.shape[2];
  std::vector<double> snorm(k, 0.0);
  for (std::size_t l = 0; l < k; ++l) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) s += Y(i, j, l) * Y(i, j, l);
    snorm[l] = std::sqrt(s);
  }
  std::vector<double> slots = encoding_angles_unchecked(snorm);
  for (std::size_t l = 0; l < k; ++l) {
    Tensor slice({m, n});
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) slice(i, j) = Y(i, j, l);
    std::vector<double> a = encode_2d_slots(slice);
    slots.insert(slots.end(), a.begin(), a.end());
  }
  return slots;
}

std::pair<CircuitProgram, double> encode_1d(std::span<const double> x) {
  double nrm = 0.0;
  for (double v : x) nrm += v * v;
  nrm = std::sqrt(nrm);
  if (nrm == 0.0) throw std::invalid_argument("encode_1d: zero vector");
  std::vector<double> angles = encoding_angles_unchecked(x);
  CircuitProgram prog;
  prog.num_wires = static_cast<int>(x.size());
  prog.registers = regs_1d(prog.num_wires);
  prog.x(0);
  append_chain(prog, 0, prog.num_wires, 0, &angles, {});
  return {std::move(prog), nrm};
}

std::pair<CircuitProgram, double> encode_2d(const Tensor& X) {
  if (X.rank() != 2) throw std::invalid_argument("encode_2d: expects a matrix");
  const int m = static_cast<int>(X.shape[0]), n = static_cast<int>(X.shape[1]);
  double nrm = 0.0;
  for (double v : X.data) nrm += v * v;
  nrm = std::sqrt(nrm);
  if (nrm == 0.0) throw std::invalid_argument("encode_2d: zero matrix");
  std::vector<double> slots = encode_2d_slots(X);
  std::vector<char> skip(static_cast<std::size_t>(m), 0);
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += X(i, j) * X(i, j);
    skip[static_cast<std::size_t>(i)] = s == 0.0;
  }
  CircuitProgram prog;
  prog.num_wires = m + n;
  prog.registers = regs_2d(m, n);
  prog.x(0);
  prog.append(build_load2d(0, m, m, n, 0, &slots, &skip));
  return {std::move(prog), nrm};
}

std::pair<CircuitProgram, double> encode_3d(const Tensor& Y) {
  if (Y.rank() != 3) throw std::invalid_argument("encode_3d: expects a rank-3 tensor");
  const int m = static_cast<int>(Y.shape[0]), n = static_cast<int>(Y.shape[1]),
            k = static_cast<int>(Y.shape[2]);
  double nrm = 0.0;
  for (double v : Y.data) nrm += v * v;
  nrm = std::sqrt(nrm);
  if (nrm == 0.0) throw std::invalid_argument("encode_3d: zero tensor");
  std::vector<double> slots = encode_3d_slots(Y);
  std::vector<char> skip_slices(static_cast<std::size_t>(k), 0);
  std::vector<std::vector<char>> skip_rows(static_cast<std::size_t>(k),
                                           std::vector<char>(static_cast<std::size_t>(m), 0));
  for (int l = 0; l < k; ++l) {
    double snorm = 0.0;
    for (int i = 0; i < m; ++i) {
      double row = 0.0;
      for (int j = 0; j < n; ++j) row += Y(i, j, l) * Y(i, j, l);
      skip_rows[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)] = row == 0.0;
      snorm += row;
    }
    skip_slices[static_cast<std::size_t>(l)] = snorm == 0.0;
  }
  CircuitProgram prog = build_encode_3d(m, n, k, &slots, &skip_slices, &skip_rows);
  prog.registers = regs_3d(m, n, k);
  return {std::move(prog), nrm};
}

Tensor decode_unary(const Tensor& probabilities, double stored_norm) {
  Tensor out(probabilities.shape);
  for (std::size_t i = 0; i < probabilities.data.size(); ++i) {
    double p = probabilities.data[i];
    if (p < -1e-12)
      throw std::runtime_error("decode_unary: probability " + std::to_string(p) +
                               " below -1e-12 at index " + std::to_string(i));
    out.data[i] = stored_norm * std::sqrt(std::max(p, 0.0));
  }
  return out;
}

Var encoding_angles_op(Var x) {
  Tape& t = *x.tape;
  const Tensor& X = t.value(x);
  if (X.rank() != 1 || X.numel() < 2)
    throw std::invalid_argument("op 'encoding-angles': expects a vector of length >= 2, got " +
                                shape_to_string(X.shape));
  auto compute = [ix = x.id](const Tape& t) {
    const Tensor& X = t.value(ix);
    return Tensor::from_vector(encoding_angles_unchecked(X.data));
  };
  auto backward = [ix = x.id](Tape& t, const Tensor& g) {
    const Tensor& X = t.value(ix);
    const std::size_t n = X.numel();
    std::vector<double> rho = suffix_norms(X.data);
    Tensor gx(X.shape);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      double gk = g.data[k];
      if (gk == 0.0 || rho[k] < kDegenerate) continue;
      double rk2 = rho[k] * rho[k];
      if (k == n - 2) {
        gx.data[n - 2] += gk * (-X.data[n - 1] / rk2);
        gx.data[n - 1] += gk * (X.data[n - 2] / rk2);
      } else {
        gx.data[k] += gk * (-rho[k + 1] / rk2);
        if (rho[k + 1] >= kDegenerate) {
          double base = X.data[k] / (rk2 * rho[k + 1]);
          for (std::size_t j = k + 1; j < n; ++j) gx.data[j] += gk * base * X.data[j];
        }
      }
    }
    t.accumulate_grad(ix, std::move(gx));
  };
  return t.record("encoding-angles", {x}, compute(t), backward, compute);
}

}  // namespace phqfno
