#include "phqfno/hybrid.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "phqfno/encoding.hpp"
#include "phqfno/fno.hpp"
#include "phqfno/qft.hpp"
#include "phqfno/serialize.hpp"
#include "phqfno/variational.hpp"

namespace phqfno {

using nlohmann::json;

int HybridConfig::hybridization_percent() const {
  if (d_v == 0) return 0;
  return 100 * quantum_share() / d_v;  // truncating, matching the 66% / 33% labels
}

void HybridConfig::validate() const {
  if (dim != 1 && dim != 2) throw std::invalid_argument("HybridConfig: dim must be 1 or 2");
  if (!is_power_of_two(static_cast<std::size_t>(grid)))
    throw std::invalid_argument("HybridConfig: grid must be a power of two");
  if (d_v < 1) throw std::invalid_argument("HybridConfig: d_v must be positive");
  if (d_v_q != 0 && d_v_q != 2 && d_v_q != 4)
    throw std::invalid_argument("HybridConfig: d_v_q must be 0, 2 or 4");
  if (quantum_groups < 1) throw std::invalid_argument("HybridConfig: quantum_groups must be >= 1");
  if (quantum_groups > 1 && (dim != 1 || d_v_q != 4))
    throw std::invalid_argument(
        "HybridConfig: multiple quantum groups are a 1-D configuration with d_v_q = 4");
  if (d_v_c() < 0)
    throw std::invalid_argument("HybridConfig: quantum share exceeds d_v");
  if (conv_kernel < 1 || conv_kernel % 2 == 0)
    throw std::invalid_argument("HybridConfig: conv_kernel must be odd");
  if (dim == 1) {
    if (modes < 0 || modes > grid)
      throw std::invalid_argument("HybridConfig: modes out of range");
    if (d_v_q > 0 && d_v_q + grid > kMaxQubits)
      throw std::invalid_argument("HybridConfig: quantum group needs " +
                                  std::to_string(d_v_q + grid) + " qubits, cap is 12");
  } else {
    if (d_v_q > 0 && grid != 8)
      throw std::invalid_argument(
          "HybridConfig: the 2-D quantum branch tiles an 8x8 grid into four 4x4 blocks");
    int sub = grid / 2;
    if (modes_x < 0 || modes_x > sub || modes_y < 0 || modes_y > sub)
      throw std::invalid_argument("HybridConfig: (modes_x, modes_y) out of range for 4x4 blocks");
    if (d_v_q > 0 && d_v_q + 8 > kMaxQubits)
      throw std::invalid_argument("HybridConfig: 2-D quantum block exceeds the 12-qubit cap");
  }
}

std::string HybridConfig::to_canonical_json() const {
  json j{{"dim", dim},
         {"grid", grid},
         {"d_v", d_v},
         {"d_v_q", d_v_q},
         {"quantum_groups", quantum_groups},
         {"modes", modes},
         {"modes_x", modes_x},
         {"modes_y", modes_y},
         {"conv_kernel", conv_kernel},
         {"proj_hidden", proj_hidden}};
  return j.dump();
}

HybridConfig HybridConfig::from_json_string(const std::string& text) {
  json j = json::parse(text);
  HybridConfig c;
  c.dim = j.value("dim", 1);
  c.grid = j.value("grid", 8);
  c.d_v = j.value("d_v", 4);
  c.d_v_q = j.value("d_v_q", 4);
  c.quantum_groups = j.value("quantum_groups", 1);
  c.modes = j.value("modes", 1);
  c.modes_x = j.value("modes_x", 1);
  c.modes_y = j.value("modes_y", 1);
  c.conv_kernel = j.value("conv_kernel", 1);
  c.proj_hidden = j.value("proj_hidden", 32);
  c.validate();
  return c;
}

Var circuit_probs_op(Var theta, std::shared_ptr<const CircuitProgram> program) {
  Tape& t = *theta.tape;
  const Tensor& th = t.value(theta);
  if (th.rank() != 1 || th.numel() != static_cast<std::size_t>(program->num_slots))
    throw std::invalid_argument("op 'circuit-probs': got " + std::to_string(th.numel()) +
                                " parameters, program has " + std::to_string(program->num_slots) +
                                " slots");
  auto compute = [it = theta.id, program](const Tape& t) {
    const Tensor& th = t.value(it);
    StateVector s = run(*program, StateVector::zero_state(program->num_wires), th.data);
    return measure_unary_probabilities(s, program->registers);
  };
  auto backward = [it = theta.id, program](Tape& t, const Tensor& g) {
    const Tensor& th = t.value(it);
    std::vector<double> grad = adjoint_gradient(
        *program, th.data, StateVector::zero_state(program->num_wires), program->registers, g);
    t.accumulate_grad(it, Tensor::from_vector(std::move(grad)));
  };
  return t.record("circuit-probs", {theta}, compute(t), backward, compute);
}

Tensor with_coords_1d(const Tensor& u) {
  const std::size_t n = u.numel();
  Tensor out({n, 2});
  for (std::size_t i = 0; i < n; ++i) {
    out(i, 0) = u.data[i];
    out(i, 1) = static_cast<double>(i) / static_cast<double>(n);
  }
  return out;
}

Tensor with_coords_2d(const Tensor& w) {
  const std::size_t n = w.shape[0];
  Tensor out({n, n, 3});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      out(i, j, 0) = w(i, j);
      out(i, j, 1) = static_cast<double>(i) / static_cast<double>(n);
      out(i, j, 2) = static_cast<double>(j) / static_cast<double>(n);
    }
  return out;
}

namespace {

constexpr double kProbEps = 1e-30;  // keeps sqrt differentiable at p -> 0+

// reverse the axes of a rank-3 tensor: out(a,b,c) = in(c,b,a)
Var transpose3_reverse(Var a) {
  Tape& t = *a.tape;
  const Tensor& A = t.value(a);
  if (A.rank() != 3)
    throw std::invalid_argument("op 'transpose3': expects rank-3, got " +
                                shape_to_string(A.shape));
  auto flip = [](const Tensor& in) {
    Tensor out({in.shape[2], in.shape[1], in.shape[0]});
    for (std::size_t i = 0; i < in.shape[0]; ++i)
      for (std::size_t j = 0; j < in.shape[1]; ++j)
        for (std::size_t k = 0; k < in.shape[2]; ++k) out(k, j, i) = in(i, j, k);
    return out;
  };
  auto compute = [ia = a.id, flip](const Tape& t) { return flip(t.value(ia)); };
  auto backward = [ia = a.id, flip](Tape& t, const Tensor& g) { t.accumulate_grad(ia, flip(g)); };
  return t.record("transpose3", {a}, compute(t), backward, compute);
}

std::vector<std::size_t> range_indices(int start, int count) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) idx[static_cast<std::size_t>(i)] = static_cast<std::size_t>(start + i);
  return idx;
}

}  // namespace

PhqfnoModel PhqfnoModel::init(const HybridConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  PhqfnoModel model;
  model.cfg_ = cfg;
  std::mt19937_64 gen(seed);
  auto uniform = [&gen](double a) {
    return std::uniform_real_distribution<double>(-a, a)(gen);
  };
  // torch.nn.Linear-style default: U(-1/sqrt(fan_in), 1/sqrt(fan_in))
  auto linear_init = [&](std::vector<std::size_t> shape, std::size_t fan_in) {
    Tensor t(std::move(shape));
    double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : t.data) v = uniform(a);
    return t;
  };

  const std::size_t dv = static_cast<std::size_t>(cfg.d_v);
  const std::size_t cin = static_cast<std::size_t>(cfg.input_channels());
  model.params_.emplace_back("lift.weight", linear_init({cin, dv}, cin));
  model.params_.emplace_back("lift.bias", linear_init({dv}, cin));

  if (cfg.d_v_q > 0) {
    const int d = orthogonal_layer_params(cfg.d_v_q);
    if (cfg.dim == 1) {
      for (int g = 0; g < cfg.quantum_groups; ++g) {
        Tensor th({static_cast<std::size_t>(cfg.modes * d)});
        for (double& v : th.data) v = uniform(0.1);
        model.params_.emplace_back("quantum.g" + std::to_string(g) + ".theta", std::move(th));
      }
    } else {
      for (int sb = 0; sb < 4; ++sb) {
        Tensor th({static_cast<std::size_t>(cfg.modes_x * cfg.modes_y * d)});
        for (double& v : th.data) v = uniform(0.1);
        model.params_.emplace_back("quantum.sb" + std::to_string(sb) + ".theta", std::move(th));
      }
    }
  }

  if (cfg.d_v_c() > 0) {
    const std::size_t c = static_cast<std::size_t>(cfg.d_v_c());
    const std::size_t ks = static_cast<std::size_t>(cfg.conv_kernel);
    // spectral weights start near the identity, mirroring W^Q at theta ~ 0
    if (cfg.dim == 1) {
      Tensor w({2, static_cast<std::size_t>(cfg.modes), c, c});
      for (std::size_t k = 0; k < w.shape[1]; ++k)
        for (std::size_t o = 0; o < c; ++o)
          for (std::size_t i = 0; i < c; ++i) {
            w.data[(k * c + o) * c + i] = (o == i ? 1.0 : 0.0) + uniform(0.1);
            w.data[w.numel() / 2 + (k * c + o) * c + i] = uniform(0.1);
          }
      model.params_.emplace_back("classical.spectral", std::move(w));
      model.params_.emplace_back("classical.conv.weight", linear_init({ks, c, c}, c * ks));
      model.params_.emplace_back("classical.conv.bias", linear_init({c}, c * ks));
    } else {
      Tensor w({2, static_cast<std::size_t>(cfg.modes_x), static_cast<std::size_t>(cfg.modes_y), c,
                c});
      std::size_t half = w.numel() / 2;
      for (std::size_t m = 0; m < w.shape[1] * w.shape[2]; ++m)
        for (std::size_t o = 0; o < c; ++o)
          for (std::size_t i = 0; i < c; ++i) {
            w.data[(m * c + o) * c + i] = (o == i ? 1.0 : 0.0) + uniform(0.1);
            w.data[half + (m * c + o) * c + i] = uniform(0.1);
          }
      model.params_.emplace_back("classical.spectral", std::move(w));
      model.params_.emplace_back("classical.conv.weight", linear_init({ks, ks, c, c}, c * ks * ks));
      model.params_.emplace_back("classical.conv.bias", linear_init({c}, c * ks * ks));
    }
  }

  if (cfg.dim == 2) {
    const std::size_t ks = static_cast<std::size_t>(cfg.conv_kernel);
    model.params_.emplace_back("global_conv.weight", linear_init({ks, ks, dv, dv}, dv * ks * ks));
    model.params_.emplace_back("global_conv.bias", linear_init({dv}, dv * ks * ks));
    const std::size_t h = static_cast<std::size_t>(cfg.proj_hidden);
    model.params_.emplace_back("proj.w1", linear_init({dv, h}, dv));
    model.params_.emplace_back("proj.b1", linear_init({h}, dv));
    model.params_.emplace_back("proj.w2", linear_init({h, 1}, h));
    model.params_.emplace_back("proj.b2", linear_init({1}, h));
  } else {
    model.params_.emplace_back("proj.weight", linear_init({dv, 1}, dv));
    model.params_.emplace_back("proj.bias", linear_init({1}, dv));
  }

  // circuit structure shared by all groups / subblocks
  if (cfg.d_v_q > 0) {
    if (cfg.dim == 1) {
      const int m = cfg.d_v_q, n = cfg.grid;
      EncodingPlan plan = encode_2d_plan(m, n);
      CircuitProgram prog = std::move(plan.program);
      const int enc_slots = prog.num_slots;
      prog.append(qft_fragment(m, n, false));
      append_cz_learning_block(prog, plan.registers[0], plan.registers[1], cfg.modes, enc_slots);
      prog.append(qft_fragment(m, n, true));
      prog.registers = plan.registers;
      model.qprog_ = std::make_shared<const CircuitProgram>(std::move(prog));
      model.spatial_perm_ = bit_reversal(static_cast<std::size_t>(n));
    } else {
      const int k = cfg.d_v_q, sub = cfg.grid / 2;
      EncodingPlan plan = encode_3d_plan(sub, sub, k);
      CircuitProgram prog = std::move(plan.program);
      const int enc_slots = prog.num_slots;
      prog.append(qft_fragment(plan.registers[1].start, sub, false));
      prog.append(qft_fragment(plan.registers[2].start, sub, false));
      append_ccz_learning_block(prog, plan.registers[0], plan.registers[2], plan.registers[1],
                                cfg.modes_x, cfg.modes_y, enc_slots);
      prog.append(qft_fragment(plan.registers[1].start, sub, true));
      prog.append(qft_fragment(plan.registers[2].start, sub, true));
      prog.registers = plan.registers;
      model.qprog_ = std::make_shared<const CircuitProgram>(std::move(prog));
      model.block_perm_ = bit_reversal(static_cast<std::size_t>(sub));
    }
  }
  return model;
}

std::vector<Var> PhqfnoModel::bind_all(Tape& tape) const {
  std::vector<Var> vars;
  vars.reserve(params_.size());
  for (const auto& [name, tensor] : params_) vars.push_back(tape.param(tensor));
  return vars;
}

Var PhqfnoModel::bound(const std::vector<Var>& vars, const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].first == name) return vars[i];
  throw std::logic_error("PhqfnoModel: unknown parameter '" + name + "'");
}

Var PhqfnoModel::lift(Tape& tape, Var input2d) const {
  std::vector<Var> vars = bind_all(tape);
  return add_rowvec(matmul(input2d, bound(vars, "lift.weight")), bound(vars, "lift.bias"));
}

Var PhqfnoModel::quantum_group_1d(Var lifted, int group, Var theta_learn) const {
  const int m = cfg_.d_v_q, n = cfg_.grid;
  Var xg = gather(lifted, 1, range_indices(group * m, m));  // (n, m)
  Var xm = transpose(xg);                                   // (m, n), rows are channels
  Var xp = gather(xm, 1, spatial_perm_);                    // column permutation before encoding

  std::vector<Var> parts;
  parts.push_back(encoding_angles_op(row_norms(xp)));
  for (int i = 0; i < m; ++i) {
    Var row = reshape(gather(xp, 0, {static_cast<std::size_t>(i)}),
                      {static_cast<std::size_t>(n)});
    parts.push_back(encoding_angles_op(row));
  }
  parts.push_back(theta_learn);
  Var theta_full = concat(parts, 0);

  Var probs = circuit_probs_op(theta_full, qprog_);  // (m, n)
  Var mag = scalar_mul(sqrt_shifted(probs, kProbEps), frob_norm(xp));
  Var unperm = gather(mag, 1, spatial_perm_);  // the permutation is an involution
  return transpose(unperm);                    // (n, m)
}

Var PhqfnoModel::quantum_subblock_2d(Var block, Var theta_learn) const {
  const int sub = cfg_.grid / 2, k = cfg_.d_v_q;
  Var yp = gather(gather(block, 0, block_perm_), 1, block_perm_);  // (sub, sub, k)
  Var flat = reshape(yp, {static_cast<std::size_t>(sub * sub), static_cast<std::size_t>(k)});

  std::vector<Var> parts;
  parts.push_back(encoding_angles_op(row_norms(transpose(flat))));  // slice norms over channels
  for (int l = 0; l < k; ++l) {
    Var slice = reshape(gather(flat, 1, {static_cast<std::size_t>(l)}),
                        {static_cast<std::size_t>(sub), static_cast<std::size_t>(sub)});
    parts.push_back(encoding_angles_op(row_norms(slice)));
    for (int i = 0; i < sub; ++i) {
      Var row = reshape(gather(slice, 0, {static_cast<std::size_t>(i)}),
                        {static_cast<std::size_t>(sub)});
      parts.push_back(encoding_angles_op(row));
    }
  }
  parts.push_back(theta_learn);
  Var theta_full = concat(parts, 0);

  Var probs = circuit_probs_op(theta_full, qprog_);  // (k, sub, sub) = (channel, j, i)
  Var mag = scalar_mul(sqrt_shifted(probs, kProbEps), frob_norm(flat));
  Var up = gather(gather(mag, 1, block_perm_), 2, block_perm_);
  return transpose3_reverse(up);  // (i, j, channel)
}

Var PhqfnoModel::quantum_branch_bound(const std::vector<Var>& vars, Var lifted) const {
  if (cfg_.quantum_share() == 0)
    throw std::logic_error("quantum_branch: configuration has no quantum share");
  if (cfg_.dim == 1) {
    std::vector<Var> outs;
    for (int g = 0; g < cfg_.quantum_groups; ++g) {
      Var th = bound(vars, "quantum.g" + std::to_string(g) + ".theta");
      outs.push_back(quantum_group_1d(lifted, g, th));
    }
    return outs.size() == 1 ? outs[0] : concat(outs, 1);
  }
  const int sub = cfg_.grid / 2;
  Var yq = gather(lifted, 2, range_indices(0, cfg_.d_v_q));
  std::vector<Var> quadrant(4, Var{});
  int sb = 0;
  for (int bi = 0; bi < 2; ++bi)
    for (int bj = 0; bj < 2; ++bj, ++sb) {
      Var rows = gather(yq, 0, range_indices(bi * sub, sub));
      Var block = gather(rows, 1, range_indices(bj * sub, sub));
      Var th = bound(vars, "quantum.sb" + std::to_string(sb) + ".theta");
      quadrant[static_cast<std::size_t>(sb)] = quantum_subblock_2d(block, th);
    }
  Var top = concat({quadrant[0], quadrant[1]}, 1);
  Var bottom = concat({quadrant[2], quadrant[3]}, 1);
  return concat({top, bottom}, 0);
}

Var PhqfnoModel::quantum_branch(Tape& tape, Var lifted) const {
  return quantum_branch_bound(bind_all(tape), lifted);
}

Var PhqfnoModel::classical_branch_bound(const std::vector<Var>& vars, Var lifted) const {
  const int c = cfg_.d_v_c();
  if (c == 0) throw std::logic_error("classical_branch: configuration has no classical share");
  Var w = bound(vars, "classical.spectral");
  Var ck = bound(vars, "classical.conv.weight");
  Var cb = bound(vars, "classical.conv.bias");
  if (cfg_.dim == 1) {
    Var xc = gather(lifted, 1, range_indices(cfg_.quantum_share(), c));
    return classical_fourier_layer_1d(xc, w, cfg_.modes, ck, cb, true);
  }
  Var xc = gather(lifted, 2, range_indices(cfg_.quantum_share(), c));
  return classical_fourier_layer_2d(xc, w, cfg_.modes_x, cfg_.modes_y, ck, cb, true);
}

Var PhqfnoModel::classical_branch(Tape& tape, Var lifted) const {
  return classical_branch_bound(bind_all(tape), lifted);
}

Var PhqfnoModel::forward(Tape& tape, const Tensor& input) const {
  const std::size_t n = static_cast<std::size_t>(cfg_.grid);
  const std::size_t cin = static_cast<std::size_t>(cfg_.input_channels());
  std::vector<Var> vars = bind_all(tape);
  if (cfg_.dim == 1) {
    if (input.shape != std::vector<std::size_t>{n, cin})
      throw std::invalid_argument("forward: 1-D input must be (grid, 2), got " +
                                  shape_to_string(input.shape));
    Var in = tape.constant(input);
    Var lifted = add_rowvec(matmul(in, bound(vars, "lift.weight")), bound(vars, "lift.bias"));
    std::vector<Var> branches;
    if (cfg_.quantum_share() > 0) branches.push_back(quantum_branch_bound(vars, lifted));
    if (cfg_.d_v_c() > 0) branches.push_back(classical_branch_bound(vars, lifted));
    Var cat = branches.size() == 1 ? branches[0] : concat(branches, 1);
    Var out = add_rowvec(matmul(cat, bound(vars, "proj.weight")), bound(vars, "proj.bias"));
    return reshape(out, {n});
  }
  if (input.shape != std::vector<std::size_t>{n, n, cin})
    throw std::invalid_argument("forward: 2-D input must be (grid, grid, 3), got " +
                                shape_to_string(input.shape));
  Var in = tape.constant(input);
  Var flat = reshape(in, {n * n, cin});
  Var lifted0 = add_rowvec(matmul(flat, bound(vars, "lift.weight")), bound(vars, "lift.bias"));
  Var lifted = reshape(lifted0, {n, n, static_cast<std::size_t>(cfg_.d_v)});
  std::vector<Var> branches;
  if (cfg_.quantum_share() > 0) branches.push_back(quantum_branch_bound(vars, lifted));
  if (cfg_.d_v_c() > 0) branches.push_back(classical_branch_bound(vars, lifted));
  Var cat = branches.size() == 1 ? branches[0] : concat(branches, 2);
  Var conv =
      conv_circular_2d(cat, bound(vars, "global_conv.weight"), bound(vars, "global_conv.bias"));
  Var pf = reshape(conv, {n * n, static_cast<std::size_t>(cfg_.d_v)});
  Var h = gelu(add_rowvec(matmul(pf, bound(vars, "proj.w1")), bound(vars, "proj.b1")));
  Var out = add_rowvec(matmul(h, bound(vars, "proj.w2")), bound(vars, "proj.b2"));
  return reshape(out, {n, n});
}

Tensor PhqfnoModel::forward_value(const Tensor& input) const {
  Tape tape;
  return tape.value(forward(tape, input));
}

int PhqfnoModel::quantum_learning_param_count() const {
  int total = 0;
  for (const auto& [name, t] : params_)
    if (name.rfind("quantum.", 0) == 0) total += static_cast<int>(t.numel());
  return total;
}

int PhqfnoModel::classical_learning_param_count() const {
  for (const auto& [name, t] : params_)
    if (name == "classical.spectral") return static_cast<int>(t.numel() / 2);  // complex pairs
  return 0;
}

Var PhqfnoModel::classical_reference_forward(Tape& tape, const Tensor& input) const {
  if (cfg_.quantum_share() != 0)
    throw std::logic_error("classical_reference_forward: config has a quantum share");
  const std::size_t n = static_cast<std::size_t>(cfg_.grid);
  std::vector<Var> vars = bind_all(tape);
  Var in = tape.constant(input);
  Var w = bound(vars, "lift.weight");
  Var b = bound(vars, "lift.bias");
  Var ws = bound(vars, "classical.spectral");
  Var ck = bound(vars, "classical.conv.weight");
  Var cb = bound(vars, "classical.conv.bias");
  if (cfg_.dim == 1) {
    Var lifted = add_rowvec(matmul(in, w), b);
    Var layer = classical_fourier_layer_1d(lifted, ws, cfg_.modes, ck, cb, true);
    Var out = add_rowvec(matmul(layer, bound(vars, "proj.weight")), bound(vars, "proj.bias"));
    return reshape(out, {n});
  }
  Var flat = reshape(in, {n * n, static_cast<std::size_t>(cfg_.input_channels())});
  Var lifted = reshape(add_rowvec(matmul(flat, w), b), {n, n, static_cast<std::size_t>(cfg_.d_v)});
  Var layer = classical_fourier_layer_2d(lifted, ws, cfg_.modes_x, cfg_.modes_y, ck, cb, true);
  Var conv =
      conv_circular_2d(layer, bound(vars, "global_conv.weight"), bound(vars, "global_conv.bias"));
  Var pf = reshape(conv, {n * n, static_cast<std::size_t>(cfg_.d_v)});
  Var h = gelu(add_rowvec(matmul(pf, bound(vars, "proj.w1")), bound(vars, "proj.b1")));
  Var out = add_rowvec(matmul(h, bound(vars, "proj.w2")), bound(vars, "proj.b2"));
  return reshape(out, {n, n});
}

// ---- checkpoint format ------------------------------------------------------

namespace {
constexpr char kCheckpointMagic[9] = "PHQFNOCK";
constexpr std::uint32_t kCheckpointVersion = 1;
}  // namespace

void save_checkpoint(const std::string& path, const PhqfnoModel& model,
                     const std::string& extra_json) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_checkpoint: cannot open '" + path + "'");
  json header{{"config", json::parse(model.config().to_canonical_json())},
              {"config_hash", fnv1a_hex(model.config().to_canonical_json())},
              {"extra", json::parse(extra_json)}};
  std::string htext = header.dump();
  os.write(kCheckpointMagic, 8);
  write_u32(os, kCheckpointVersion);
  write_u64(os, htext.size());
  write_bytes(os, htext);
  write_u64(os, model.params().size());
  for (const auto& [name, tensor] : model.params()) {
    write_u64(os, name.size());
    write_bytes(os, name);
    write_u64(os, tensor.rank());
    for (std::size_t d : tensor.shape) write_u64(os, d);
    for (double v : tensor.data) write_f64(os, v);
  }
  if (!os) throw std::runtime_error("save_checkpoint: write failed for '" + path + "'");
}

PhqfnoModel load_checkpoint_model(const std::string& path, std::string* extra_json) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_checkpoint: cannot open '" + path + "'");
  std::string magic = read_bytes(is, 8);
  if (magic != std::string(kCheckpointMagic, 8))
    throw std::runtime_error("load_checkpoint: bad magic in '" + path + "'");
  std::uint32_t version = read_u32(is);
  if (version != kCheckpointVersion)
    throw std::runtime_error("load_checkpoint: unsupported version " + std::to_string(version));
  std::string htext = read_bytes(is, read_u64(is));
  json header = json::parse(htext);
  HybridConfig cfg = HybridConfig::from_json_string(header.at("config").dump());
  if (extra_json) *extra_json = header.value("extra", json::object()).dump();

  PhqfnoModel model = PhqfnoModel::init(cfg, 0);
  std::uint64_t count = read_u64(is);
  if (count != model.params_.size())
    throw std::runtime_error("load_checkpoint: parameter count mismatch");
  for (std::uint64_t p = 0; p < count; ++p) {
    std::string name = read_bytes(is, read_u64(is));
    std::uint64_t rank = read_u64(is);
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = read_u64(is);
    if (model.params_[p].first != name || model.params_[p].second.shape != shape)
      throw std::runtime_error("load_checkpoint: parameter '" + name +
                               "' does not match the configuration");
    Tensor& tensor = model.params_[p].second;
    for (double& v : tensor.data) v = read_f64(is);
    if (!tensor.all_finite())
      throw std::runtime_error("load_checkpoint: non-finite values in '" + name + "'");
  }
  return model;
}

}  // namespace phqfno
