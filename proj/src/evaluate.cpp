#include "phqfno/evaluate.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "phqfno/training.hpp"

namespace phqfno {

double cosine_similarity_batch(const std::vector<Tensor>& clean,
                               const std::vector<Tensor>& noisy) {
  if (clean.size() != noisy.size() || clean.empty())
    throw std::invalid_argument("cosine_similarity_batch: batch size mismatch");
  double acc = 0.0;
  for (std::size_t b = 0; b < clean.size(); ++b) {
    if (!clean[b].same_shape(noisy[b]))
      throw std::invalid_argument("cosine_similarity_batch: shape mismatch in element " +
                                  std::to_string(b));
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < clean[b].data.size(); ++i) {
      dot += clean[b].data[i] * noisy[b].data[i];
      na += clean[b].data[i] * clean[b].data[i];
      nb += noisy[b].data[i] * noisy[b].data[i];
    }
    if (na == 0.0 || nb == 0.0)
      throw std::invalid_argument("cosine_similarity_batch: zero-norm output in element " +
                                  std::to_string(b));
    acc += dot / (std::sqrt(na) * std::sqrt(nb));
  }
  return acc / static_cast<double>(clean.size());
}

namespace {

std::uint64_t cell_seed(std::uint64_t seed, std::size_t cell, std::size_t b) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (cell * 131 + b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  return z ^ (z >> 27);
}

Tensor add_noise(const Tensor& u, double mean, double stddev, std::uint64_t stream) {
  Tensor out = u;
  if (mean == 0.0 && stddev == 0.0) return out;
  std::mt19937_64 gen(stream);
  if (stddev == 0.0) {
    for (double& v : out.data) v += mean;
    return out;
  }
  std::normal_distribution<double> dist(mean, stddev);
  for (double& v : out.data) v += dist(gen);
  return out;
}

// branch output of one raw input field, including lifting
Tensor branch_output(const PhqfnoModel& model, const Tensor& raw, bool quantum,
                     const Tensor* lifted_noise) {
  Tape tape;
  const HybridConfig& cfg = model.config();
  Tensor in = cfg.dim == 1 ? with_coords_1d(raw) : with_coords_2d(raw);
  const std::size_t n = static_cast<std::size_t>(cfg.grid);
  Var iv = tape.constant(in);
  Var lifted;
  if (cfg.dim == 1) {
    lifted = model.lift(tape, iv);
  } else {
    Var flat = reshape(iv, {n * n, static_cast<std::size_t>(cfg.input_channels())});
    lifted = reshape(model.lift(tape, flat), {n, n, static_cast<std::size_t>(cfg.d_v)});
  }
  if (lifted_noise) lifted = add(lifted, tape.constant(*lifted_noise));
  Var out = quantum ? model.quantum_branch(tape, lifted) : model.classical_branch(tape, lifted);
  return tape.value(out);
}

}  // namespace

std::vector<NoiseSweepRow> noise_sweep(const PhqfnoModel& model, const DatasetShard& data,
                                       const NoiseSweepSpec& spec, const ExecPolicy& policy) {
  if (spec.mean_cells < 1 || spec.std_cells < 1 || spec.batch < 1)
    throw std::invalid_argument("noise_sweep: grids and batch must be nonempty");
  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(spec.batch), data.size());
  if (batch == 0) throw std::invalid_argument("noise_sweep: empty dataset");

  std::vector<std::string> layers;
  if (model.config().quantum_share() > 0) layers.push_back("quantum");
  if (model.config().d_v_c() > 0) layers.push_back("classical");

  const std::size_t cells = static_cast<std::size_t>(spec.mean_cells * spec.std_cells);
  std::vector<NoiseSweepRow> rows(cells * layers.size());

  // clean branch outputs are shared by every cell
  std::vector<std::vector<Tensor>> clean(layers.size(), std::vector<Tensor>(batch));
  for (std::size_t l = 0; l < layers.size(); ++l)
    for (std::size_t b = 0; b < batch; ++b)
      clean[l][b] = branch_output(model, data.input_sample(b), layers[l] == "quantum", nullptr);

  parallel_for(cells, policy, [&](std::size_t cell) {
    std::size_t mi = cell / static_cast<std::size_t>(spec.std_cells);
    std::size_t si = cell % static_cast<std::size_t>(spec.std_cells);
    double mean = spec.mean_cells == 1
                      ? 0.0
                      : spec.mean_max * static_cast<double>(mi) / (spec.mean_cells - 1);
    double stddev =
        spec.std_cells == 1 ? 0.0 : spec.std_max * static_cast<double>(si) / (spec.std_cells - 1);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      std::vector<Tensor> noisy(batch);
      for (std::size_t b = 0; b < batch; ++b) {
        Tensor raw = data.input_sample(b);
        if (spec.after_lifting) {
          const HybridConfig& cfg = model.config();
          std::vector<std::size_t> lshape =
              cfg.dim == 1 ? std::vector<std::size_t>{static_cast<std::size_t>(cfg.grid),
                                                      static_cast<std::size_t>(cfg.d_v)}
                           : std::vector<std::size_t>{static_cast<std::size_t>(cfg.grid),
                                                      static_cast<std::size_t>(cfg.grid),
                                                      static_cast<std::size_t>(cfg.d_v)};
          Tensor lnoise(lshape);
          Tensor zero(lshape);
          lnoise = add_noise(zero, mean, stddev, cell_seed(spec.seed, cell, b));
          noisy[b] = branch_output(model, raw, layers[l] == "quantum", &lnoise);
        } else {
          Tensor perturbed = add_noise(raw, mean, stddev, cell_seed(spec.seed, cell, b));
          noisy[b] = branch_output(model, perturbed, layers[l] == "quantum", nullptr);
        }
      }
      NoiseSweepRow row;
      row.mean = mean;
      row.stddev = stddev;
      row.similarity = cosine_similarity_batch(clean[l], noisy);
      row.layer = layers[l];
      rows[l * cells + cell] = row;
    }
  });
  return rows;
}

EvalReport evaluate(const PhqfnoModel& model, const DatasetShard& data, const ExecPolicy& policy) {
  const HybridConfig& cfg = model.config();
  std::vector<std::size_t> expect =
      cfg.dim == 1 ? std::vector<std::size_t>{static_cast<std::size_t>(cfg.grid)}
                   : std::vector<std::size_t>{static_cast<std::size_t>(cfg.grid),
                                              static_cast<std::size_t>(cfg.grid)};
  std::vector<std::size_t> got(data.inputs.shape.begin() + 1, data.inputs.shape.end());
  if (got != expect)
    throw std::invalid_argument("evaluate: checkpoint grid " + shape_to_string(expect) +
                                " does not match shard grid " + shape_to_string(got));
  EvalReport report;
  report.per_sample.assign(data.size(), 0.0);
  parallel_for(data.size(), policy, [&](std::size_t i) {
    Tensor in = cfg.dim == 1 ? with_coords_1d(data.input_sample(i))
                             : with_coords_2d(data.input_sample(i));
    report.per_sample[i] = relative_l2_loss(model.forward_value(in), data.target_sample(i));
  });
  double acc = 0.0;
  for (double e : report.per_sample) acc += e;
  report.mean = report.per_sample.empty() ? 0.0 : acc / static_cast<double>(report.per_sample.size());
  return report;
}

void write_sweep_csv(const std::string& path, const std::vector<NoiseSweepRow>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_sweep_csv: cannot open '" + path + "'");
  os << "mean,std,similarity,layer\n";
  char buf[160];
  for (const NoiseSweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%s\n", r.mean, r.stddev, r.similarity,
                  r.layer.c_str());
    os << buf;
  }
}

void write_eval_csv(const std::string& path, const EvalReport& report) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_eval_csv: cannot open '" + path + "'");
  os << "sample,rel_error\n";
  char buf[96];
  for (std::size_t i = 0; i < report.per_sample.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, report.per_sample[i]);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "mean,%.17g\n", report.mean);
  os << buf;
}

void write_fields_csv(const std::string& path, const PhqfnoModel& model,
                      const DatasetShard& data) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_fields_csv: cannot open '" + path + "'");
  const HybridConfig& cfg = model.config();
  os << (cfg.dim == 1 ? "sample,x,truth,prediction,difference\n"
                      : "sample,x,y,truth,prediction,difference\n");
  char buf[200];
  for (std::size_t i = 0; i < data.size(); ++i) {
    Tensor in = cfg.dim == 1 ? with_coords_1d(data.input_sample(i))
                             : with_coords_2d(data.input_sample(i));
    Tensor pred = model.forward_value(in);
    Tensor truth = data.target_sample(i);
    if (cfg.dim == 1) {
      for (std::size_t x = 0; x < pred.numel(); ++x) {
        std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g,%.17g\n", i, x, truth(x), pred(x),
                      pred(x) - truth(x));
        os << buf;
      }
    } else {
      for (std::size_t x = 0; x < pred.shape[0]; ++x)
        for (std::size_t y = 0; y < pred.shape[1]; ++y) {
          std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%.17g,%.17g,%.17g\n", i, x, y, truth(x, y),
                        pred(x, y), pred(x, y) - truth(x, y));
          os << buf;
        }
    }
  }
}

}  // namespace phqfno
