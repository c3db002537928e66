#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phqfno/hybrid.hpp"
#include "phqfno/parallel.hpp"
#include "phqfno/pde.hpp"

namespace phqfno {

/// Batch cosine similarity (1/B) sum_b (x~_b . x_b) / (|x~_b| |x_b|).
/// Throws on a zero-norm member.
double cosine_similarity_batch(const std::vector<Tensor>& clean, const std::vector<Tensor>& noisy);

struct NoiseSweepSpec {
  int mean_cells = 10;
  int std_cells = 10;
  double mean_max = 0.5;  // the grids span [0, max] inclusive
  double std_max = 0.5;
  int batch = 5;
  std::uint64_t seed = 0;
  bool after_lifting = false;  // apply noise to the lifted field instead of the raw input
};

struct NoiseSweepRow {
  double mean = 0.0;
  double stddev = 0.0;
  double similarity = 0.0;
  std::string layer;  // "quantum" or "classical"
};

/// Gaussian input-noise robustness sweep: for every (mean, std) cell, the
/// batch similarity between the target Fourier layer's outputs on clean and
/// noisy inputs, for each branch the model has. Cells run in parallel with
/// independent seeded noise streams.
std::vector<NoiseSweepRow> noise_sweep(const PhqfnoModel& model, const DatasetShard& data,
                                       const NoiseSweepSpec& spec, const ExecPolicy& policy);

struct EvalReport {
  std::vector<double> per_sample;
  double mean = 0.0;
};

/// Relative L2 error of the model over a shard; throws when the checkpoint
/// grid does not match the shard.
EvalReport evaluate(const PhqfnoModel& model, const DatasetShard& data, const ExecPolicy& policy);

void write_sweep_csv(const std::string& path, const std::vector<NoiseSweepRow>& rows);
void write_eval_csv(const std::string& path, const EvalReport& report);
/// Per-sample prediction, ground truth and difference fields, flattened one
/// grid point per row (plot-ready export).
void write_fields_csv(const std::string& path, const PhqfnoModel& model, const DatasetShard& data);

}  // namespace phqfno
