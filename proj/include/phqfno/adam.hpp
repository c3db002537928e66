#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "phqfno/tensor.hpp"

namespace phqfno {

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::int64_t step = 0;

  static AdamState init(const NamedTensors& params);
};

/// One Adam update with bias correction. Gradients must align with `params`;
/// a non-finite gradient entry aborts with the offending parameter's name.
void adam_step(NamedTensors& params, const std::vector<Tensor>& grads, AdamState& state,
               const AdamConfig& cfg);

}  // namespace phqfno
