#include "phqfno/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace phqfno {

AdamState AdamState::init(const NamedTensors& params) {
  AdamState s;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const auto& [name, value] : params) {
    s.m.emplace_back(value.shape);
    s.v.emplace_back(value.shape);
  }
  return s;
}

void adam_step(NamedTensors& params, const std::vector<Tensor>& grads, AdamState& state,
               const AdamConfig& cfg) {
  if (grads.size() != params.size() || state.m.size() != params.size())
    throw std::invalid_argument("adam_step: parameter/gradient/state count mismatch");
  state.step += 1;
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& w = params[p].second;
    const Tensor& g = grads[p];
    if (!g.same_shape(w))
      throw std::invalid_argument("adam_step: gradient shape mismatch for parameter '" +
                                  params[p].first + "'");
    if (!g.all_finite())
      throw std::runtime_error("adam_step: non-finite gradient for parameter '" + params[p].first +
                               "'");
    Tensor& m = state.m[p];
    Tensor& v = state.v[p];
    for (std::size_t i = 0; i < w.data.size(); ++i) {
      m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * g.data[i];
      v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * g.data[i] * g.data[i];
      double mhat = m.data[i] / bc1;
      double vhat = v.data[i] / bc2;
      w.data[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

}  // namespace phqfno
