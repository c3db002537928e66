#include <atomic>
#include <stdexcept>

#include "doctest.h"
#include "phqfno/evaluate.hpp"
#include "phqfno/parallel.hpp"
#include "phqfno/pde.hpp"
#include "phqfno/training.hpp"
#include "test_helpers.hpp"

using namespace phqfno;
using namespace phqfno::testing;

// The OpenMP batch loops must reproduce the serial reference path exactly:
// loop bodies write only per-index slots and reductions happen in a fixed
// order afterwards, so thread count cannot change any bit of the output.

TEST_CASE("parallel_for visits every index exactly once and propagates errors") {
  std::vector<std::atomic<int>> hits(257);
  for (auto& h : hits) h = 0;
  parallel_for(hits.size(), ExecPolicy::max_parallel(), [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) CHECK(h == 1);

  CHECK_THROWS_AS(parallel_for(64, ExecPolicy::max_parallel(),
                               [&](std::size_t i) {
                                 if (i == 13) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}

TEST_CASE("batch training step is bit-identical across serial and OpenMP policies") {
  std::mt19937_64 gen = rng(8);
  DatasetShard shard;
  shard.inputs = random_tensor(gen, {10, 8}, 0.2, 1.2);
  shard.targets = random_tensor(gen, {10, 8}, 0.2, 1.2);
  DatasetShard test = shard.head(3);

  TrainConfig cfg;
  cfg.model.d_v = 4;
  cfg.model.d_v_q = 4;
  cfg.epochs = 3;
  cfg.seed = 5;

  TrainResult serial = train_multiworker(cfg, shard, test, 1, ExecPolicy::serial());
  TrainResult parallel = train_multiworker(cfg, shard, test, 1, ExecPolicy::max_parallel());
  for (std::size_t p = 0; p < serial.model.params().size(); ++p) {
    const Tensor& a = serial.model.params()[p].second;
    const Tensor& b = parallel.model.params()[p].second;
    for (std::size_t i = 0; i < a.data.size(); ++i) CHECK(a.data[i] == b.data[i]);
  }
  for (std::size_t e = 0; e < serial.history.size(); ++e) {
    CHECK(serial.history[e].global_train_loss == parallel.history[e].global_train_loss);
    CHECK(serial.history[e].test_rel_error == parallel.history[e].test_rel_error);
  }
}

TEST_CASE("dataset generation is bit-identical across serial and OpenMP policies") {
  BurgersOptions opt;
  opt.fine_grid = 64;
  opt.t_end = 0.1;
  DatasetShard a = generate_burgers_dataset(6, 77, opt, 8, ExecPolicy::serial());
  DatasetShard b = generate_burgers_dataset(6, 77, opt, 8, ExecPolicy::max_parallel());
  for (std::size_t i = 0; i < a.inputs.data.size(); ++i)
    CHECK(a.inputs.data[i] == b.inputs.data[i]);
  for (std::size_t i = 0; i < a.targets.data.size(); ++i)
    CHECK(a.targets.data[i] == b.targets.data[i]);
}

TEST_CASE("noise sweep cells are bit-identical across serial and OpenMP policies") {
  HybridConfig mc;
  mc.d_v = 8;
  mc.d_v_q = 4;
  PhqfnoModel model = PhqfnoModel::init(mc, 3);
  std::mt19937_64 gen = rng(4);
  DatasetShard data;
  data.inputs = random_tensor(gen, {5, 8}, 0.2, 1.2);
  data.targets = data.inputs;

  NoiseSweepSpec spec;
  spec.mean_cells = 4;
  spec.std_cells = 4;
  spec.seed = 9;
  auto a = noise_sweep(model, data, spec, ExecPolicy::serial());
  auto b = noise_sweep(model, data, spec, ExecPolicy::max_parallel());
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].similarity == b[i].similarity);
    CHECK(a[i].layer == b[i].layer);
  }
}
