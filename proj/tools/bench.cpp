// Benchmark comparing the serial reference path against the OpenMP one for
// the data-parallel kernels: per-sample gradient batches, dataset
// generation, and noise-sweep cells.

#include <chrono>
#include <cstdio>
#include <random>

#include "phqfno/autodiff.hpp"
#include "phqfno/evaluate.hpp"
#include "phqfno/hybrid.hpp"
#include "phqfno/parallel.hpp"
#include "phqfno/pde.hpp"
#include "phqfno/training.hpp"

using namespace phqfno;

namespace {

double seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename Fn>
double timed(Fn&& fn, int repeat) {
  double best = 1e300;
  for (int r = 0; r < repeat; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, seconds(t0));
  }
  return best;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-28s serial %8.3f s   openmp %8.3f s   speedup %5.2fx\n", name, serial, parallel,
              serial / parallel);
}

DatasetShard synthetic_batch(int count) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> dist(0.2, 1.2);
  DatasetShard shard;
  shard.inputs = Tensor({static_cast<std::size_t>(count), 8});
  shard.targets = Tensor({static_cast<std::size_t>(count), 8});
  for (double& v : shard.inputs.data) v = dist(gen);
  for (double& v : shard.targets.data) v = dist(gen);
  return shard;
}

void batch_gradients(const PhqfnoModel& model, const DatasetShard& shard,
                     const ExecPolicy& policy) {
  std::vector<double> losses(shard.size());
  parallel_for(shard.size(), policy, [&](std::size_t s) {
    Tape tape;
    Var pred = model.forward(tape, with_coords_1d(shard.input_sample(s)));
    Var loss = relative_l2(pred, tape.constant(shard.target_sample(s)));
    tape.backward(loss);
    losses[s] = tape.value(loss)(0);
  });
}

}  // namespace

int main(int argc, char** argv) {
  int samples = argc > 1 ? std::atoi(argv[1]) : 64;
  int repeat = argc > 2 ? std::atoi(argv[2]) : 3;
  std::printf("phqfno benchmark: %d samples per batch, best of %d runs, %d threads\n\n", samples,
              repeat, ExecPolicy::max_parallel().resolved_threads());

  HybridConfig cfg;
  cfg.d_v = 8;
  cfg.d_v_q = 4;  // one quantum group + classical share
  PhqfnoModel model = PhqfnoModel::init(cfg, 7);
  DatasetShard shard = synthetic_batch(samples);

  double s1 = timed([&] { batch_gradients(model, shard, ExecPolicy::serial()); }, repeat);
  double p1 = timed([&] { batch_gradients(model, shard, ExecPolicy::max_parallel()); }, repeat);
  report("hybrid forward+backward", s1, p1);

  BurgersOptions opt;
  opt.fine_grid = 256;
  opt.t_end = 0.25;
  double s2 =
      timed([&] { generate_burgers_dataset(samples / 2, 3, opt, 8, ExecPolicy::serial()); }, repeat);
  double p2 = timed(
      [&] { generate_burgers_dataset(samples / 2, 3, opt, 8, ExecPolicy::max_parallel()); }, repeat);
  report("burgers trajectory batch", s2, p2);

  NoiseSweepSpec spec;
  spec.mean_cells = 8;
  spec.std_cells = 8;
  double s3 = timed([&] { noise_sweep(model, shard, spec, ExecPolicy::serial()); }, repeat);
  double p3 = timed([&] { noise_sweep(model, shard, spec, ExecPolicy::max_parallel()); }, repeat);
  report("noise sweep cells", s3, p3);
  return 0;
}
