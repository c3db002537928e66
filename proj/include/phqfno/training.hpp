#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "phqfno/adam.hpp"
#include "phqfno/hybrid.hpp"
#include "phqfno/parallel.hpp"
#include "phqfno/pde.hpp"

namespace phqfno {

/// Batch-mean relative L2 error ||pred - true|| / ||true|| of one sample.
/// Throws on a zero-norm target.
double relative_l2_loss(const Tensor& pred, const Tensor& truth);

/// Collective communication contract of one worker group: scatter once,
/// allreduce per step, no parameter server. allreduce_mean leaves every
/// worker with the elementwise mean of all workers' vectors, computed in
/// rank order so the result is bit-identical on every rank.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual int rank() const = 0;
  virtual int world_size() const = 0;
  virtual void allreduce_mean(std::vector<double>& data) = 0;
};

/// In-process channel group: the worker threads of one process meet at a
/// shared rendezvous. The test and default-CLI transport.
class InProcessGroup {
 public:
  explicit InProcessGroup(int world);
  ~InProcessGroup();
  Transport& transport(int rank);

  struct Shared;  // rendezvous state, defined in the implementation

 private:
  std::unique_ptr<Shared> shared_;
  std::vector<std::unique_ptr<Transport>> channels_;
};

/// Local TCP transport: rank 0 listens on the port, other ranks connect and
/// send their vectors; rank 0 reduces in rank order and broadcasts back.
/// Worker disconnects and length divergence raise errors naming the rank.
class SocketTransport : public Transport {
 public:
  static std::unique_ptr<SocketTransport> create(int rank, int world, int port);
  ~SocketTransport() override;
  int rank() const override { return rank_; }
  int world_size() const override { return world_; }
  void allreduce_mean(std::vector<double>& data) override;

 private:
  SocketTransport(int rank, int world);
  int rank_ = 0;
  int world_ = 1;
  int server_fd_ = -1;
  int peer_fd_ = -1;              // rank > 0: connection to rank 0
  std::vector<int> worker_fds_;   // rank 0: indexed by peer rank
};

struct TrainConfig {
  HybridConfig model;
  std::string problem = "burgers1d";
  int epochs = 200;
  int batch_size = 0;  // 0 = full batch
  AdamConfig adam;
  std::uint64_t seed = 0;
  int checkpoint_every = 0;  // epochs between checkpoints; 0 = final only

  std::string to_canonical_json() const;
  static TrainConfig from_json_string(const std::string& text);
  std::string hash() const;
};

struct MetricsRow {
  int epoch = 0;
  double global_train_loss = 0.0;
  double test_rel_error = 0.0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  PhqfnoModel model;
  std::vector<MetricsRow> history;
};

/// Data-parallel training over this worker's shard. Every worker runs the
/// same deterministic schedule; gradients are averaged through the transport
/// before each Adam step, so parameters stay bit-identical across workers.
/// A non-finite loss aborts after writing the last good checkpoint.
TrainResult train(const TrainConfig& cfg, const DatasetShard& local_train,
                  const DatasetShard& test_set, Transport& transport, const ExecPolicy& policy,
                  const std::string& checkpoint_path = "");

/// Convenience: runs `world` worker threads over in-process channels with
/// equal shards of `full_train` and returns rank 0's result.
TrainResult train_multiworker(const TrainConfig& cfg, const DatasetShard& full_train,
                              const DatasetShard& test_set, int world, const ExecPolicy& policy,
                              const std::string& checkpoint_path = "");

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& history);

}  // namespace phqfno
