#include "phqfno/training.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <fstream>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "phqfno/serialize.hpp"

namespace phqfno {

using nlohmann::json;

double relative_l2_loss(const Tensor& pred, const Tensor& truth) {
  if (!pred.same_shape(truth))
    throw std::invalid_argument("relative_l2_loss: shape mismatch " +
                                shape_to_string(pred.shape) + " vs " +
                                shape_to_string(truth.shape));
  double dn = 0.0, tn = 0.0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    double d = pred.data[i] - truth.data[i];
    dn += d * d;
    tn += truth.data[i] * truth.data[i];
  }
  if (tn == 0.0) throw std::invalid_argument("relative_l2_loss: target has zero norm");
  return std::sqrt(dn) / std::sqrt(tn);
}

// ---- in-process transport ----------------------------------------------------

struct InProcessGroup::Shared {
  std::mutex m;
  std::condition_variable cv;
  int world = 1;
  int arrived = 0;
  std::uint64_t generation = 0;
  std::vector<const std::vector<double>*> slots;

  explicit Shared(int w) : world(w), slots(static_cast<std::size_t>(w), nullptr) {}

  void barrier() {
    std::unique_lock<std::mutex> lock(m);
    std::uint64_t gen = generation;
    if (++arrived == world) {
      arrived = 0;
      ++generation;
      cv.notify_all();
    } else {
      cv.wait(lock, [&] { return generation != gen; });
    }
  }
};

namespace {

class InProcessChannel : public Transport {
 public:
  InProcessChannel(InProcessGroup::Shared* shared, int rank) : shared_(shared), rank_(rank) {}
  int rank() const override { return rank_; }
  int world_size() const override { return shared_->world; }

  void allreduce_mean(std::vector<double>& data) override {
    {
      std::lock_guard<std::mutex> lock(shared_->m);
      shared_->slots[static_cast<std::size_t>(rank_)] = &data;
    }
    shared_->barrier();  // all vectors published
    for (const auto* slot : shared_->slots)
      if (slot->size() != data.size())
        throw std::runtime_error("allreduce: gradient shape divergence across workers");
    std::vector<double> acc(data.size(), 0.0);
    for (int r = 0; r < shared_->world; ++r) {  // fixed rank order: identical bits everywhere
      const std::vector<double>& src = *shared_->slots[static_cast<std::size_t>(r)];
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += src[i];
    }
    const double inv = 1.0 / shared_->world;
    for (double& v : acc) v *= inv;
    shared_->barrier();  // everyone done reading the slots
    data = std::move(acc);
  }

 private:
  InProcessGroup::Shared* shared_;
  int rank_;
};

}  // namespace

InProcessGroup::InProcessGroup(int world) : shared_(std::make_unique<Shared>(world)) {
  for (int r = 0; r < world; ++r)
    channels_.push_back(std::make_unique<InProcessChannel>(shared_.get(), r));
}

InProcessGroup::~InProcessGroup() = default;

Transport& InProcessGroup::transport(int rank) {
  return *channels_.at(static_cast<std::size_t>(rank));
}

// ---- socket transport ---------------------------------------------------------

namespace {

void send_all(int fd, const void* buf, std::size_t len, int peer_rank) {
  const char* p = static_cast<const char*>(buf);
  while (len > 0) {
    ssize_t n = ::send(fd, p, len, MSG_NOSIGNAL);
    if (n <= 0)
      throw std::runtime_error("allreduce: worker " + std::to_string(peer_rank) + " disconnected");
    p += n;
    len -= static_cast<std::size_t>(n);
  }
}

void recv_all(int fd, void* buf, std::size_t len, int peer_rank) {
  char* p = static_cast<char*>(buf);
  while (len > 0) {
    ssize_t n = ::recv(fd, p, len, 0);
    if (n <= 0)
      throw std::runtime_error("allreduce: worker " + std::to_string(peer_rank) + " disconnected");
    p += n;
    len -= static_cast<std::size_t>(n);
  }
}

void send_frame(int fd, const std::vector<double>& data, int peer_rank) {
  std::uint64_t count = data.size();
  send_all(fd, &count, sizeof count, peer_rank);
  if (count) send_all(fd, data.data(), count * sizeof(double), peer_rank);
}

void recv_frame(int fd, std::vector<double>& data, int peer_rank, bool check_size) {
  std::uint64_t count = 0;
  recv_all(fd, &count, sizeof count, peer_rank);
  if (check_size && count != data.size())
    throw std::runtime_error("allreduce: worker " + std::to_string(peer_rank) +
                             " sent " + std::to_string(count) + " values, expected " +
                             std::to_string(data.size()));
  data.resize(count);
  if (count) recv_all(fd, data.data(), count * sizeof(double), peer_rank);
}

}  // namespace

SocketTransport::SocketTransport(int rank, int world) : rank_(rank), world_(world) {}

std::unique_ptr<SocketTransport> SocketTransport::create(int rank, int world, int port) {
  auto t = std::unique_ptr<SocketTransport>(new SocketTransport(rank, world));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);

  if (rank == 0) {
    t->server_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (t->server_fd_ < 0) throw std::runtime_error("socket transport: cannot create socket");
    int yes = 1;
    ::setsockopt(t->server_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    if (::bind(t->server_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
      throw std::runtime_error("socket transport: cannot bind port " + std::to_string(port));
    if (::listen(t->server_fd_, world) != 0)
      throw std::runtime_error("socket transport: listen failed");
    t->worker_fds_.assign(static_cast<std::size_t>(world), -1);
    for (int i = 1; i < world; ++i) {
      int fd = ::accept(t->server_fd_, nullptr, nullptr);
      if (fd < 0) throw std::runtime_error("socket transport: accept failed");
      std::uint32_t peer = 0;
      recv_all(fd, &peer, sizeof peer, -1);
      if (peer == 0 || static_cast<int>(peer) >= world)
        throw std::runtime_error("socket transport: bad rank handshake");
      t->worker_fds_[peer] = fd;
    }
  } else {
    for (int attempt = 0;; ++attempt) {
      t->peer_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
      if (::connect(t->peer_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0) break;
      ::close(t->peer_fd_);
      t->peer_fd_ = -1;
      if (attempt > 200) throw std::runtime_error("socket transport: cannot reach rank 0");
      std::this_thread::sleep_for(std::chrono::milliseconds(25));
    }
    std::uint32_t self = static_cast<std::uint32_t>(rank);
    send_all(t->peer_fd_, &self, sizeof self, 0);
  }
  return t;
}

SocketTransport::~SocketTransport() {
  if (peer_fd_ >= 0) ::close(peer_fd_);
  for (int fd : worker_fds_)
    if (fd >= 0) ::close(fd);
  if (server_fd_ >= 0) ::close(server_fd_);
}

void SocketTransport::allreduce_mean(std::vector<double>& data) {
  if (world_ == 1) return;
  if (rank_ == 0) {
    std::vector<double> acc = data;
    std::vector<double> incoming;
    for (int r = 1; r < world_; ++r) {  // rank order keeps the sum deterministic
      incoming.resize(data.size());
      recv_frame(worker_fds_[static_cast<std::size_t>(r)], incoming, r, true);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += incoming[i];
    }
    const double inv = 1.0 / world_;
    for (double& v : acc) v *= inv;
    data = std::move(acc);
    for (int r = 1; r < world_; ++r) send_frame(worker_fds_[static_cast<std::size_t>(r)], data, r);
  } else {
    send_frame(peer_fd_, data, 0);
    recv_frame(peer_fd_, data, 0, true);
  }
}

// ---- train config ---------------------------------------------------------------

std::string TrainConfig::to_canonical_json() const {
  json j{{"model", json::parse(model.to_canonical_json())},
         {"problem", problem},
         {"epochs", epochs},
         {"batch_size", batch_size},
         {"lr", adam.lr},
         {"beta1", adam.beta1},
         {"beta2", adam.beta2},
         {"eps", adam.eps},
         {"seed", seed},
         {"checkpoint_every", checkpoint_every}};
  return j.dump();
}

TrainConfig TrainConfig::from_json_string(const std::string& text) {
  json j = json::parse(text);
  TrainConfig c;
  if (j.contains("model")) c.model = HybridConfig::from_json_string(j.at("model").dump());
  c.problem = j.value("problem", std::string("burgers1d"));
  c.epochs = j.value("epochs", 200);
  c.batch_size = j.value("batch_size", 0);
  c.adam.lr = j.value("lr", 1e-3);
  c.adam.beta1 = j.value("beta1", 0.9);
  c.adam.beta2 = j.value("beta2", 0.999);
  c.adam.eps = j.value("eps", 1e-8);
  c.seed = j.value("seed", std::uint64_t{0});
  c.checkpoint_every = j.value("checkpoint_every", 0);
  return c;
}

std::string TrainConfig::hash() const { return fnv1a_hex(to_canonical_json()); }

// ---- training loop ----------------------------------------------------------------

namespace {

Tensor sample_input(const HybridConfig& cfg, const Tensor& raw) {
  return cfg.dim == 1 ? with_coords_1d(raw) : with_coords_2d(raw);
}

struct FlatLayout {
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
};

FlatLayout layout_of(const NamedTensors& params) {
  FlatLayout l;
  for (const auto& [name, t] : params) {
    l.offsets.push_back(l.total);
    l.total += t.numel();
  }
  return l;
}

void flatten_into(const std::vector<Tensor>& grads, const FlatLayout& l,
                  std::vector<double>& flat) {
  for (std::size_t p = 0; p < grads.size(); ++p)
    std::copy(grads[p].data.begin(), grads[p].data.end(), flat.begin() +
              static_cast<std::ptrdiff_t>(l.offsets[p]));
}

std::vector<Tensor> unflatten(const std::vector<double>& flat, const NamedTensors& params,
                              const FlatLayout& l) {
  std::vector<Tensor> grads;
  grads.reserve(params.size());
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor g(params[p].second.shape);
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(l.offsets[p]),
              flat.begin() + static_cast<std::ptrdiff_t>(l.offsets[p] + g.numel()),
              g.data.begin());
    grads.push_back(std::move(g));
  }
  return grads;
}

double test_error(const PhqfnoModel& model, const DatasetShard& test_set,
                  const ExecPolicy& policy) {
  const std::size_t n = test_set.size();
  if (n == 0) return 0.0;
  std::vector<double> errs(n, 0.0);
  parallel_for(n, policy, [&](std::size_t i) {
    Tensor pred = model.forward_value(sample_input(model.config(), test_set.input_sample(i)));
    errs[i] = relative_l2_loss(pred, test_set.target_sample(i));
  });
  double acc = 0.0;
  for (double e : errs) acc += e;
  return acc / static_cast<double>(n);
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const DatasetShard& local_train,
                  const DatasetShard& test_set, Transport& transport, const ExecPolicy& policy,
                  const std::string& checkpoint_path) {
  PhqfnoModel model = PhqfnoModel::init(cfg.model, cfg.seed);
  AdamState adam = AdamState::init(model.params());
  FlatLayout layout = layout_of(model.params());
  const std::size_t local_n = local_train.size();
  if (local_n == 0) throw std::invalid_argument("train: empty training shard");

  auto t_start = std::chrono::steady_clock::now();
  std::vector<MetricsRow> history;
  NamedTensors last_good = model.params();

  auto checkpoint = [&](const NamedTensors& params) {
    if (checkpoint_path.empty() || transport.rank() != 0) return;
    PhqfnoModel snapshot = model;
    snapshot.params() = params;
    json extra{{"train_config", json::parse(cfg.to_canonical_json())},
               {"train_config_hash", cfg.hash()}};
    save_checkpoint(checkpoint_path, snapshot, extra.dump());
  };

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // deterministic batch order shared by every worker's local shard
    std::vector<std::size_t> order(local_n);
    for (std::size_t i = 0; i < local_n; ++i) order[i] = i;
    const std::size_t bs = cfg.batch_size <= 0
                               ? local_n
                               : std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size),
                                                       local_n);
    if (bs < local_n) {
      std::mt19937_64 shuffle_gen(cfg.seed ^ (0x5851f42d4c957f2dull * static_cast<std::uint64_t>(epoch)));
      std::shuffle(order.begin(), order.end(), shuffle_gen);
    }

    double epoch_loss = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start + bs <= local_n; start += bs) {
      std::vector<std::vector<Tensor>> grads(bs);
      std::vector<double> losses(bs, 0.0);
      std::exception_ptr local_error;
      try {
        parallel_for(bs, policy, [&](std::size_t b) {
          std::size_t s = order[start + b];
          Tape tape;
          Var pred = model.forward(tape, sample_input(cfg.model, local_train.input_sample(s)));
          Var loss = relative_l2(pred, tape.constant(local_train.target_sample(s)));
          tape.backward(loss);
          grads[b] = tape.param_grads();
          losses[b] = tape.value(loss)(0);
        });
      } catch (...) {
        local_error = std::current_exception();
      }

      std::vector<double> flat(layout.total + 1, 0.0);
      if (local_error) {
        // poison the step so every worker leaves the collective together
        std::fill(flat.begin(), flat.end(), std::numeric_limits<double>::quiet_NaN());
      } else {
        // sample-order accumulation keeps results identical across thread counts
        std::vector<Tensor> acc = std::move(grads[0]);
        double loss_acc = losses[0];
        for (std::size_t b = 1; b < bs; ++b) {
          for (std::size_t p = 0; p < acc.size(); ++p)
            for (std::size_t i = 0; i < acc[p].data.size(); ++i)
              acc[p].data[i] += grads[b][p].data[i];
          loss_acc += losses[b];
        }
        const double inv_bs = 1.0 / static_cast<double>(bs);
        for (auto& g : acc)
          for (double& v : g.data) v *= inv_bs;
        loss_acc *= inv_bs;
        flatten_into(acc, layout, flat);
        flat[layout.total] = loss_acc;
      }
      transport.allreduce_mean(flat);
      if (local_error) {
        checkpoint(last_good);
        std::rethrow_exception(local_error);
      }
      double global_loss = flat[layout.total];

      if (!std::isfinite(global_loss)) {
        checkpoint(last_good);
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 "; last good checkpoint written");
      }
      std::vector<Tensor> global_grads = unflatten(flat, model.params(), layout);
      last_good = model.params();
      adam_step(model.params(), global_grads, adam, cfg.adam);
      epoch_loss += global_loss;
      ++steps;
    }

    MetricsRow row;
    row.epoch = epoch;
    row.global_train_loss = epoch_loss / static_cast<double>(std::max<std::size_t>(steps, 1));
    row.test_rel_error = test_error(model, test_set, policy);
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    history.push_back(row);
    if (cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0) checkpoint(model.params());
  }
  checkpoint(model.params());
  return TrainResult{std::move(model), std::move(history)};
}

TrainResult train_multiworker(const TrainConfig& cfg, const DatasetShard& full_train,
                              const DatasetShard& test_set, int world, const ExecPolicy& policy,
                              const std::string& checkpoint_path) {
  if (world <= 1) {
    InProcessGroup group(1);
    DatasetShard local = full_train.worker_slice(0, 1);
    return train(cfg, local, test_set, group.transport(0), policy, checkpoint_path);
  }
  InProcessGroup group(world);
  std::vector<TrainResult> results(static_cast<std::size_t>(world));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(world));
  std::vector<std::thread> threads;
  int per_worker_threads = std::max(1, policy.resolved_threads() / world);
  for (int r = 0; r < world; ++r) {
    threads.emplace_back([&, r] {
      try {
        DatasetShard local = full_train.worker_slice(r, world);
        ExecPolicy worker_policy{per_worker_threads};
        results[static_cast<std::size_t>(r)] = train(cfg, local, test_set, group.transport(r),
                                                     worker_policy, r == 0 ? checkpoint_path : "");
      } catch (...) {
        errors[static_cast<std::size_t>(r)] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return std::move(results[0]);
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& history) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_metrics_csv: cannot open '" + path + "'");
  os << "epoch,global_train_loss,test_rel_error,wall_seconds\n";
  char buf[128];
  for (const MetricsRow& r : history) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.6f\n", r.epoch, r.global_train_loss,
                  r.test_rel_error, r.wall_seconds);
    os << buf;
  }
}

}  // namespace phqfno
