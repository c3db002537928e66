// phqfno command-line interface: dataset generation, training, evaluation,
// prediction export and the input-noise robustness sweep.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "phqfno/evaluate.hpp"
#include "phqfno/hybrid.hpp"
#include "phqfno/pde.hpp"
#include "phqfno/training.hpp"

using namespace phqfno;
using nlohmann::json;

namespace {

bool log_enabled() {
  const char* level = std::getenv("PHQFNO_LOG");
  return !(level && std::string(level) == "quiet");
}

void info(const std::string& msg) {
  if (log_enabled()) std::cerr << "[phqfno] " << msg << "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct GenArgs {
  std::string problem;
  int count = 20;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  int grid = 8;
  int fine_grid = 0;  // 0 = per-problem default
  double viscosity = -1.0;
  double t_end = 1.0;
  double t0 = 30.0, t1 = 31.0;
  int threads = 0;
};

int run_gen(const GenArgs& a) {
  ExecPolicy policy{a.threads};
  DatasetShard shard;
  if (a.problem == "burgers") {
    BurgersOptions opt;
    if (a.fine_grid > 0) opt.fine_grid = a.fine_grid;
    if (a.viscosity > 0) opt.viscosity = a.viscosity;
    opt.t_end = a.t_end;
    shard = generate_burgers_dataset(a.count, a.seed, opt, a.grid, policy);
  } else {
    NavierStokesOptions opt;
    if (a.fine_grid > 0) opt.fine_grid = a.fine_grid;
    if (a.viscosity > 0) opt.viscosity = a.viscosity;
    opt.t0 = a.t0;
    opt.t1 = a.t1;
    shard = generate_ns_dataset(a.count, a.seed, opt, a.grid, policy);
  }
  std::string base = a.out_dir + "/" + a.problem;
  write_shard(base + ".shard", shard);
  std::ofstream meta(base + ".meta.json");
  meta << shard.metadata_json << "\n";
  info("wrote " + base + ".shard (" + std::to_string(shard.size()) + " samples)");
  return 0;
}

struct TrainArgs {
  std::string config_path;
  std::string train_path;
  std::string test_path;
  std::string checkpoint = "model.ckpt";
  std::string metrics = "metrics.csv";
  int workers = 1;
  std::int64_t seed = -1;
  int epochs = -1;
  int threads = 0;
};

int run_train(const TrainArgs& a) {
  TrainConfig cfg = TrainConfig::from_json_string(read_file(a.config_path));
  if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
  if (a.epochs >= 0) cfg.epochs = a.epochs;
  cfg.model.validate();
  DatasetShard train_set = read_shard(a.train_path);
  DatasetShard test_set = read_shard(a.test_path);

  const char* transport_env = std::getenv("PHQFNO_TRANSPORT");
  TrainResult result{PhqfnoModel::init(cfg.model, cfg.seed), {}};
  if (transport_env && std::string(transport_env) == "socket") {
    // one process per worker, joined over loopback sockets
    const char* rank_env = std::getenv("PHQFNO_RANK");
    const char* world_env = std::getenv("PHQFNO_WORLD");
    const char* port_env = std::getenv("PHQFNO_PORT");
    if (!rank_env || !world_env || !port_env)
      throw std::runtime_error("socket transport needs PHQFNO_RANK, PHQFNO_WORLD, PHQFNO_PORT");
    int rank = std::stoi(rank_env);
    int world = std::stoi(world_env);
    auto transport = SocketTransport::create(rank, world, std::stoi(port_env));
    DatasetShard local = train_set.worker_slice(rank, world);
    info("worker " + std::to_string(rank) + "/" + std::to_string(world) + " holds " +
         std::to_string(local.size()) + " samples");
    result = train(cfg, local, test_set, *transport, ExecPolicy{a.threads},
                   rank == 0 ? a.checkpoint : "");
    if (rank != 0) return 0;
  } else {
    result = train_multiworker(cfg, train_set, test_set, a.workers, ExecPolicy{a.threads},
                               a.checkpoint);
  }
  write_metrics_csv(a.metrics, result.history);
  if (!result.history.empty())
    info("final train loss " + std::to_string(result.history.back().global_train_loss) +
         ", test rel error " + std::to_string(result.history.back().test_rel_error));
  info("checkpoint: " + a.checkpoint + ", metrics: " + a.metrics);
  return 0;
}

struct EvalArgs {
  std::string checkpoint;
  std::string data_path;
  std::string report;
  std::string fields;
  int threads = 0;
};

int run_evaluate(const EvalArgs& a) {
  PhqfnoModel model = load_checkpoint_model(a.checkpoint);
  DatasetShard data = read_shard(a.data_path);
  EvalReport report = evaluate(model, data, ExecPolicy{a.threads});
  std::cout << "samples," << report.per_sample.size() << "\n";
  std::cout << "mean_rel_error," << report.mean << "\n";
  if (!a.report.empty()) write_eval_csv(a.report, report);
  if (!a.fields.empty()) write_fields_csv(a.fields, model, data);
  return 0;
}

struct SweepArgs {
  std::string checkpoint;
  std::string data_path;
  std::string out = "noise_sweep.csv";
  NoiseSweepSpec spec;
  int threads = 0;
};

int run_sweep(const SweepArgs& a) {
  PhqfnoModel model = load_checkpoint_model(a.checkpoint);
  DatasetShard data = read_shard(a.data_path);
  auto rows = noise_sweep(model, data, a.spec, ExecPolicy{a.threads});
  write_sweep_csv(a.out, rows);
  info("wrote " + a.out + " (" + std::to_string(rows.size()) + " rows)");
  return 0;
}

int run_inspect(const std::string& checkpoint) {
  std::string extra;
  PhqfnoModel model = load_checkpoint_model(checkpoint, &extra);
  std::cout << "config: " << model.config().to_canonical_json() << "\n";
  std::cout << "extra: " << extra << "\n";
  std::cout << "hybridization_percent: " << model.config().hybridization_percent() << "\n";
  std::size_t total = 0;
  for (const auto& [name, tensor] : model.params()) {
    std::cout << name << " " << shape_to_string(tensor.shape) << " " << tensor.numel() << "\n";
    total += tensor.numel();
  }
  std::cout << "total_parameters: " << total << "\n";
  std::cout << "quantum_learning_parameters: " << model.quantum_learning_param_count() << "\n";
  std::cout << "classical_learning_parameters (complex): "
            << model.classical_learning_param_count() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partitioned hybrid quantum/classical Fourier neural operator"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen-data", "Generate a PDE dataset shard");
  gen_cmd->add_option("problem", gen.problem, "burgers | navier-stokes")
      ->required()
      ->check(CLI::IsMember({"burgers", "navier-stokes"}));
  gen_cmd->add_option("--count", gen.count, "number of samples");
  gen_cmd->add_option("--seed", gen.seed, "RNG seed");
  gen_cmd->add_option("--out", gen.out_dir, "output directory");
  gen_cmd->add_option("--grid", gen.grid, "coarse grid points per axis");
  gen_cmd->add_option("--fine-grid", gen.fine_grid, "solver grid points per axis");
  gen_cmd->add_option("--viscosity", gen.viscosity, "viscosity coefficient");
  gen_cmd->add_option("--t-end", gen.t_end, "burgers: final time");
  gen_cmd->add_option("--t0", gen.t0, "navier-stokes: input snapshot time");
  gen_cmd->add_option("--t1", gen.t1, "navier-stokes: target snapshot time");
  gen_cmd->add_option("--threads", gen.threads, "worker threads (0 = all)");

  TrainArgs tr;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a PH-QFNO model");
  train_cmd->add_option("--config", tr.config_path, "training config JSON")->required();
  train_cmd->add_option("--train", tr.train_path, "training shard")->required();
  train_cmd->add_option("--test", tr.test_path, "test shard")->required();
  train_cmd->add_option("--out-checkpoint", tr.checkpoint, "checkpoint path");
  train_cmd->add_option("--metrics", tr.metrics, "metrics CSV path");
  train_cmd->add_option("--workers", tr.workers, "data-parallel worker count");
  train_cmd->add_option("--seed", tr.seed, "seed override");
  train_cmd->add_option("--epochs", tr.epochs, "epoch override");
  train_cmd->add_option("--threads", tr.threads, "threads per worker (0 = all)");

  EvalArgs ev;
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "Evaluate a checkpoint on a shard");
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "model checkpoint")->required();
  eval_cmd->add_option("--data", ev.data_path, "test shard")->required();
  eval_cmd->add_option("--report", ev.report, "per-sample CSV report path");
  eval_cmd->add_option("--export-fields", ev.fields, "prediction/truth/difference CSV");
  eval_cmd->add_option("--threads", ev.threads, "worker threads (0 = all)");

  SweepArgs sw;
  CLI::App* sweep_cmd = app.add_subcommand("noise-sweep", "Input-noise robustness heatmap");
  sweep_cmd->add_option("--checkpoint", sw.checkpoint, "model checkpoint")->required();
  sweep_cmd->add_option("--data", sw.data_path, "input shard")->required();
  sweep_cmd->add_option("--out", sw.out, "output CSV");
  sweep_cmd->add_option("--mean-cells", sw.spec.mean_cells, "noise mean grid size");
  sweep_cmd->add_option("--std-cells", sw.spec.std_cells, "noise std grid size");
  sweep_cmd->add_option("--mean-max", sw.spec.mean_max, "largest noise mean");
  sweep_cmd->add_option("--std-max", sw.spec.std_max, "largest noise std");
  sweep_cmd->add_option("--batch", sw.spec.batch, "batch size B");
  sweep_cmd->add_option("--seed", sw.spec.seed, "noise seed");
  sweep_cmd->add_flag("--after-lifting", sw.spec.after_lifting,
                      "perturb the lifted field instead of the raw input");
  sweep_cmd->add_option("--threads", sw.threads, "worker threads (0 = all)");

  std::string inspect_path;
  CLI::App* inspect_cmd = app.add_subcommand("inspect-checkpoint", "Describe a checkpoint");
  inspect_cmd->add_option("--checkpoint", inspect_path, "model checkpoint")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors exit 1
  }

  try {
    if (gen_cmd->parsed()) return run_gen(gen);
    if (train_cmd->parsed()) return run_train(tr);
    if (eval_cmd->parsed()) return run_evaluate(ev);
    if (sweep_cmd->parsed()) return run_sweep(sw);
    if (inspect_cmd->parsed()) return run_inspect(inspect_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
