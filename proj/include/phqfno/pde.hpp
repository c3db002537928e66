#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "phqfno/parallel.hpp"
#include "phqfno/tensor.hpp"

namespace phqfno {

/// Mean-zero Gaussian random field sampled spectrally from the covariance
/// operator amplitude * (-Laplacian + shift I)^exponent on the periodic
/// unit domain; per-mode variance amplitude * (4 pi^2 |k|^2 + shift)^exponent.
struct GrfSpec {
  int grid = 256;
  int dim = 1;
  double amplitude = 18.52025917745213;  // 7^(3/2)
  double shift = 49.0;
  double exponent = -2.5;
  std::uint64_t seed = 0;
};

double grf_mode_stddev(const GrfSpec& spec, double k_squared);
std::vector<Tensor> sample_grf_1d(const GrfSpec& spec, int count);
std::vector<Tensor> sample_grf_2d(const GrfSpec& spec, int count);

struct BurgersOptions {
  double viscosity = 0.1;  // unstated in the source experiments; recorded in shard metadata
  double t_end = 1.0;
  int fine_grid = 256;
  double dt = 1e-3;
  double min_dt = 1e-7;
};

/// Pseudo-spectral viscous Burgers solve with 2/3 dealiasing,
/// Crank-Nicolson diffusion and Heun advection, periodic on (0,1).
/// u0 and the result live on the fine grid.
Tensor solve_burgers(const Tensor& u0, const BurgersOptions& opt);

struct NavierStokesOptions {
  double viscosity = 1e-3;
  double t0 = 30.0;
  double t1 = 31.0;
  int fine_grid = 64;
  double dt = 1e-2;
  bool forcing = true;  // 0.1 (sin(2 pi (x+y)) + cos(2 pi (x+y)))
};

/// Vorticity-streamfunction Navier-Stokes on the periodic unit square:
/// integrates from t = 0 and returns (w(t0), w(t1)) on the fine grid.
/// Non-zero-mean input has its mean subtracted (with a warning).
std::pair<Tensor, Tensor> solve_ns_vorticity_span(const Tensor& w0,
                                                  const NavierStokesOptions& opt);
Tensor solve_ns_vorticity(const Tensor& w0, const NavierStokesOptions& opt);

/// Restriction to a coarse grid by subsampling (1-D or 2-D square fields).
Tensor restrict_to(const Tensor& fine, int coarse);

/// (input, target) sample pairs plus grid metadata in canonical JSON.
struct DatasetShard {
  Tensor inputs;   // (N, grid...) row-major
  Tensor targets;  // same layout
  std::string metadata_json = "{}";

  std::size_t size() const { return inputs.shape.empty() ? 0 : inputs.shape[0]; }
  Tensor input_sample(std::size_t i) const;
  Tensor target_sample(std::size_t i) const;
  /// Equal-size contiguous shards; the sample count is truncated to a
  /// multiple of `world`.
  DatasetShard worker_slice(int rank, int world) const;
  DatasetShard head(std::size_t n) const;
};

/// Binary shard format: 16-byte magic+version, length-prefixed canonical
/// JSON metadata, then the raw little-endian f64 arrays in declared order.
void write_shard(const std::string& path, const DatasetShard& shard);
DatasetShard read_shard(const std::string& path);

DatasetShard generate_burgers_dataset(int count, std::uint64_t seed, const BurgersOptions& opt,
                                      int coarse_grid, const ExecPolicy& policy);
DatasetShard generate_ns_dataset(int count, std::uint64_t seed, const NavierStokesOptions& opt,
                                 int coarse_grid, const ExecPolicy& policy);

/// Coarse-grid snapshots of one Burgers trajectory at uniform time steps
/// (t = 0, snap_dt, ..., t_end), for the shock experiment.
std::vector<Tensor> burgers_trajectory_snapshots(const Tensor& u0_fine, const BurgersOptions& opt,
                                                 double snap_dt, int coarse_grid);

/// Pairs (u(t), u(t + snap_dt)) from trajectory snapshots, split at t_split:
/// pairs whose input time is below t_split go to train, the rest to test.
std::pair<DatasetShard, DatasetShard> shock_pair_split(const std::vector<Tensor>& snaps,
                                                       double snap_dt, double t_split,
                                                       const std::string& metadata_json);

}  // namespace phqfno
