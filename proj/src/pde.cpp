#include "phqfno/pde.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "phqfno/fft.hpp"
#include "phqfno/qft.hpp"
#include "phqfno/serialize.hpp"

namespace phqfno {

using nlohmann::json;
using cd = std::complex<double>;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 step keeps per-sample streams independent of thread layout
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double signed_freq(std::size_t k, std::size_t n) {
  return k <= n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
}

// u_j = sum_k c_k exp(+2 pi i f_k x_j) evaluated as sqrt(n) * F+ c
std::vector<cd> synth_1d(std::vector<cd> c) {
  std::size_t n = c.size();
  fft_unitary(c, false);
  for (auto& v : c) v *= std::sqrt(static_cast<double>(n));
  return c;
}

std::vector<cd> analyze_1d(std::vector<cd> u) {
  std::size_t n = u.size();
  fft_unitary(u, true);
  for (auto& v : u) v /= std::sqrt(static_cast<double>(n));
  return u;
}

void fft2_inplace(std::vector<cd>& a, std::size_t n, bool inverse) {
  std::vector<cd> line(n);
  for (std::size_t i = 0; i < n; ++i)
    fft_unitary(std::span(a.data() + i * n, n), inverse);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) line[i] = a[i * n + j];
    fft_unitary(line, inverse);
    for (std::size_t i = 0; i < n; ++i) a[i * n + j] = line[i];
  }
}

}  // namespace

double grf_mode_stddev(const GrfSpec& spec, double k_squared) {
  return std::sqrt(spec.amplitude *
                   std::pow(4.0 * std::numbers::pi * std::numbers::pi * k_squared + spec.shift,
                            spec.exponent));
}

std::vector<Tensor> sample_grf_1d(const GrfSpec& spec, int count) {
  const std::size_t n = static_cast<std::size_t>(spec.grid);
  if (!is_power_of_two(n)) throw std::invalid_argument("sample_grf_1d: grid must be a power of two");
  std::vector<Tensor> fields;
  fields.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    std::mt19937_64 gen(mix_seed(spec.seed, static_cast<std::uint64_t>(s)));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<cd> c(n, cd{0.0, 0.0});
    for (std::size_t k = 0; k <= n / 2; ++k) {
      double f = signed_freq(k, n);
      double sd = grf_mode_stddev(spec, f * f);
      if (k == 0 || k == n / 2) {
        c[k] = {sd * normal(gen), 0.0};  // self-conjugate modes stay real
      } else {
        double a = normal(gen), b = normal(gen);
        c[k] = sd * cd{a, b} / std::sqrt(2.0);
        c[n - k] = std::conj(c[k]);
      }
    }
    std::vector<cd> u = synth_1d(std::move(c));
    Tensor field({n});
    for (std::size_t j = 0; j < n; ++j) field(j) = u[j].real();
    fields.push_back(std::move(field));
  }
  return fields;
}

std::vector<Tensor> sample_grf_2d(const GrfSpec& spec, int count) {
  const std::size_t n = static_cast<std::size_t>(spec.grid);
  if (!is_power_of_two(n)) throw std::invalid_argument("sample_grf_2d: grid must be a power of two");
  std::vector<Tensor> fields;
  fields.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    std::mt19937_64 gen(mix_seed(spec.seed ^ 0x2d2d2d2dull, static_cast<std::uint64_t>(s)));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<cd> c(n * n, cd{0.0, 0.0});
    for (std::size_t kx = 0; kx < n; ++kx)
      for (std::size_t ky = 0; ky < n; ++ky) {
        std::size_t px = (n - kx) % n, py = (n - ky) % n;
        bool self = px == kx && py == ky;
        if (!self && (px * n + py) < (kx * n + ky)) continue;  // partner already drawn
        double fx = signed_freq(kx, n), fy = signed_freq(ky, n);
        double sd = grf_mode_stddev(spec, fx * fx + fy * fy);
        if (self) {
          c[kx * n + ky] = {sd * normal(gen), 0.0};
        } else {
          double a = normal(gen), b = normal(gen);
          c[kx * n + ky] = sd * cd{a, b} / std::sqrt(2.0);
          c[px * n + py] = std::conj(c[kx * n + ky]);
        }
      }
    fft2_inplace(c, n, false);
    Tensor field({n, n});
    for (std::size_t i = 0; i < n * n; ++i) field.data[i] = c[i].real() * static_cast<double>(n);
    fields.push_back(std::move(field));
  }
  return fields;
}

// ---- Burgers ---------------------------------------------------------------

namespace {

// spectrum of -d/dx (u^2 / 2) with 2/3-rule dealiasing
std::vector<cd> burgers_rhs(const std::vector<cd>& u_hat, std::size_t n) {
  std::vector<cd> u = u_hat;
  fft_unitary(u, false);  // to physical, up to the sqrt(n) synthesis factor
  for (auto& v : u) v = v * v;
  fft_unitary(u, true);
  // synthesis/analysis factors cancel except one sqrt(n) from the product
  double scale = std::sqrt(static_cast<double>(n));
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    double f = signed_freq(k, n);
    bool dealias = std::abs(f) > static_cast<double>(n) / 3.0;
    out[k] = dealias ? cd{0.0, 0.0} : cd{0.0, -kTwoPi * f} * u[k] * scale * 0.5;
  }
  return out;
}

double max_abs(const std::vector<cd>& u_hat, std::size_t n) {
  std::vector<cd> u = u_hat;
  fft_unitary(u, false);
  double m = 0.0;
  for (const auto& v : u) m = std::max(m, std::abs(v.real()) * std::sqrt(static_cast<double>(n)));
  return m;
}

}  // namespace

Tensor solve_burgers(const Tensor& u0, const BurgersOptions& opt) {
  if (u0.rank() != 1) throw std::invalid_argument("solve_burgers: u0 must be 1-D");
  const std::size_t n = u0.shape[0];
  std::vector<cd> c(n);
  for (std::size_t j = 0; j < n; ++j) c[j] = {u0.data[j], 0.0};
  c = analyze_1d(std::move(c));

  std::vector<double> diffusion(n);
  for (std::size_t k = 0; k < n; ++k) {
    double f = signed_freq(k, n);
    diffusion[k] = opt.viscosity * kTwoPi * kTwoPi * f * f;
  }

  const double dx = 1.0 / static_cast<double>(n);
  double t = 0.0;
  while (t < opt.t_end - 1e-12) {
    double dt = std::min(opt.dt, opt.t_end - t);
    // explicit advection obeys a CFL bound; shrink the step when violated
    double umax = max_abs(c, n);
    while (umax * dt / dx > 0.8) {
      dt *= 0.5;
      if (dt < opt.min_dt)
        throw std::runtime_error("solve_burgers: CFL forces dt below the minimum step");
    }
    std::vector<cd> rhs0 = burgers_rhs(c, n);
    std::vector<cd> pred(n), next(n);
    for (std::size_t k = 0; k < n; ++k) {
      double a = 1.0 - 0.5 * dt * diffusion[k];
      double b = 1.0 + 0.5 * dt * diffusion[k];
      pred[k] = (a * c[k] + dt * rhs0[k]) / b;
    }
    std::vector<cd> rhs1 = burgers_rhs(pred, n);
    for (std::size_t k = 0; k < n; ++k) {
      double a = 1.0 - 0.5 * dt * diffusion[k];
      double b = 1.0 + 0.5 * dt * diffusion[k];
      next[k] = (a * c[k] + 0.5 * dt * (rhs0[k] + rhs1[k])) / b;
    }
    c = std::move(next);
    t += dt;
  }

  std::vector<cd> u = synth_1d(std::move(c));
  Tensor out({n});
  for (std::size_t j = 0; j < n; ++j) out(j) = u[j].real();
  if (!out.all_finite()) throw std::runtime_error("solve_burgers: solution blew up");
  return out;
}

// ---- Navier-Stokes vorticity-streamfunction ---------------------------------

namespace {

struct NsWorkspace {
  std::size_t n;
  std::vector<double> fx, fy, lap, diffusion;
  std::vector<cd> forcing_hat;

  explicit NsWorkspace(std::size_t n_, const NavierStokesOptions& opt) : n(n_) {
    fx.resize(n * n);
    fy.resize(n * n);
    lap.resize(n * n);
    diffusion.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double a = signed_freq(i, n), b = signed_freq(j, n);
        fx[i * n + j] = a;
        fy[i * n + j] = b;
        lap[i * n + j] = kTwoPi * kTwoPi * (a * a + b * b);
        diffusion[i * n + j] = opt.viscosity * lap[i * n + j];
      }
    forcing_hat.assign(n * n, cd{0.0, 0.0});
    if (opt.forcing) {
      std::vector<cd> f(n * n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          double x = static_cast<double>(i) / static_cast<double>(n);
          double y = static_cast<double>(j) / static_cast<double>(n);
          f[i * n + j] = {0.1 * (std::sin(kTwoPi * (x + y)) + std::cos(kTwoPi * (x + y))), 0.0};
        }
      fft2_inplace(f, n, true);
      for (auto& v : f) v /= static_cast<double>(n);  // analysis scaling
      forcing_hat = std::move(f);
    }
  }

  // -(u . grad w) spectrum with 2/3 dealiasing
  std::vector<cd> advection(const std::vector<cd>& w_hat) const {
    std::vector<cd> psi(n * n), wx(n * n), wy(n * n), u(n * n), v(n * n);
    for (std::size_t p = 0; p < n * n; ++p) {
      psi[p] = lap[p] > 0.0 ? w_hat[p] / lap[p] : cd{0.0, 0.0};
      wx[p] = cd{0.0, kTwoPi * fx[p]} * w_hat[p];
      wy[p] = cd{0.0, kTwoPi * fy[p]} * w_hat[p];
      u[p] = cd{0.0, kTwoPi * fy[p]} * psi[p];    // u = d(psi)/dy
      v[p] = cd{0.0, -kTwoPi * fx[p]} * psi[p];   // v = -d(psi)/dx
    }
    const double synth = static_cast<double>(n);
    fft2_inplace(u, n, false);
    fft2_inplace(v, n, false);
    fft2_inplace(wx, n, false);
    fft2_inplace(wy, n, false);
    std::vector<cd> adv(n * n);
    for (std::size_t p = 0; p < n * n; ++p)
      adv[p] = (u[p] * wx[p] + v[p] * wy[p]) * synth * synth;
    fft2_inplace(adv, n, true);
    for (std::size_t p = 0; p < n * n; ++p) {
      adv[p] /= synth;
      double limit = static_cast<double>(n) / 3.0;
      if (std::abs(fx[p]) > limit || std::abs(fy[p]) > limit) adv[p] = {0.0, 0.0};
    }
    for (auto& a : adv) a = -a;
    return adv;
  }
};

Tensor to_field(std::vector<cd> w_hat, std::size_t n) {
  fft2_inplace(w_hat, n, false);
  Tensor out({n, n});
  for (std::size_t p = 0; p < n * n; ++p) out.data[p] = w_hat[p].real() * static_cast<double>(n);
  if (!out.all_finite()) throw std::runtime_error("navier-stokes solve became unstable");
  return out;
}

}  // namespace

std::pair<Tensor, Tensor> solve_ns_vorticity_span(const Tensor& w0,
                                                  const NavierStokesOptions& opt) {
  if (w0.rank() != 2 || w0.shape[0] != w0.shape[1])
    throw std::invalid_argument("solve_ns_vorticity: w0 must be a square field");
  const std::size_t n = w0.shape[0];
  if (opt.t1 < opt.t0) throw std::invalid_argument("solve_ns_vorticity: t1 < t0");
  NsWorkspace ws(n, opt);

  double mean = 0.0;
  for (double v : w0.data) mean += v;
  mean /= static_cast<double>(n * n);
  if (std::abs(mean) > 1e-12)
    std::cerr << "[phqfno] solve_ns_vorticity: subtracting nonzero mean " << mean
              << " from the initial vorticity\n";

  std::vector<cd> w(n * n);
  for (std::size_t p = 0; p < n * n; ++p) w[p] = {w0.data[p] - mean, 0.0};
  fft2_inplace(w, n, true);
  for (auto& v : w) v /= static_cast<double>(n);

  Tensor at_t0;
  double t = 0.0;
  bool captured_t0 = false;
  auto step_until = [&](double target) {
    while (t < target - 1e-9) {
      double dt = std::min(opt.dt, target - t);
      std::vector<cd> rhs0 = ws.advection(w);
      std::vector<cd> pred(n * n), next(n * n);
      for (std::size_t p = 0; p < n * n; ++p) {
        double a = 1.0 - 0.5 * dt * ws.diffusion[p];
        double b = 1.0 + 0.5 * dt * ws.diffusion[p];
        pred[p] = (a * w[p] + dt * (rhs0[p] + ws.forcing_hat[p])) / b;
      }
      std::vector<cd> rhs1 = ws.advection(pred);
      for (std::size_t p = 0; p < n * n; ++p) {
        double a = 1.0 - 0.5 * dt * ws.diffusion[p];
        double b = 1.0 + 0.5 * dt * ws.diffusion[p];
        next[p] = (a * w[p] + 0.5 * dt * (rhs0[p] + rhs1[p]) + dt * ws.forcing_hat[p]) / b;
      }
      w = std::move(next);
      t += dt;
      if (!std::isfinite(w[0].real()))
        throw std::runtime_error("solve_ns_vorticity: instability at t = " + std::to_string(t));
    }
  };
  step_until(opt.t0);
  at_t0 = to_field(w, n);
  captured_t0 = true;
  step_until(opt.t1);
  (void)captured_t0;
  return {std::move(at_t0), to_field(std::move(w), n)};
}

Tensor solve_ns_vorticity(const Tensor& w0, const NavierStokesOptions& opt) {
  return solve_ns_vorticity_span(w0, opt).second;
}

Tensor restrict_to(const Tensor& fine, int coarse) {
  const std::size_t c = static_cast<std::size_t>(coarse);
  if (fine.rank() == 1) {
    if (fine.shape[0] % c != 0)
      throw std::invalid_argument("restrict_to: coarse grid must divide the fine grid");
    std::size_t stride = fine.shape[0] / c;
    Tensor out({c});
    for (std::size_t i = 0; i < c; ++i) out(i) = fine(i * stride);
    return out;
  }
  if (fine.rank() == 2) {
    if (fine.shape[0] % c != 0 || fine.shape[1] % c != 0)
      throw std::invalid_argument("restrict_to: coarse grid must divide the fine grid");
    std::size_t si = fine.shape[0] / c, sj = fine.shape[1] / c;
    Tensor out({c, c});
    for (std::size_t i = 0; i < c; ++i)
      for (std::size_t j = 0; j < c; ++j) out(i, j) = fine(i * si, j * sj);
    return out;
  }
  throw std::invalid_argument("restrict_to: expects a 1-D or 2-D field");
}

// ---- shard IO ---------------------------------------------------------------

Tensor DatasetShard::input_sample(std::size_t i) const {
  std::vector<std::size_t> shape(inputs.shape.begin() + 1, inputs.shape.end());
  std::size_t len = shape_numel(shape);
  Tensor out(shape);
  std::copy(inputs.data.begin() + static_cast<std::ptrdiff_t>(i * len),
            inputs.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * len), out.data.begin());
  return out;
}

Tensor DatasetShard::target_sample(std::size_t i) const {
  std::vector<std::size_t> shape(targets.shape.begin() + 1, targets.shape.end());
  std::size_t len = shape_numel(shape);
  Tensor out(shape);
  std::copy(targets.data.begin() + static_cast<std::ptrdiff_t>(i * len),
            targets.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * len), out.data.begin());
  return out;
}

DatasetShard DatasetShard::worker_slice(int rank, int world) const {
  std::size_t per = size() / static_cast<std::size_t>(world);  // truncates the tail
  DatasetShard out;
  out.metadata_json = metadata_json;
  std::vector<std::size_t> ishape(inputs.shape), tshape(targets.shape);
  ishape[0] = per;
  tshape[0] = per;
  out.inputs = Tensor(ishape);
  out.targets = Tensor(tshape);
  std::size_t ilen = shape_numel(std::span(ishape).subspan(1));
  std::size_t tlen = shape_numel(std::span(tshape).subspan(1));
  std::size_t start = static_cast<std::size_t>(rank) * per;
  std::copy(inputs.data.begin() + static_cast<std::ptrdiff_t>(start * ilen),
            inputs.data.begin() + static_cast<std::ptrdiff_t>((start + per) * ilen),
            out.inputs.data.begin());
  std::copy(targets.data.begin() + static_cast<std::ptrdiff_t>(start * tlen),
            targets.data.begin() + static_cast<std::ptrdiff_t>((start + per) * tlen),
            out.targets.data.begin());
  return out;
}

DatasetShard DatasetShard::head(std::size_t count) const {
  DatasetShard out;
  out.metadata_json = metadata_json;
  std::vector<std::size_t> ishape(inputs.shape), tshape(targets.shape);
  ishape[0] = count;
  tshape[0] = count;
  out.inputs = Tensor(ishape);
  out.targets = Tensor(tshape);
  std::copy(inputs.data.begin(), inputs.data.begin() + static_cast<std::ptrdiff_t>(out.inputs.numel()),
            out.inputs.data.begin());
  std::copy(targets.data.begin(),
            targets.data.begin() + static_cast<std::ptrdiff_t>(out.targets.numel()),
            out.targets.data.begin());
  return out;
}

namespace {
constexpr char kShardMagic[13] = "PHQFNOSHARD\0";
constexpr std::uint32_t kShardVersion = 1;
}  // namespace

void write_shard(const std::string& path, const DatasetShard& shard) {
  if (!shard.inputs.all_finite() || !shard.targets.all_finite())
    throw std::runtime_error("write_shard: non-finite values");
  if (shard.inputs.shape.empty() || shard.targets.shape.empty() ||
      shard.inputs.shape[0] != shard.targets.shape[0])
    throw std::invalid_argument("write_shard: inputs and targets must align on the sample axis");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_shard: cannot open '" + path + "'");
  json meta = json::parse(shard.metadata_json);
  meta["arrays"] = json::array({json{{"name", "inputs"}, {"shape", shard.inputs.shape}},
                                json{{"name", "targets"}, {"shape", shard.targets.shape}}});
  std::string mtext = meta.dump();
  os.write(kShardMagic, 12);
  write_u32(os, kShardVersion);
  write_u64(os, mtext.size());
  write_bytes(os, mtext);
  for (double v : shard.inputs.data) write_f64(os, v);
  for (double v : shard.targets.data) write_f64(os, v);
  if (!os) throw std::runtime_error("write_shard: write failed for '" + path + "'");
}

DatasetShard read_shard(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_shard: cannot open '" + path + "'");
  std::string magic = read_bytes(is, 12);
  if (magic != std::string(kShardMagic, 12))
    throw std::runtime_error("read_shard: bad magic in '" + path + "'");
  std::uint32_t version = read_u32(is);
  if (version != kShardVersion)
    throw std::runtime_error("read_shard: unsupported version " + std::to_string(version));
  std::string mtext = read_bytes(is, read_u64(is));
  json meta = json::parse(mtext);
  const auto& arrays = meta.at("arrays");
  if (arrays.size() != 2 || arrays[0].at("name") != "inputs" || arrays[1].at("name") != "targets")
    throw std::runtime_error("read_shard: unexpected array table");
  DatasetShard shard;
  std::vector<std::size_t> ishape = arrays[0].at("shape").get<std::vector<std::size_t>>();
  std::vector<std::size_t> tshape = arrays[1].at("shape").get<std::vector<std::size_t>>();
  shard.inputs = Tensor(ishape);
  shard.targets = Tensor(tshape);
  for (double& v : shard.inputs.data) v = read_f64(is);
  for (double& v : shard.targets.data) v = read_f64(is);
  if (!shard.inputs.all_finite() || !shard.targets.all_finite())
    throw std::runtime_error("read_shard: non-finite values in '" + path + "'");
  meta.erase("arrays");
  shard.metadata_json = meta.dump();
  return shard;
}

DatasetShard generate_burgers_dataset(int count, std::uint64_t seed, const BurgersOptions& opt,
                                      int coarse_grid, const ExecPolicy& policy) {
  GrfSpec grf;
  grf.grid = opt.fine_grid;
  grf.seed = seed;
  std::vector<Tensor> u0 = sample_grf_1d(grf, count);
  const std::size_t c = static_cast<std::size_t>(coarse_grid);
  DatasetShard shard;
  shard.inputs = Tensor({static_cast<std::size_t>(count), c});
  shard.targets = Tensor({static_cast<std::size_t>(count), c});
  parallel_for(static_cast<std::size_t>(count), policy, [&](std::size_t s) {
    Tensor u1 = solve_burgers(u0[s], opt);
    Tensor in = restrict_to(u0[s], coarse_grid);
    Tensor out = restrict_to(u1, coarse_grid);
    std::copy(in.data.begin(), in.data.end(), shard.inputs.data.begin() + static_cast<std::ptrdiff_t>(s * c));
    std::copy(out.data.begin(), out.data.end(),
              shard.targets.data.begin() + static_cast<std::ptrdiff_t>(s * c));
  });
  json meta{{"problem", "burgers1d"},
            {"viscosity", opt.viscosity},
            {"viscosity_assumed", true},
            {"t0", 0.0},
            {"t1", opt.t_end},
            {"grid", {coarse_grid}},
            {"fine_grid", opt.fine_grid},
            {"count", count},
            {"seed", seed}};
  shard.metadata_json = meta.dump();
  return shard;
}

DatasetShard generate_ns_dataset(int count, std::uint64_t seed, const NavierStokesOptions& opt,
                                 int coarse_grid, const ExecPolicy& policy) {
  GrfSpec grf;
  grf.grid = opt.fine_grid;
  grf.dim = 2;
  grf.seed = seed;
  std::vector<Tensor> w0 = sample_grf_2d(grf, count);
  for (Tensor& w : w0) {  // the solver wants zero-mean vorticity
    double mean = 0.0;
    for (double v : w.data) mean += v;
    mean /= static_cast<double>(w.numel());
    for (double& v : w.data) v -= mean;
  }
  const std::size_t c2 = static_cast<std::size_t>(coarse_grid) * static_cast<std::size_t>(coarse_grid);
  DatasetShard shard;
  shard.inputs = Tensor({static_cast<std::size_t>(count), static_cast<std::size_t>(coarse_grid),
                         static_cast<std::size_t>(coarse_grid)});
  shard.targets = shard.inputs;
  parallel_for(static_cast<std::size_t>(count), policy, [&](std::size_t s) {
    auto [wt0, wt1] = solve_ns_vorticity_span(w0[s], opt);
    Tensor in = restrict_to(wt0, coarse_grid);
    Tensor out = restrict_to(wt1, coarse_grid);
    std::copy(in.data.begin(), in.data.end(),
              shard.inputs.data.begin() + static_cast<std::ptrdiff_t>(s * c2));
    std::copy(out.data.begin(), out.data.end(),
              shard.targets.data.begin() + static_cast<std::ptrdiff_t>(s * c2));
  });
  json meta{{"problem", "navier-stokes-2d"},
            {"viscosity", opt.viscosity},
            {"forcing", "0.1 (sin(2 pi (x+y)) + cos(2 pi (x+y)))"},
            {"forcing_assumed", true},
            {"t0", opt.t0},
            {"t1", opt.t1},
            {"grid", {coarse_grid, coarse_grid}},
            {"fine_grid", opt.fine_grid},
            {"count", count},
            {"seed", seed}};
  shard.metadata_json = meta.dump();
  return shard;
}

std::vector<Tensor> burgers_trajectory_snapshots(const Tensor& u0_fine, const BurgersOptions& opt,
                                                 double snap_dt, int coarse_grid) {
  std::vector<Tensor> snaps;
  snaps.push_back(restrict_to(u0_fine, coarse_grid));
  Tensor u = u0_fine;
  BurgersOptions step = opt;
  step.t_end = snap_dt;
  int count = static_cast<int>(std::round(opt.t_end / snap_dt));
  for (int s = 0; s < count; ++s) {
    u = solve_burgers(u, step);
    snaps.push_back(restrict_to(u, coarse_grid));
  }
  return snaps;
}

std::pair<DatasetShard, DatasetShard> shock_pair_split(const std::vector<Tensor>& snaps,
                                                       double snap_dt, double t_split,
                                                       const std::string& metadata_json) {
  const std::size_t grid = snaps.front().numel();
  std::vector<std::size_t> train_ix, test_ix;
  for (std::size_t s = 0; s + 1 < snaps.size(); ++s) {
    double t_in = static_cast<double>(s) * snap_dt;
    if (t_in + snap_dt <= t_split + 1e-9)
      train_ix.push_back(s);
    else
      test_ix.push_back(s);
  }
  auto build = [&](const std::vector<std::size_t>& ix) {
    DatasetShard shard;
    shard.inputs = Tensor({ix.size(), grid});
    shard.targets = Tensor({ix.size(), grid});
    for (std::size_t r = 0; r < ix.size(); ++r) {
      std::copy(snaps[ix[r]].data.begin(), snaps[ix[r]].data.end(),
                shard.inputs.data.begin() + static_cast<std::ptrdiff_t>(r * grid));
      std::copy(snaps[ix[r] + 1].data.begin(), snaps[ix[r] + 1].data.end(),
                shard.targets.data.begin() + static_cast<std::ptrdiff_t>(r * grid));
    }
    shard.metadata_json = metadata_json;
    return shard;
  };
  return {build(train_ix), build(test_ix)};
}

}  // namespace phqfno
