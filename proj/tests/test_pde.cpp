#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "phqfno/fft.hpp"
#include "phqfno/pde.hpp"
#include "phqfno/serialize.hpp"
#include "test_helpers.hpp"

using namespace phqfno;
using namespace phqfno::testing;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TEST_CASE("GRF mode standard deviations follow the covariance spectrum") {
  GrfSpec spec;
  // sqrt(lambda_0) = sqrt(7^1.5 * 49^-2.5) = 7^-1.75
  CHECK(grf_mode_stddev(spec, 0.0) == doctest::Approx(std::pow(7.0, -1.75)).epsilon(1e-12));
  double k2 = 4.0;
  double want = std::sqrt(std::pow(7.0, 1.5) *
                          std::pow(4.0 * std::numbers::pi * std::numbers::pi * k2 + 49.0, -2.5));
  CHECK(grf_mode_stddev(spec, k2) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("GRF samples are real fields with conjugate-symmetric spectra") {
  GrfSpec spec;
  spec.grid = 32;
  spec.seed = 5;
  auto fields = sample_grf_1d(spec, 8);
  for (const Tensor& f : fields) {
    CHECK(f.all_finite());
    std::vector<std::complex<double>> c(32);
    for (std::size_t j = 0; j < 32; ++j) c[j] = {f(j), 0.0};
    c = fft_unitary_copy(c, true);
    for (std::size_t k = 1; k < 32; ++k)
      CHECK(std::abs(c[k] - std::conj(c[32 - k])) <= 1e-12);
  }

  GrfSpec spec2;
  spec2.grid = 16;
  spec2.dim = 2;
  spec2.seed = 6;
  auto fields2 = sample_grf_2d(spec2, 3);
  for (const Tensor& f : fields2) CHECK(f.all_finite());
}

TEST_CASE("empirical GRF mode variance matches lambda_k within 5 percent") {
  GrfSpec spec;
  spec.grid = 8;
  spec.seed = 11;
  const int samples = 100000;
  auto fields = sample_grf_1d(spec, samples);
  // coefficient c_k = (1/n) sum_j u_j exp(-2 pi i j k / n)
  std::vector<double> var(5, 0.0);
  for (const Tensor& f : fields) {
    for (std::size_t k = 0; k <= 4; ++k) {
      std::complex<double> c{0.0, 0.0};
      for (std::size_t j = 0; j < 8; ++j)
        c += f(j) * std::polar(1.0, -kTwoPi * static_cast<double>(j * k) / 8.0);
      c /= 8.0;
      var[k] += std::norm(c);
    }
  }
  for (std::size_t k = 0; k <= 4; ++k) {
    var[k] /= samples;
    double f = static_cast<double>(k);
    double lambda = grf_mode_stddev(spec, f * f);
    lambda *= lambda;
    CHECK(std::abs(var[k] - lambda) / lambda <= 0.05);
  }
}

TEST_CASE("burgers: zero initial condition stays zero") {
  BurgersOptions opt;
  opt.fine_grid = 64;
  opt.t_end = 0.3;
  Tensor u0({64});
  Tensor u1 = solve_burgers(u0, opt);
  for (double v : u1.data) CHECK(std::abs(v) <= 1e-14);
}

TEST_CASE("burgers: tiny sinusoid follows the linear heat decay") {
  BurgersOptions opt;
  opt.fine_grid = 128;
  opt.t_end = 0.1;
  opt.viscosity = 0.1;
  Tensor u0({128});
  for (std::size_t j = 0; j < 128; ++j)
    u0(j) = 1e-6 * std::sin(kTwoPi * static_cast<double>(j) / 128.0);
  Tensor u1 = solve_burgers(u0, opt);
  double decay = std::exp(-4.0 * std::numbers::pi * std::numbers::pi * opt.viscosity * opt.t_end);
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < 128; ++j) {
    double want = decay * u0(j);
    num += (u1(j) - want) * (u1(j) - want);
    den += want * want;
  }
  CHECK(std::sqrt(num / den) <= 1e-3);
}

TEST_CASE("burgers: energy is non-increasing for viscous unforced flow") {
  GrfSpec grf;
  grf.grid = 128;
  grf.seed = 21;
  Tensor u0 = sample_grf_1d(grf, 1)[0];
  BurgersOptions opt;
  opt.fine_grid = 128;
  double e_prev = 0.0;
  for (double v : u0.data) e_prev += v * v;
  Tensor u = u0;
  for (int step = 0; step < 5; ++step) {
    BurgersOptions hop = opt;
    hop.t_end = 0.2;
    u = solve_burgers(u, hop);
    double e = 0.0;
    for (double v : u.data) e += v * v;
    CHECK(e <= e_prev + 1e-10);
    e_prev = e;
  }
}

TEST_CASE("burgers: shock case matches a doubled-resolution reference on the coarse grid") {
  auto ic = [](std::size_t j, std::size_t n) {
    return -std::sin(std::numbers::pi * static_cast<double>(j) / static_cast<double>(n));
  };
  BurgersOptions lo;
  lo.fine_grid = 256;
  BurgersOptions hi;
  hi.fine_grid = 512;
  Tensor u_lo({256}), u_hi({512});
  for (std::size_t j = 0; j < 256; ++j) u_lo(j) = ic(j, 256);
  for (std::size_t j = 0; j < 512; ++j) u_hi(j) = ic(j, 512);
  Tensor c_lo = restrict_to(solve_burgers(u_lo, lo), 8);
  Tensor c_hi = restrict_to(solve_burgers(u_hi, hi), 8);
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < 8; ++j) {
    num += (c_lo(j) - c_hi(j)) * (c_lo(j) - c_hi(j));
    den += c_hi(j) * c_hi(j);
  }
  CHECK(std::sqrt(num / den) <= 1e-3);
}

TEST_CASE("burgers: conserved mean with zero viscosity limit approximation") {
  GrfSpec grf;
  grf.grid = 128;
  grf.seed = 31;
  Tensor u0 = sample_grf_1d(grf, 1)[0];
  BurgersOptions opt;
  opt.fine_grid = 128;
  opt.viscosity = 1e-12;  // effectively inviscid; advection conserves the mean
  opt.t_end = 0.05;
  Tensor u1 = solve_burgers(u0, opt);
  double m0 = 0.0, m1 = 0.0;
  for (std::size_t j = 0; j < 128; ++j) {
    m0 += u0(j);
    m1 += u1(j);
  }
  CHECK(std::abs(m1 - m0) / 128.0 <= 1e-8 * opt.t_end + 1e-9);
}

TEST_CASE("navier-stokes: zero vorticity with no forcing stays zero") {
  NavierStokesOptions opt;
  opt.fine_grid = 32;
  opt.forcing = false;
  opt.t0 = 0.5;
  opt.t1 = 1.0;
  Tensor w0({32, 32});
  auto [a, b] = solve_ns_vorticity_span(w0, opt);
  for (double v : a.data) CHECK(std::abs(v) <= 1e-14);
  for (double v : b.data) CHECK(std::abs(v) <= 1e-14);
}

TEST_CASE("navier-stokes: Taylor-Green mode decays at the exact viscous rate") {
  NavierStokesOptions opt;
  opt.fine_grid = 64;
  opt.forcing = false;
  opt.t0 = 0.0;
  opt.t1 = 1.0;
  opt.viscosity = 1e-3;
  Tensor w0({64, 64});
  for (std::size_t i = 0; i < 64; ++i)
    for (std::size_t j = 0; j < 64; ++j)
      w0(i, j) = std::sin(kTwoPi * static_cast<double>(i) / 64.0) *
                 std::sin(kTwoPi * static_cast<double>(j) / 64.0);
  Tensor w1 = solve_ns_vorticity(w0, opt);
  double decay = std::exp(-8.0 * std::numbers::pi * std::numbers::pi * opt.viscosity * opt.t1);
  double num = 0.0, den = 0.0;
  for (std::size_t p = 0; p < w0.data.size(); ++p) {
    double want = decay * w0.data[p];
    num += (w1.data[p] - want) * (w1.data[p] - want);
    den += want * want;
  }
  CHECK(std::sqrt(num / den) <= 1e-3);
}

TEST_CASE("navier-stokes: smooth random field matches a doubled-resolution reference") {
  // band-limited random initial vorticity evaluated analytically on each grid
  std::mt19937_64 gen = rng(41);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  struct Mode {
    int kx, ky;
    double a, b;
  };
  std::vector<Mode> modes;
  for (int kx = 1; kx <= 3; ++kx)
    for (int ky = 1; ky <= 3; ++ky) modes.push_back({kx, ky, dist(gen), dist(gen)});
  auto eval_ic = [&](std::size_t n) {
    Tensor w({n, n});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double x = static_cast<double>(i) / static_cast<double>(n);
        double y = static_cast<double>(j) / static_cast<double>(n);
        double v = 0.0;
        for (const Mode& m : modes)
          v += m.a * std::sin(kTwoPi * (m.kx * x + m.ky * y)) +
               m.b * std::cos(kTwoPi * (m.kx * x - m.ky * y));
        w(i, j) = v;
      }
    return w;
  };
  NavierStokesOptions lo;
  lo.fine_grid = 64;
  lo.t0 = 0.0;
  lo.t1 = 3.0;
  NavierStokesOptions hi = lo;
  hi.fine_grid = 128;
  Tensor c_lo = restrict_to(solve_ns_vorticity(eval_ic(64), lo), 8);
  Tensor c_hi = restrict_to(solve_ns_vorticity(eval_ic(128), hi), 8);
  double num = 0.0, den = 0.0;
  for (std::size_t p = 0; p < c_lo.data.size(); ++p) {
    num += (c_lo.data[p] - c_hi.data[p]) * (c_lo.data[p] - c_hi.data[p]);
    den += c_hi.data[p] * c_hi.data[p];
  }
  CHECK(std::sqrt(num / den) <= 1e-2);
}

TEST_CASE("navier-stokes: nonzero mean input is centered with a warning") {
  NavierStokesOptions opt;
  opt.fine_grid = 16;
  opt.forcing = false;
  opt.t0 = 0.0;
  opt.t1 = 0.1;
  Tensor w0({16, 16}, 3.0);  // pure mean
  Tensor w1 = solve_ns_vorticity(w0, opt);
  for (double v : w1.data) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("shard io: bit-exact round trip, golden bytes, error paths") {
  DatasetShard shard;
  shard.inputs = Tensor({2, 4}, {0.0, 1.5, -2.25, 3.0, -0.5, 0.125, 7.0, -1.0});
  shard.targets = Tensor({2, 4}, {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0});
  shard.metadata_json = "{\"problem\":\"golden\",\"seed\":7}";
  write_shard("shard_test.bin", shard);
  DatasetShard back = read_shard("shard_test.bin");
  CHECK(back.inputs.shape == shard.inputs.shape);
  for (std::size_t i = 0; i < shard.inputs.data.size(); ++i)
    CHECK(back.inputs.data[i] == shard.inputs.data[i]);
  for (std::size_t i = 0; i < shard.targets.data.size(); ++i)
    CHECK(back.targets.data[i] == shard.targets.data[i]);
  CHECK(back.metadata_json.find("golden") != std::string::npos);

  // the on-disk encoding is fixed little-endian; the byte stream of this
  // shard must never change across platforms or releases
  std::ifstream is("shard_test.bin", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  CHECK(fnv1a_hex(bytes) == "c89c87fdc3d4b75f");

  {
    std::ofstream trunc("shard_trunc.bin", std::ios::binary);
    trunc.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 24));
  }
  CHECK_THROWS_AS(read_shard("shard_trunc.bin"), std::runtime_error);

  DatasetShard bad = shard;
  bad.inputs.data[0] = std::nan("");
  CHECK_THROWS_AS(write_shard("shard_nan.bin", bad), std::runtime_error);
  std::remove("shard_test.bin");
  std::remove("shard_trunc.bin");
}

TEST_CASE("worker slices are disjoint, equal-sized, and truncate the tail") {
  DatasetShard shard;
  shard.inputs = Tensor({11, 2});
  shard.targets = Tensor({11, 2});
  for (std::size_t i = 0; i < 11; ++i) {
    shard.inputs(i, 0) = static_cast<double>(i);
    shard.targets(i, 0) = 100.0 + static_cast<double>(i);
  }
  for (int r = 0; r < 3; ++r) {
    DatasetShard s = shard.worker_slice(r, 3);
    CHECK(s.size() == 3);  // 11 truncated to 9
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(s.inputs(i, 0) == static_cast<double>(r * 3 + static_cast<int>(i)));
  }
}

TEST_CASE("dataset generation produces finite aligned pairs with metadata") {
  BurgersOptions opt;
  opt.fine_grid = 64;
  opt.t_end = 0.2;
  DatasetShard shard = generate_burgers_dataset(4, 17, opt, 8, ExecPolicy::serial());
  CHECK(shard.size() == 4);
  CHECK(shard.inputs.shape == std::vector<std::size_t>{4, 8});
  CHECK(shard.inputs.all_finite());
  CHECK(shard.targets.all_finite());
  CHECK(shard.metadata_json.find("burgers1d") != std::string::npos);
  CHECK(shard.metadata_json.find("viscosity_assumed") != std::string::npos);

  NavierStokesOptions nopt;
  nopt.fine_grid = 16;
  nopt.t0 = 0.1;
  nopt.t1 = 0.2;
  DatasetShard ns = generate_ns_dataset(2, 19, nopt, 8, ExecPolicy::serial());
  CHECK(ns.size() == 2);
  CHECK(ns.inputs.shape == std::vector<std::size_t>{2, 8, 8});
  CHECK(ns.inputs.all_finite());
}

TEST_CASE("trajectory snapshots and the shock pair split") {
  BurgersOptions opt;
  opt.fine_grid = 64;
  opt.t_end = 1.0;
  opt.viscosity = 0.1;
  Tensor u0({64});
  for (std::size_t j = 0; j < 64; ++j)
    u0(j) = -std::sin(std::numbers::pi * static_cast<double>(j) / 64.0);
  auto snaps = burgers_trajectory_snapshots(u0, opt, 0.25, 8);
  CHECK(snaps.size() == 5);  // t = 0, .25, .5, .75, 1
  auto [train, test] = shock_pair_split(snaps, 0.25, 0.5, "{\"problem\":\"shock\"}");
  CHECK(train.size() == 2);  // inputs at t = 0, .25
  CHECK(test.size() == 2);   // inputs at t = .5, .75
  for (std::size_t j = 0; j < 8; ++j) {
    CHECK(train.inputs(0, j) == snaps[0](j));
    CHECK(train.targets(0, j) == snaps[1](j));
    CHECK(test.inputs(0, j) == snaps[2](j));
  }
}
