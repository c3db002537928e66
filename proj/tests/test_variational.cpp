#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "phqfno/statevector.hpp"
#include "phqfno/variational.hpp"
#include "test_helpers.hpp"

using namespace phqfno;
using namespace phqfno::testing;

namespace {

std::vector<double> random_angles(std::mt19937_64& gen, int n) {
  std::uniform_real_distribution<double> dist(-1.6, 1.6);
  std::vector<double> th(static_cast<std::size_t>(orthogonal_layer_params(n)));
  for (double& v : th) v = dist(gen);
  return th;
}

// complex m x n amplitude grid placed on a (rows m, cols n) two-register state
StateVector grid_state(const std::vector<std::vector<std::complex<double>>>& x, int m, int n) {
  StateVector s = StateVector::zero_state(m + n);
  s.amp[0] = {0.0, 0.0};
  double nrm = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) nrm += std::norm(x[i][j]);
  nrm = std::sqrt(nrm);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      s.amp[s.wire_mask(i) | s.wire_mask(m + j)] = x[i][j] / nrm;
  return s;
}

}  // namespace

TEST_CASE("orthogonal layer parameter count is (n/2) log2 n") {
  CHECK(orthogonal_layer_params(2) == 1);
  CHECK(orthogonal_layer_params(4) == 4);
  CHECK(orthogonal_layer_params(8) == 12);
  CHECK_THROWS_AS(orthogonal_layer_params(6), std::invalid_argument);

  CircuitProgram p = orthogonal_layer(0, 8, 0);
  CHECK(p.num_slots == 12);
  CHECK(p.gates.size() == 12);
}

TEST_CASE("effective weight: identity at zero angles, orthogonal in general") {
  std::vector<double> zero(4, 0.0);
  Tensor w0 = effective_weight(4, zero);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(w0(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));

  std::mt19937_64 gen = rng(19);
  for (int rep = 0; rep < 100; ++rep) {
    auto th = random_angles(gen, 4);
    Tensor w = effective_weight(4, th);
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b) {
        double dot = 0.0;
        for (std::size_t i = 0; i < 4; ++i) dot += w(i, a) * w(i, b);
        CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) <= 1e-10);
      }
  }

  CHECK_THROWS_AS(effective_weight(4, std::vector<double>{0.1, 0.2}), std::invalid_argument);
}

TEST_CASE("orthogonal layer at zero angles acts as the identity on the unary subspace") {
  CircuitProgram p = orthogonal_layer(0, 8, 0);
  std::vector<double> zero(12, 0.0);
  std::mt19937_64 gen = rng(29);
  auto x = random_unit_vector(gen, 8);
  StateVector s = StateVector::zero_state(8);
  s.amp[0] = {0.0, 0.0};
  for (int i = 0; i < 8; ++i) s.amp[s.wire_mask(i)] = x[static_cast<std::size_t>(i)];
  StateVector out = run(p, s, zero);
  for (std::size_t b = 0; b < out.amp.size(); ++b) CHECK(std::abs(out.amp[b] - s.amp[b]) < 1e-14);
}

TEST_CASE("running P then P-dagger(-theta) reproduces the effective weight matrix") {
  std::mt19937_64 gen = rng(331);
  for (int rep = 0; rep < 10; ++rep) {
    auto th = random_angles(gen, 4);
    Tensor w = effective_weight(4, th);
    CircuitProgram prog = orthogonal_layer(0, 4, 0);
    prog.append(orthogonal_layer_adjoint_neg(0, 4, 0));
    auto x = random_unit_vector(gen, 4);
    StateVector s = StateVector::zero_state(4);
    s.amp[0] = {0.0, 0.0};
    for (int i = 0; i < 4; ++i) s.amp[s.wire_mask(i)] = x[static_cast<std::size_t>(i)];
    StateVector out = run(prog, s, th);
    for (std::size_t i = 0; i < 4; ++i) {
      double want = 0.0;
      for (std::size_t k = 0; k < 4; ++k) want += w(i, k) * x[k];
      CHECK(std::abs(out.amp[out.wire_mask(static_cast<int>(i))].real() - want) <= 1e-10);
    }
  }
}

TEST_CASE("CZ learning block transforms selected modes and fixes the rest") {
  std::mt19937_64 gen = rng(47);
  const int m = 4, n = 4;
  RegisterSpec rows{"rows", 0, m}, cols{"cols", m, n};
  std::uniform_real_distribution<double> dist(-1.0, 1.0);

  SUBCASE("K = 0 and zero angles are identities") {
    CircuitProgram p0;
    p0.num_wires = m + n;
    append_cz_learning_block(p0, rows, cols, 0, 0);
    CHECK(p0.gates.empty());

    CircuitProgram p1;
    p1.num_wires = m + n;
    append_cz_learning_block(p1, rows, cols, 2, 0);
    std::vector<double> zero(static_cast<std::size_t>(p1.num_slots), 0.0);
    std::vector<std::vector<std::complex<double>>> x(m, std::vector<std::complex<double>>(n));
    for (auto& r : x)
      for (auto& v : r) v = {dist(gen), dist(gen)};
    StateVector s = grid_state(x, m, n);
    StateVector out = run(p1, s, zero);
    for (std::size_t b = 0; b < out.amp.size(); ++b)
      CHECK(std::abs(out.amp[b] - s.amp[b]) <= 1e-12);
  }

  SUBCASE("K = 1: mode 0 multiplied by the effective weight, other modes untouched") {
    for (int rep = 0; rep < 25; ++rep) {
      CircuitProgram prog;
      prog.num_wires = m + n;
      append_cz_learning_block(prog, rows, cols, 1, 0);
      auto th = random_angles(gen, m);
      Tensor w = effective_weight(m, th);
      std::vector<std::vector<std::complex<double>>> x(m, std::vector<std::complex<double>>(n));
      for (auto& r : x)
        for (auto& v : r) v = {dist(gen), dist(gen)};
      StateVector s = grid_state(x, m, n);
      StateVector out = run(prog, s, th);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
          std::complex<double> want = s.amp[s.wire_mask(i) | s.wire_mask(m + j)];
          if (j == 0) {
            want = {0.0, 0.0};
            for (int k = 0; k < m; ++k)
              want += w(static_cast<std::size_t>(i), static_cast<std::size_t>(k)) *
                      s.amp[s.wire_mask(k) | s.wire_mask(m)];
          }
          CHECK(std::abs(out.amp[out.wire_mask(i) | out.wire_mask(m + j)] - want) <= 1e-10);
        }
      double leaked = 0.0;
      std::vector<RegisterSpec> regs = {rows, cols};
      measure_unary_probabilities(out, regs, &leaked);
      CHECK(leaked <= 1e-10);
    }
  }

  SUBCASE("each of K modes carries its own angle vector") {
    CircuitProgram prog;
    prog.num_wires = m + n;
    append_cz_learning_block(prog, rows, cols, 3, 0);
    const int d = orthogonal_layer_params(m);
    CHECK(prog.num_slots == 3 * d);
    std::vector<double> th(static_cast<std::size_t>(3 * d));
    for (double& v : th) v = dist(gen);
    std::vector<Tensor> ws;
    for (int kk = 0; kk < 3; ++kk)
      ws.push_back(effective_weight(
          m, std::span<const double>(th).subspan(static_cast<std::size_t>(kk * d),
                                                 static_cast<std::size_t>(d))));
    std::vector<std::vector<std::complex<double>>> x(m, std::vector<std::complex<double>>(n));
    for (auto& r : x)
      for (auto& v : r) v = {dist(gen), dist(gen)};
    StateVector s = grid_state(x, m, n);
    StateVector out = run(prog, s, th);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        std::complex<double> want = s.amp[s.wire_mask(i) | s.wire_mask(m + j)];
        if (j < 3) {
          want = {0.0, 0.0};
          for (int k = 0; k < m; ++k)
            want += ws[static_cast<std::size_t>(j)](static_cast<std::size_t>(i),
                                                    static_cast<std::size_t>(k)) *
                    s.amp[s.wire_mask(k) | s.wire_mask(m + j)];
        }
        CHECK(std::abs(out.amp[out.wire_mask(i) | out.wire_mask(m + j)] - want) <= 1e-10);
      }
  }

  SUBCASE("K out of range") {
    CircuitProgram prog;
    prog.num_wires = m + n;
    CHECK_THROWS_AS(append_cz_learning_block(prog, rows, cols, n + 1, 0), std::invalid_argument);
  }
}

namespace {

StateVector grid_state_3d(const std::vector<std::complex<double>>& y, int k, int n, int m) {
  // y indexed as y[(l*n + j)*m + i] for registers (slices, cols, rows)
  StateVector s = StateVector::zero_state(k + n + m);
  s.amp[0] = {0.0, 0.0};
  double nrm = 0.0;
  for (const auto& v : y) nrm += std::norm(v);
  nrm = std::sqrt(nrm);
  for (int l = 0; l < k; ++l)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < m; ++i)
        s.amp[s.wire_mask(l) | s.wire_mask(k + j) | s.wire_mask(k + n + i)] =
            y[static_cast<std::size_t>((l * n + j) * m + i)] / nrm;
  return s;
}

}  // namespace

TEST_CASE("CCZ learning block: selected spatial mode rotated along the slice register") {
  std::mt19937_64 gen = rng(59);
  const int k = 2, n = 4, m = 2;  // 2 channels, 4x2 spatial modes
  RegisterSpec slices{"slices", 0, k}, cols{"cols", k, n}, rows{"rows", k + n, m};
  std::uniform_real_distribution<double> dist(-1.0, 1.0);

  SUBCASE("(Kx, Ky) = (0, 0) is the identity") {
    CircuitProgram prog;
    prog.num_wires = k + n + m;
    append_ccz_learning_block(prog, slices, rows, cols, 0, 0, 0);
    CHECK(prog.gates.empty());
  }

  SUBCASE("one selected mode: its slice vector is rotated, 7 others untouched") {
    for (int rep = 0; rep < 15; ++rep) {
      CircuitProgram prog;
      prog.num_wires = k + n + m;
      append_ccz_learning_block(prog, slices, rows, cols, 1, 1, 0);
      auto th = random_angles(gen, k);
      Tensor w = effective_weight(k, th);
      std::vector<std::complex<double>> y(static_cast<std::size_t>(k * n * m));
      for (auto& v : y) v = {dist(gen), dist(gen)};
      StateVector s = grid_state_3d(y, k, n, m);
      StateVector out = run(prog, s, th);
      for (int l = 0; l < k; ++l)
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < m; ++i) {
            std::size_t idx = s.wire_mask(l) | s.wire_mask(k + j) | s.wire_mask(k + n + i);
            std::complex<double> want = s.amp[idx];
            if (i == 0 && j == 0) {
              want = {0.0, 0.0};
              for (int ll = 0; ll < k; ++ll)
                want += w(static_cast<std::size_t>(l), static_cast<std::size_t>(ll)) *
                        s.amp[s.wire_mask(ll) | s.wire_mask(k) | s.wire_mask(k + n)];
            }
            CHECK(std::abs(out.amp[idx] - want) <= 1e-10);
          }
      double leaked = 0.0;
      std::vector<RegisterSpec> regs = {slices, cols, rows};
      measure_unary_probabilities(out, regs, &leaked);
      CHECK(leaked <= 1e-10);
    }
  }

  SUBCASE("(Kx, Ky) = (2, 2) modes each carry their own angles") {
    CircuitProgram prog;
    prog.num_wires = k + n + m;
    append_ccz_learning_block(prog, slices, rows, cols, 2, 2, 0);
    const int d = orthogonal_layer_params(k);
    CHECK(prog.num_slots == 4 * d);
    std::vector<double> th(static_cast<std::size_t>(4 * d));
    for (double& v : th) v = dist(gen);
    std::vector<std::complex<double>> y(static_cast<std::size_t>(k * n * m));
    for (auto& v : y) v = {dist(gen), dist(gen)};
    StateVector s = grid_state_3d(y, k, n, m);
    StateVector out = run(prog, s, th);
    int mode = 0;
    std::vector<Tensor> ws;
    for (int kx = 0; kx < 2; ++kx)
      for (int ky = 0; ky < 2; ++ky, ++mode)
        ws.push_back(effective_weight(
            k, std::span<const double>(th).subspan(static_cast<std::size_t>(mode * d),
                                                   static_cast<std::size_t>(d))));
    for (int l = 0; l < k; ++l)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i) {
          std::size_t idx = s.wire_mask(l) | s.wire_mask(k + j) | s.wire_mask(k + n + i);
          std::complex<double> want = s.amp[idx];
          if (i < 2 && j < 2) {
            const Tensor& w = ws[static_cast<std::size_t>(i * 2 + j)];
            want = {0.0, 0.0};
            for (int ll = 0; ll < k; ++ll)
              want += w(static_cast<std::size_t>(l), static_cast<std::size_t>(ll)) *
                      s.amp[s.wire_mask(ll) | s.wire_mask(k + j) | s.wire_mask(k + n + i)];
          }
          CHECK(std::abs(out.amp[idx] - want) <= 1e-10);
        }
  }

  SUBCASE("mode bounds") {
    CircuitProgram prog;
    prog.num_wires = k + n + m;
    CHECK_THROWS_AS(append_ccz_learning_block(prog, slices, rows, cols, m + 1, 1, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(append_ccz_learning_block(prog, slices, rows, cols, 1, n + 1, 0),
                    std::invalid_argument);
  }
}

TEST_CASE("the conjugation identity: active controls make the sandwich an identity") {
  // On control-active unary states, C_Z P'(-t) C_Z P(t) = 1 (the mechanism
  // that keeps non-selected modes untouched).
  std::mt19937_64 gen = rng(61);
  const int m = 4;
  RegisterSpec first{"first", 0, m};
  for (int rep = 0; rep < 100; ++rep) {
    auto th = random_angles(gen, m);
    CircuitProgram prog;
    prog.num_wires = m + 1;  // one marker wire, held |1>
    const int marker = m;
    auto zw = z_conjugation_wires(m);
    prog.append(orthogonal_layer(0, m, 0));
    for (int q : zw) prog.z(q, {marker});
    prog.append(orthogonal_layer_adjoint_neg(0, m, 0));
    for (int q : zw) prog.z(q, {marker});

    auto x = random_unit_vector(gen, m);
    StateVector s = StateVector::zero_state(m + 1);
    s.amp[0] = {0.0, 0.0};
    for (int i = 0; i < m; ++i)
      s.amp[s.wire_mask(i) | s.wire_mask(marker)] = x[static_cast<std::size_t>(i)];
    StateVector out = run(prog, s, th);
    for (std::size_t b = 0; b < out.amp.size(); ++b)
      CHECK(std::abs(out.amp[b] - s.amp[b]) <= 1e-10);
  }
}

TEST_CASE("learning block angles are differentiable via the adjoint sweep") {
  std::mt19937_64 gen = rng(67);
  const int m = 4, n = 4;
  RegisterSpec rows{"rows", 0, m}, cols{"cols", m, n};
  CircuitProgram prog;
  prog.num_wires = m + n;
  append_cz_learning_block(prog, rows, cols, 2, 0);

  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> th(static_cast<std::size_t>(prog.num_slots));
  for (double& v : th) v = dist(gen);

  std::vector<std::vector<std::complex<double>>> x(m, std::vector<std::complex<double>>(n));
  for (auto& r : x)
    for (auto& v : r) v = {dist(gen), dist(gen)};
  StateVector init = grid_state(x, m, n);
  std::vector<RegisterSpec> regs = {rows, cols};
  Tensor cot({static_cast<std::size_t>(m), static_cast<std::size_t>(n)});
  for (double& v : cot.data) v = dist(gen);

  auto cost = [&](const std::vector<double>& t) {
    StateVector s = run(prog, init, t);
    double total = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        total += cot(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) *
                 std::norm(s.amp[s.wire_mask(i) | s.wire_mask(m + j)]);
    return total;
  };
  auto g = adjoint_gradient(prog, th, init, regs, cot);
  for (std::size_t i = 0; i < th.size(); ++i) CHECK(rel_err(g[i], central_diff(cost, th, i)) <= 1e-5);
}
