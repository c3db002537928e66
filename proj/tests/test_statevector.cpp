#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "doctest.h"
#include "phqfno/statevector.hpp"
#include "test_helpers.hpp"

using namespace phqfno;
using namespace phqfno::testing;

namespace {

std::complex<double> amp_of(const StateVector& s, const std::string& label) {
  std::size_t idx = 0;
  for (char c : label) idx = (idx << 1) | (c == '1' ? 1 : 0);
  return s.amp[idx];
}

CircuitProgram random_unary_program(std::mt19937_64& gen, int wires, int gates, int params) {
  CircuitProgram prog;
  prog.num_wires = wires;
  std::uniform_int_distribution<int> wire(0, wires - 1);
  std::uniform_real_distribution<double> angle(-1.5, 1.5);
  std::uniform_int_distribution<int> kind(0, 3);
  int next_slot = 0;
  for (int i = 0; i < gates; ++i) {
    int w0 = wire(gen);
    switch (kind(gen)) {
      case 0:
        prog.phase(w0, angle(gen));
        break;
      case 1: {
        int w1 = wire(gen);
        if (w1 == w0) w1 = (w0 + 1) % wires;
        if (next_slot < params)
          prog.rbs_slot(w0, w1, next_slot++, (i % 2) ? 1.0 : -1.0);
        else
          prog.rbs(w0, w1, angle(gen));
        break;
      }
      case 2: {
        int c = wire(gen);
        if (c == w0) c = (w0 + 1) % wires;
        prog.z(w0, {c});
        break;
      }
      default:
        prog.z(w0);
        break;
    }
  }
  // make sure every slot is referenced
  while (next_slot < params) {
    int w0 = wire(gen);
    int w1 = (w0 + 1) % wires;
    prog.rbs_slot(w0, w1, next_slot++);
  }
  return prog;
}

}  // namespace

TEST_CASE("RBS rotates the unary pair as stated") {
  double th = 0.37;
  CircuitProgram prog;
  prog.num_wires = 2;
  prog.rbs(0, 1, th);

  StateVector s10 = run(prog, StateVector::basis_state("10"));
  CHECK(amp_of(s10, "10").real() == doctest::Approx(std::cos(th)));
  CHECK(amp_of(s10, "01").real() == doctest::Approx(std::sin(th)));

  StateVector s01 = run(prog, StateVector::basis_state("01"));
  CHECK(amp_of(s01, "01").real() == doctest::Approx(std::cos(th)));
  CHECK(amp_of(s01, "10").real() == doctest::Approx(-std::sin(th)));

  CircuitProgram half;
  half.num_wires = 2;
  half.rbs(0, 1, std::numbers::pi / 2);
  StateVector flip = run(half, StateVector::basis_state("10"));
  CHECK(std::abs(amp_of(flip, "01") - std::complex<double>{1.0, 0.0}) < 1e-12);
}

TEST_CASE("RBS matrix equals the reconfigurable beam splitter form and is unitary") {
  CircuitProgram prog;
  prog.num_wires = 2;
  prog.rbs(0, 1, 0.81);
  auto u = program_unitary(prog);
  double c = std::cos(0.81), s = std::sin(0.81);
  // basis order |00>, |01>, |10>, |11>
  CHECK(u[0][0].real() == doctest::Approx(1.0));
  CHECK(u[1][1].real() == doctest::Approx(c));
  CHECK(u[1][2].real() == doctest::Approx(s));
  CHECK(u[2][1].real() == doctest::Approx(-s));
  CHECK(u[2][2].real() == doctest::Approx(c));
  CHECK(u[3][3].real() == doctest::Approx(1.0));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      std::complex<double> dot{0.0, 0.0};
      for (int k = 0; k < 4; ++k) dot += std::conj(u[k][i]) * u[k][j];
      CHECK(std::abs(dot - (i == j ? 1.0 : 0.0)) < 1e-12);
    }
}

TEST_CASE("X on the first wire maps |0000> to |1000>") {
  CircuitProgram prog;
  prog.num_wires = 4;
  prog.x(0);
  StateVector s = run(prog, StateVector::zero_state(4));
  CHECK(std::abs(amp_of(s, "1000") - std::complex<double>{1.0, 0.0}) < 1e-15);
}

TEST_CASE("empty program leaves the state unchanged; U then U-dagger is identity") {
  CircuitProgram empty;
  empty.num_wires = 3;
  StateVector s = run(empty, StateVector::basis_state("010"));
  CHECK(std::abs(amp_of(s, "010") - std::complex<double>{1.0, 0.0}) < 1e-15);

  CircuitProgram prog;
  prog.num_wires = 2;
  prog.rbs(0, 1, 0.4);
  prog.rbs(0, 1, -0.4);
  StateVector rt = run(prog, StateVector::basis_state("10"));
  CHECK(std::abs(amp_of(rt, "10") - std::complex<double>{1.0, 0.0}) < 1e-12);
}

TEST_CASE("gate application rejects duplicate or out-of-range wires") {
  StateVector s = StateVector::zero_state(2);
  Gate bad_dup{GateKind::Rbs, 0, 0, {}, -1, 1.0, 0.3};
  CHECK_THROWS_AS(apply_gate(s, bad_dup), std::invalid_argument);
  Gate bad_range{GateKind::PauliX, 5, -1, {}, -1, 1.0, 0.0};
  CHECK_THROWS_AS(apply_gate(s, bad_range), std::invalid_argument);
  Gate bad_ctrl{GateKind::PauliZ, 0, -1, {0}, -1, 1.0, 0.0};
  CHECK_THROWS_AS(apply_gate(s, bad_ctrl), std::invalid_argument);
}

TEST_CASE("norm is preserved through long random gate sequences") {
  std::mt19937_64 gen = rng(42);
  for (int rep = 0; rep < 10; ++rep) {
    CircuitProgram prog = random_unary_program(gen, 5, 120, 0);
    StateVector s = StateVector::zero_state(5);
    // random-ish superposition
    for (std::size_t i = 0; i < s.amp.size(); ++i)
      s.amp[i] = {std::cos(0.1 * static_cast<double>(i + rep)),
                  std::sin(0.23 * static_cast<double>(i))};
    double n0 = s.norm();
    for (auto& a : s.amp) a /= n0;
    s = run(prog, std::move(s));
    CHECK(std::abs(s.norm() - 1.0) <= 1e-10);
  }
}

TEST_CASE("RBS angles compose on the unary pair and Z conjugation flips the angle") {
  CircuitProgram composed;
  composed.num_wires = 2;
  composed.rbs(0, 1, 0.3);
  composed.rbs(0, 1, 0.5);
  CircuitProgram direct;
  direct.num_wires = 2;
  direct.rbs(0, 1, 0.8);
  auto uc = program_unitary(composed);
  auto ud = program_unitary(direct);
  for (int i = 1; i <= 2; ++i)
    for (int j = 1; j <= 2; ++j) CHECK(std::abs(uc[i][j] - ud[i][j]) < 1e-12);

  // Z1 RBS(t) Z1 = RBS(-t) as full 4x4 matrices
  CircuitProgram conj;
  conj.num_wires = 2;
  conj.z(0);
  conj.rbs(0, 1, 0.7);
  conj.z(0);
  CircuitProgram neg;
  neg.num_wires = 2;
  neg.rbs(0, 1, -0.7);
  auto ua = program_unitary(conj);
  auto ub = program_unitary(neg);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(std::abs(ua[i][j] - ub[i][j]) < 1e-12);
}

TEST_CASE("CZ and CCZ are diagonal sign matrices and self-inverse") {
  CircuitProgram cz;
  cz.num_wires = 2;
  cz.z(1, {0});
  auto u = program_unitary(cz);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i != j)
        CHECK(std::abs(u[i][j]) < 1e-15);
      else
        CHECK(std::abs(std::abs(u[i][j].real()) - 1.0) < 1e-15);
    }
  CHECK(u[3][3].real() == doctest::Approx(-1.0));

  CircuitProgram ccz_twice;
  ccz_twice.num_wires = 3;
  ccz_twice.z(2, {0, 1});
  ccz_twice.z(2, {0, 1});
  auto u2 = program_unitary(ccz_twice);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      CHECK(std::abs(u2[i][j] - (i == j ? 1.0 : 0.0)) < 1e-15);
}

TEST_CASE("unary probability measurement and leak detection") {
  StateVector s = StateVector::basis_state("1000");
  RegisterSpec reg{"data", 0, 4};
  Tensor p = measure_unary_probabilities(s, {&reg, 1});
  CHECK(p(0) == doctest::Approx(1.0));
  CHECK(p(1) == doctest::Approx(0.0));

  StateVector h = StateVector::zero_state(2);
  h.amp[0] = 0;
  h.amp[0b10] = 1.0 / std::sqrt(2.0);
  h.amp[0b01] = 1.0 / std::sqrt(2.0);
  RegisterSpec reg2{"data", 0, 2};
  Tensor p2 = measure_unary_probabilities(h, {&reg2, 1});
  CHECK(p2(0) == doctest::Approx(0.5));
  CHECK(p2(1) == doctest::Approx(0.5));

  StateVector leaky = StateVector::zero_state(2);  // |00> has no unary support
  CHECK_THROWS_WITH_AS(measure_unary_probabilities(leaky, {&reg2, 1}),
                       doctest::Contains("unary"), std::runtime_error);
}

TEST_CASE("adjoint gradient: no parameters yields an empty gradient") {
  CircuitProgram prog;
  prog.num_wires = 2;
  prog.rbs(0, 1, 0.4);
  RegisterSpec reg{"data", 0, 2};
  Tensor cot({2}, {1.0, 0.0});
  auto g = adjoint_gradient(prog, {}, StateVector::basis_state("10"), {&reg, 1}, cot);
  CHECK(g.empty());
}

TEST_CASE("adjoint gradient of P(|01>) through a single RBS is sin(2t)") {
  // P(|01>) = sin^2(t) from |10>, dP/dt = 2 sin t cos t; at t = pi/4 -> 1.
  CircuitProgram prog;
  prog.num_wires = 2;
  prog.rbs_slot(0, 1, 0);
  RegisterSpec reg{"data", 0, 2};
  Tensor cot({2}, {0.0, 1.0});  // cost = p(e_1)
  double theta = std::numbers::pi / 4;
  auto g = adjoint_gradient(prog, {&theta, 1}, StateVector::basis_state("10"), {&reg, 1}, cot);
  REQUIRE(g.size() == 1);
  CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-12));

  theta = 0.3;
  g = adjoint_gradient(prog, {&theta, 1}, StateVector::basis_state("10"), {&reg, 1}, cot);
  CHECK(g[0] == doctest::Approx(std::sin(2 * 0.3)).epsilon(1e-12));
}

TEST_CASE("adjoint gradient matches finite differences on random programs") {
  std::mt19937_64 gen = rng(99);
  RegisterSpec reg{"data", 0, 6};
  for (int rep = 0; rep < 8; ++rep) {
    CircuitProgram prog = random_unary_program(gen, 6, 40, 8);
    std::vector<double> theta(8);
    for (double& v : theta) v = std::uniform_real_distribution<double>(-1.0, 1.0)(gen);
    Tensor cot({6});
    for (double& v : cot.data) v = std::uniform_real_distribution<double>(-1.0, 1.0)(gen);

    StateVector init = StateVector::basis_state("100000");
    auto cost = [&](const std::vector<double>& th) {
      StateVector s = run(prog, init, th);
      double total = 0.0;
      for (int i = 0; i < 6; ++i) total += cot.data[static_cast<std::size_t>(i)] *
                                           std::norm(s.amp[s.wire_mask(i)]);
      return total;
    };
    auto g = adjoint_gradient(prog, theta, init, {&reg, 1}, cot);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      double fd = central_diff(cost, theta, i);
      CHECK(rel_err(g[i], fd) <= 1e-5);
    }
  }
}
