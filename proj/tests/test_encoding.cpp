#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "phqfno/encoding.hpp"
#include "phqfno/statevector.hpp"
#include "test_helpers.hpp"

using namespace phqfno;
using namespace phqfno::testing;

TEST_CASE("encoding angles: degenerate and two-component cases") {
  std::vector<double> e0 = {1.0, 0.0, 0.0, 0.0};
  auto a = encoding_angles(e0);
  CHECK(a == std::vector<double>{0.0, 0.0, 0.0});

  std::vector<double> v = {0.6, 0.8};
  auto b = encoding_angles(v);
  REQUIRE(b.size() == 1);
  CHECK(b[0] == doctest::Approx(0.927295218).epsilon(1e-9));
  CHECK(std::cos(b[0]) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(std::sin(b[0]) == doctest::Approx(0.8).epsilon(1e-12));

  CHECK_THROWS_AS(encoding_angles(std::vector<double>{0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("encoding angles reconstruct any signed unit vector") {
  std::mt19937_64 gen = rng(17);
  for (int rep = 0; rep < 300; ++rep) {
    auto x = random_unit_vector(gen, 8);
    auto amp = angles_to_amplitudes(encoding_angles(x));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(amp[i] - x[i]) <= 1e-12);
  }
  // negative tail is representable exactly
  std::vector<double> neg = {0.0, 0.0, -1.0};
  auto amp = angles_to_amplitudes(encoding_angles(neg));
  CHECK(amp[2] == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("encode_1d produces the unary superposition") {
  auto [prog1, n1] = encode_1d(std::vector<double>{1.0, 0.0, 0.0, 0.0});
  StateVector s1 = run(prog1, StateVector::zero_state(4));
  CHECK(std::abs(s1.amp[0b1000] - std::complex<double>{1.0, 0.0}) < 1e-12);
  CHECK(n1 == doctest::Approx(1.0));

  auto [prog2, n2] = encode_1d(std::vector<double>{0.0, 1.0});
  StateVector s2 = run(prog2, StateVector::zero_state(2));
  CHECK(std::abs(s2.amp[0b01] - std::complex<double>{1.0, 0.0}) < 1e-12);

  CHECK_THROWS_AS(encode_1d(std::vector<double>{0.0, 0.0}), std::invalid_argument);

  std::mt19937_64 gen = rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    Tensor x = random_tensor(gen, {8}, -2.0, 2.0);
    auto [prog, nrm] = encode_1d(x.data);
    StateVector s = run(prog, StateVector::zero_state(8));
    RegisterSpec reg{"data", 0, 8};
    Tensor p = measure_unary_probabilities(s, {&reg, 1});
    for (int i = 0; i < 8; ++i) {
      double want = (x(static_cast<std::size_t>(i)) / nrm);
      CHECK(std::abs(p.data[static_cast<std::size_t>(i)] - want * want) <= 1e-10);
      // amplitudes carry the sign, not just the magnitude
      CHECK(std::abs(s.amp[s.wire_mask(i)].real() - want) <= 1e-10);
    }
  }
}

TEST_CASE("encode_1d gate count is one X plus n-1 RBS") {
  std::mt19937_64 gen = rng(12);
  Tensor x = random_tensor(gen, {8});
  auto [prog, nrm] = encode_1d(x.data);
  int n_x = 0, n_rbs = 0;
  for (const Gate& g : prog.gates) {
    if (g.kind == GateKind::PauliX) ++n_x;
    if (g.kind == GateKind::Rbs) ++n_rbs;
  }
  CHECK(n_x == 1);
  CHECK(n_rbs == 7);
  CHECK(prog.gates.size() == 8);
}

namespace {

void check_2d_amplitudes(const Tensor& X, double tol) {
  auto [prog, nrm] = encode_2d(X);
  int wires = static_cast<int>(X.shape[0] + X.shape[1]);
  StateVector s = run(prog, StateVector::zero_state(wires));
  double leaked = 0.0;
  Tensor p = measure_unary_probabilities(s, prog.registers, &leaked);
  CHECK(leaked <= 1e-10);
  for (std::size_t i = 0; i < X.shape[0]; ++i)
    for (std::size_t j = 0; j < X.shape[1]; ++j) {
      double want = X(i, j) / nrm;
      CHECK(std::abs(p(i, j) - want * want) <= tol);
    }
}

}  // namespace

TEST_CASE("encode_2d amplitude map") {
  Tensor single({4, 4});
  single(1, 1) = 3.0;
  check_2d_amplitudes(single, 1e-12);

  Tensor one_row({4, 4});
  for (std::size_t j = 0; j < 4; ++j) one_row(2, j) = 0.3 * static_cast<double>(j + 1);
  check_2d_amplitudes(one_row, 1e-12);

  std::mt19937_64 gen = rng(23);
  for (int rep = 0; rep < 40; ++rep) check_2d_amplitudes(random_tensor(gen, {4, 4}, -1, 1), 1e-10);
  for (int rep = 0; rep < 10; ++rep) check_2d_amplitudes(random_tensor(gen, {4, 8}, -1, 1), 1e-10);

  CHECK_THROWS_AS(encode_2d(Tensor({3, 3})), std::invalid_argument);
}

TEST_CASE("encode_2d is scale invariant up to the stored norm") {
  std::mt19937_64 gen = rng(31);
  Tensor X = random_tensor(gen, {4, 4});
  Tensor X3 = X;
  for (double& v : X3.data) v *= 3.0;
  auto [p1, n1] = encode_2d(X);
  auto [p3, n3] = encode_2d(X3);
  StateVector s1 = run(p1, StateVector::zero_state(8));
  StateVector s3 = run(p3, StateVector::zero_state(8));
  for (std::size_t b = 0; b < s1.amp.size(); ++b) CHECK(std::abs(s1.amp[b] - s3.amp[b]) < 1e-12);
  CHECK(n3 == doctest::Approx(3.0 * n1));
}

TEST_CASE("encode_3d amplitude map, registers (slices, cols, rows)") {
  std::mt19937_64 gen = rng(37);

  Tensor single({4, 4, 4});
  single(2, 1, 3) = -2.0;
  {
    auto [prog, nrm] = encode_3d(single);
    StateVector s = run(prog, StateVector::zero_state(12));
    double leaked = 0.0;
    Tensor p = measure_unary_probabilities(s, prog.registers, &leaked);
    CHECK(leaked <= 1e-10);
    CHECK(p(3, 1, 2) == doctest::Approx(1.0).epsilon(1e-12));  // p[l][j][i]
  }

  for (int rep = 0; rep < 10; ++rep) {
    Tensor Y = random_tensor(gen, {4, 4, 4}, -1, 1);
    auto [prog, nrm] = encode_3d(Y);
    StateVector s = run(prog, StateVector::zero_state(12));
    double leaked = 0.0;
    Tensor p = measure_unary_probabilities(s, prog.registers, &leaked);
    CHECK(leaked <= 1e-10);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j)
        for (std::size_t l = 0; l < 4; ++l) {
          double want = Y(i, j, l) / nrm;
          CHECK(std::abs(p(l, j, i) - want * want) <= 1e-10);
        }
  }

  // single nonzero slice reduces to that slice's 2-D encoding
  Tensor Y({4, 4, 4});
  Tensor slice = random_tensor(gen, {4, 4});
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) Y(i, j, 2) = slice(i, j);
  auto [prog, nrm] = encode_3d(Y);
  StateVector s = run(prog, StateVector::zero_state(12));
  Tensor p = measure_unary_probabilities(s, prog.registers);
  auto [prog2, nrm2] = encode_2d(slice);
  StateVector s2 = run(prog2, StateVector::zero_state(8));
  Tensor p2 = measure_unary_probabilities(s2, prog2.registers);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(p(2, j, i) == doctest::Approx(p2(i, j)).epsilon(1e-10));
      for (std::size_t l = 0; l < 4; ++l)
        if (l != 2) CHECK(p(l, j, i) <= 1e-20);
    }

  CHECK_THROWS_AS(encode_3d(Tensor({2, 2, 2})), std::invalid_argument);
}

TEST_CASE("slot-based encoding plans match the baked encoders") {
  std::mt19937_64 gen = rng(41);
  Tensor X = random_tensor(gen, {4, 8});
  EncodingPlan plan = encode_2d_plan(4, 8);
  std::vector<double> slots = encode_2d_slots(X);
  StateVector sp = run(plan.program, StateVector::zero_state(12), slots);
  auto [baked, nrm] = encode_2d(X);
  StateVector sb = run(baked, StateVector::zero_state(12));
  for (std::size_t b = 0; b < sp.amp.size(); ++b) CHECK(std::abs(sp.amp[b] - sb.amp[b]) < 1e-12);

  Tensor Y = random_tensor(gen, {4, 4, 4});
  EncodingPlan plan3 = encode_3d_plan(4, 4, 4);
  std::vector<double> slots3 = encode_3d_slots(Y);
  StateVector sp3 = run(plan3.program, StateVector::zero_state(12), slots3);
  auto [baked3, nrm3] = encode_3d(Y);
  StateVector sb3 = run(baked3, StateVector::zero_state(12));
  for (std::size_t b = 0; b < sp3.amp.size(); ++b)
    CHECK(std::abs(sp3.amp[b] - sb3.amp[b]) < 1e-12);
}

TEST_CASE("decode_unary returns magnitudes scaled by the stored norm") {
  Tensor p({4}, {1.0, 0.0, 0.0, 0.0});
  Tensor d = decode_unary(p, 5.0);
  CHECK(d(0) == doctest::Approx(5.0));
  CHECK(d(1) == doctest::Approx(0.0));

  Tensor p2({2}, {0.36, 0.64});
  Tensor d2 = decode_unary(p2, 1.0);
  CHECK(d2(0) == doctest::Approx(0.6));
  CHECK(d2(1) == doctest::Approx(0.8));

  Tensor tiny({1}, {-1e-13});
  CHECK(decode_unary(tiny, 1.0)(0) == 0.0);
  Tensor bad({1}, {-1e-6});
  CHECK_THROWS_AS(decode_unary(bad, 1.0), std::runtime_error);
}

TEST_CASE("round trip encode -> measure -> decode recovers magnitudes") {
  std::mt19937_64 gen = rng(53);
  for (std::size_t n : {2u, 4u, 8u}) {
    for (int rep = 0; rep < 333; ++rep) {
      Tensor x = random_tensor(gen, {n}, -2.0, 2.0);
      auto [prog, nrm] = encode_1d(x.data);
      StateVector s = run(prog, StateVector::zero_state(static_cast<int>(n)));
      RegisterSpec reg{"data", 0, static_cast<int>(n)};
      double leaked = 0.0;
      Tensor p = measure_unary_probabilities(s, {&reg, 1}, &leaked);
      CHECK(leaked <= 1e-10);
      Tensor d = decode_unary(p, nrm);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(d(i) - std::abs(x(i))) <= 1e-10);
    }
  }
}
