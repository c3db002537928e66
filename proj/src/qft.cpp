#include "phqfno/qft.hpp"

#include <numbers>
#include <stdexcept>

namespace phqfno {

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

int log2_exact(std::size_t n) {
  if (!is_power_of_two(n))
    throw std::invalid_argument("expected a power of two, got " + std::to_string(n));
  int b = 0;
  while ((std::size_t{1} << b) < n) ++b;
  return b;
}

std::vector<std::size_t> bit_reversal(std::size_t n) {
  int bits = log2_exact(n);
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (int b = 0; b < bits; ++b)
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    perm[i] = r;
  }
  return perm;
}

ButterflySchedule butterfly_schedule(int n) {
  int stages = log2_exact(static_cast<std::size_t>(n));
  ButterflySchedule sched;
  sched.n = n;
  sched.stages.resize(static_cast<std::size_t>(stages));
  for (int s = 1; s <= stages; ++s) {
    int bs = 1 << s;
    int half = bs / 2;
    for (int block = 0; block < n; block += bs) {
      for (int t = 0; t < half; ++t) {
        // Twiddle w = exp(2*pi*i*t/bs). The cross below applies phase(-w) to
        // the lower wire and RBS(pi/4), which is exactly the classical
        // butterfly (a + w b, a - w b)/sqrt2 on the unary pair; the minus
        // sign folds into the phase as an extra pi.
        double phi = std::numbers::pi + 2.0 * std::numbers::pi * t / bs;
        sched.stages[static_cast<std::size_t>(s - 1)].push_back(
            ButterflyCross{block + t, block + t + half, phi});
      }
    }
  }
  return sched;
}

CircuitProgram qft_fragment(int wire_start, int n, bool inverse) {
  ButterflySchedule sched = butterfly_schedule(n);
  CircuitProgram prog;
  prog.num_wires = wire_start + n;
  constexpr double kQuarterPi = std::numbers::pi / 4.0;
  for (const auto& stage : sched.stages) {
    for (const ButterflyCross& c : stage) {
      prog.phase(wire_start + c.lower, c.phi);
      prog.rbs(wire_start + c.upper, wire_start + c.lower, kQuarterPi);
    }
  }
  return inverse ? prog.adjoint() : prog;
}

namespace {

void check_register_count(std::span<const RegisterSpec> regs, std::size_t want, const char* who) {
  if (regs.size() != want)
    throw std::invalid_argument(std::string(who) + ": expected " + std::to_string(want) +
                                " registers, got " + std::to_string(regs.size()));
}

}  // namespace

StateVector qft_rowwise_2d(StateVector state, std::span<const RegisterSpec> registers,
                           bool inverse) {
  check_register_count(registers, 2, "qft_rowwise_2d");
  CircuitProgram frag = qft_fragment(registers[1].start, registers[1].width, inverse);
  return run(frag, std::move(state));
}

StateVector qft_2d_on_3d(StateVector state, std::span<const RegisterSpec> registers, bool inverse) {
  check_register_count(registers, 3, "qft_2d_on_3d");
  CircuitProgram frag = qft_fragment(registers[1].start, registers[1].width, inverse);
  frag.append(qft_fragment(registers[2].start, registers[2].width, inverse));
  return run(frag, std::move(state));
}

}  // namespace phqfno
