#include "phqfno/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "phqfno/qft.hpp"

namespace phqfno {

void fft_unitary(std::span<std::complex<double>> a, bool inverse) {
  const std::size_t n = a.size();
  if (!is_power_of_two(n))
    throw std::invalid_argument("fft_unitary: length " + std::to_string(n) +
                                " is not a power of two");
  if (n == 1) return;
  // decimation in time: bit-reversal permute, then butterflies
  for (std::size_t i = 0, j = 0; i < n; ++i) {
    if (i < j) std::swap(a[i], a[j]);
    std::size_t bit = n >> 1;
    while (j & bit) {
      j ^= bit;
      bit >>= 1;
    }
    j |= bit;
  }
  const double sign = inverse ? -1.0 : 1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen = std::polar(1.0, ang);
    for (std::size_t block = 0; block < n; block += len) {
      std::complex<double> w{1.0, 0.0};
      for (std::size_t t = 0; t < len / 2; ++t) {
        std::complex<double> u = a[block + t];
        std::complex<double> v = a[block + t + len / 2] * w;
        a[block + t] = u + v;
        a[block + t + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& v : a) v *= scale;
}

std::vector<std::complex<double>> fft_unitary_copy(std::vector<std::complex<double>> a,
                                                   bool inverse) {
  fft_unitary(a, inverse);
  return a;
}

}  // namespace phqfno
