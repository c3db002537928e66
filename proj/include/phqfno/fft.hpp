#pragma once

#include <complex>
#include <span>
#include <vector>

namespace phqfno {

/// In-place radix-2 Cooley-Tukey transform, unitary normalization (1/sqrt n
/// each direction) with the exp(+2*pi*i*jk/n) forward kernel — the same
/// convention the unary QFT realizes, so spectral weights are comparable
/// across the classical and quantum branches. Length must be a power of two.
void fft_unitary(std::span<std::complex<double>> a, bool inverse = false);

std::vector<std::complex<double>> fft_unitary_copy(std::vector<std::complex<double>> a,
                                                   bool inverse = false);

}  // namespace phqfno
