#pragma once

#include "phqfno/autodiff.hpp"

namespace phqfno {

// Tape ops for the classical Fourier branch. Complex values travel as
// packed tensors with a leading extent of 2 (real plane, imaginary plane).

Var to_complex(Var real);   // (sh...) -> (2, sh...)
Var real_part(Var packed);  // (2, sh...) -> (sh...)

/// Unitary DFT along the grid axis of a packed (2, n, c) field, per channel.
Var fft_grid(Var packed, bool inverse = false);

/// Unitary DFT along both grid axes of a packed (2, nx, ny, c) field.
Var fft_grid2(Var packed, bool inverse = false);

/// Truncated spectral channel mixing: modes k < K of a packed (2, n, c)
/// spectrum are multiplied by the complex matrices in w (2, K, c, c); all
/// other modes pass through unchanged, matching the quantum learning
/// block's identity on unselected modes.
Var spectral_mix_1d(Var spec, Var w, int K);

/// 2-D variant: modes (kx < Kx, ky < Ky) of a packed (2, nx, ny, c)
/// spectrum, weights (2, Kx, Ky, c, c).
Var spectral_mix_2d(Var spec, Var w, int Kx, int Ky);

/// Channel-mixing convolution with circular padding; odd kernel size.
/// x (n, cin), kernel (ks, cin, cout), bias (cout).
Var conv_circular_1d(Var x, Var kernel, Var bias);
/// x (nx, ny, cin), kernel (ks, ks, cin, cout), bias (cout).
Var conv_circular_2d(Var x, Var kernel, Var bias);

/// Classical Fourier layer: ifft(spectral_mix(fft(x))) + conv(x), then GELU.
/// `activation` false gives the raw pre-activation sum (used by the
/// cross-branch comparison paths).
Var classical_fourier_layer_1d(Var x, Var w_spec, int K, Var conv_k, Var conv_b,
                               bool activation = true);
Var classical_fourier_layer_2d(Var x, Var w_spec, int Kx, int Ky, Var conv_k, Var conv_b,
                               bool activation = true);

/// Complex parameter count of the truncated spectral weights.
inline int spectral_param_count_1d(int K, int c) { return K * c * c; }
inline int spectral_param_count_2d(int Kx, int Ky, int c) { return Kx * Ky * c * c; }

}  // namespace phqfno
