#include "phqfno/fno.hpp"

#include <complex>
#include <stdexcept>

#include "phqfno/fft.hpp"

namespace phqfno {

namespace {

[[noreturn]] void shape_error(const std::string& op, const std::string& detail) {
  throw std::invalid_argument("op '" + op + "': " + detail);
}

void require_packed(const std::string& op, const Tensor& t) {
  if (t.rank() < 2 || t.shape[0] != 2)
    shape_error(op, "expected packed complex tensor (2,...), got " + shape_to_string(t.shape));
}

}  // namespace

Var to_complex(Var real) {
  Tape& t = *real.tape;
  auto compute = [ir = real.id](const Tape& t) {
    const Tensor& R = t.value(ir);
    std::vector<std::size_t> shape = R.shape;
    shape.insert(shape.begin(), 2);
    Tensor out(shape);
    std::copy(R.data.begin(), R.data.end(), out.data.begin());
    return out;
  };
  auto backward = [ir = real.id](Tape& t, const Tensor& g) {
    const Tensor& R = t.value(ir);
    Tensor gr(R.shape);
    std::copy(g.data.begin(), g.data.begin() + static_cast<std::ptrdiff_t>(R.numel()),
              gr.data.begin());
    t.accumulate_grad(ir, std::move(gr));
  };
  return t.record("to-complex", {real}, compute(t), backward, compute);
}

Var real_part(Var packed) {
  Tape& t = *packed.tape;
  require_packed("real-part", t.value(packed));
  auto compute = [ip = packed.id](const Tape& t) {
    const Tensor& P = t.value(ip);
    std::vector<std::size_t> shape(P.shape.begin() + 1, P.shape.end());
    Tensor out(shape);
    std::copy(P.data.begin(), P.data.begin() + static_cast<std::ptrdiff_t>(out.numel()),
              out.data.begin());
    return out;
  };
  auto backward = [ip = packed.id](Tape& t, const Tensor& g) {
    Tensor gp(t.value(ip).shape);
    std::copy(g.data.begin(), g.data.end(), gp.data.begin());
    t.accumulate_grad(ip, std::move(gp));
  };
  return t.record("real-part", {packed}, compute(t), backward, compute);
}

namespace {

// Transform along the grid axis of a packed (2, n, c) buffer, per channel.
Tensor fft_packed_1d(const Tensor& p, bool inverse) {
  const std::size_t n = p.shape[1], c = p.shape[2];
  Tensor out(p.shape);
  std::vector<std::complex<double>> line(n);
  const std::size_t plane = n * c;
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < n; ++i)
      line[i] = {p.data[i * c + ch], p.data[plane + i * c + ch]};
    fft_unitary(line, inverse);
    for (std::size_t i = 0; i < n; ++i) {
      out.data[i * c + ch] = line[i].real();
      out.data[plane + i * c + ch] = line[i].imag();
    }
  }
  return out;
}

// Transform along both grid axes of a packed (2, nx, ny, c) buffer.
Tensor fft_packed_2d(const Tensor& p, bool inverse) {
  const std::size_t nx = p.shape[1], ny = p.shape[2], c = p.shape[3];
  Tensor out = p;
  const std::size_t plane = nx * ny * c;
  std::vector<std::complex<double>> line(std::max(nx, ny));
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < ny; ++y) {  // transform over x
      for (std::size_t x = 0; x < nx; ++x) {
        std::size_t at = (x * ny + y) * c + ch;
        line[x] = {out.data[at], out.data[plane + at]};
      }
      fft_unitary(std::span(line.data(), nx), inverse);
      for (std::size_t x = 0; x < nx; ++x) {
        std::size_t at = (x * ny + y) * c + ch;
        out.data[at] = line[x].real();
        out.data[plane + at] = line[x].imag();
      }
    }
    for (std::size_t x = 0; x < nx; ++x) {  // transform over y
      for (std::size_t y = 0; y < ny; ++y) {
        std::size_t at = (x * ny + y) * c + ch;
        line[y] = {out.data[at], out.data[plane + at]};
      }
      fft_unitary(std::span(line.data(), ny), inverse);
      for (std::size_t y = 0; y < ny; ++y) {
        std::size_t at = (x * ny + y) * c + ch;
        out.data[at] = line[y].real();
        out.data[plane + at] = line[y].imag();
      }
    }
  }
  return out;
}

}  // namespace

Var fft_grid(Var packed, bool inverse) {
  Tape& t = *packed.tape;
  const Tensor& P = t.value(packed);
  require_packed("fft-grid", P);
  if (P.rank() != 3) shape_error("fft-grid", "expected (2, n, c), got " + shape_to_string(P.shape));
  auto compute = [ip = packed.id, inverse](const Tape& t) {
    return fft_packed_1d(t.value(ip), inverse);
  };
  // the transform is unitary with a symmetric kernel, so the real-pair
  // adjoint is the opposite-direction transform
  auto backward = [ip = packed.id, inverse](Tape& t, const Tensor& g) {
    t.accumulate_grad(ip, fft_packed_1d(g, !inverse));
  };
  return t.record("fft-grid", {packed}, compute(t), backward, compute);
}

Var fft_grid2(Var packed, bool inverse) {
  Tape& t = *packed.tape;
  const Tensor& P = t.value(packed);
  require_packed("fft-grid2", P);
  if (P.rank() != 4)
    shape_error("fft-grid2", "expected (2, nx, ny, c), got " + shape_to_string(P.shape));
  auto compute = [ip = packed.id, inverse](const Tape& t) {
    return fft_packed_2d(t.value(ip), inverse);
  };
  auto backward = [ip = packed.id, inverse](Tape& t, const Tensor& g) {
    t.accumulate_grad(ip, fft_packed_2d(g, !inverse));
  };
  return t.record("fft-grid2", {packed}, compute(t), backward, compute);
}

Var spectral_mix_1d(Var spec, Var w, int K) {
  Tape& t = *spec.tape;
  const Tensor& S = t.value(spec);
  const Tensor& W = t.value(w);
  require_packed("spectral-mix", S);
  if (S.rank() != 3) shape_error("spectral-mix", "spectrum must be (2, n, c)");
  const std::size_t c = S.shape[2];
  if (W.rank() != 4 || W.shape[0] != 2 || W.shape[1] != static_cast<std::size_t>(K) ||
      W.shape[2] != c || W.shape[3] != c)
    shape_error("spectral-mix", "weights " + shape_to_string(W.shape) + " incompatible with K=" +
                                    std::to_string(K) + ", c=" + std::to_string(c));
  if (K < 0 || static_cast<std::size_t>(K) > S.shape[1])
    shape_error("spectral-mix", "K exceeds the spectrum extent");

  auto compute = [is = spec.id, iw = w.id, K](const Tape& t) {
    const Tensor& S = t.value(is);
    const Tensor& W = t.value(iw);
    const std::size_t n = S.shape[1], c = S.shape[2], plane = n * c, wplane = W.numel() / 2;
    Tensor out = S;
    for (int k = 0; k < K; ++k)
      for (std::size_t o = 0; o < c; ++o) {
        double accr = 0.0, acci = 0.0;
        for (std::size_t i = 0; i < c; ++i) {
          double wr = W.data[(static_cast<std::size_t>(k) * c + o) * c + i];
          double wi = W.data[wplane + (static_cast<std::size_t>(k) * c + o) * c + i];
          double xr = S.data[static_cast<std::size_t>(k) * c + i];
          double xi = S.data[plane + static_cast<std::size_t>(k) * c + i];
          accr += wr * xr - wi * xi;
          acci += wr * xi + wi * xr;
        }
        out.data[static_cast<std::size_t>(k) * c + o] = accr;
        out.data[plane + static_cast<std::size_t>(k) * c + o] = acci;
      }
    return out;
  };
  auto backward = [is = spec.id, iw = w.id, K](Tape& t, const Tensor& g) {
    const Tensor& S = t.value(is);
    const Tensor& W = t.value(iw);
    const std::size_t n = S.shape[1], c = S.shape[2], plane = n * c, wplane = W.numel() / 2;
    Tensor gs = g;  // pass-through modes keep their cotangent
    Tensor gw(W.shape);
    for (int k = 0; k < K; ++k) {
      for (std::size_t i = 0; i < c; ++i) {
        gs.data[static_cast<std::size_t>(k) * c + i] = 0.0;
        gs.data[plane + static_cast<std::size_t>(k) * c + i] = 0.0;
      }
      for (std::size_t o = 0; o < c; ++o) {
        double gr = g.data[static_cast<std::size_t>(k) * c + o];
        double gi = g.data[plane + static_cast<std::size_t>(k) * c + o];
        for (std::size_t i = 0; i < c; ++i) {
          std::size_t wat = (static_cast<std::size_t>(k) * c + o) * c + i;
          double wr = W.data[wat], wi = W.data[wplane + wat];
          double xr = S.data[static_cast<std::size_t>(k) * c + i];
          double xi = S.data[plane + static_cast<std::size_t>(k) * c + i];
          gs.data[static_cast<std::size_t>(k) * c + i] += gr * wr + gi * wi;
          gs.data[plane + static_cast<std::size_t>(k) * c + i] += -gr * wi + gi * wr;
          gw.data[wat] += gr * xr + gi * xi;
          gw.data[wplane + wat] += -gr * xi + gi * xr;
        }
      }
    }
    t.accumulate_grad(is, std::move(gs));
    t.accumulate_grad(iw, std::move(gw));
  };
  return t.record("spectral-mix", {spec, w}, compute(t), backward, compute);
}

Var spectral_mix_2d(Var spec, Var w, int Kx, int Ky) {
  Tape& t = *spec.tape;
  const Tensor& S = t.value(spec);
  const Tensor& W = t.value(w);
  require_packed("spectral-mix2", S);
  if (S.rank() != 4) shape_error("spectral-mix2", "spectrum must be (2, nx, ny, c)");
  const std::size_t c = S.shape[3];
  if (W.rank() != 5 || W.shape[0] != 2 || W.shape[1] != static_cast<std::size_t>(Kx) ||
      W.shape[2] != static_cast<std::size_t>(Ky) || W.shape[3] != c || W.shape[4] != c)
    shape_error("spectral-mix2", "weights " + shape_to_string(W.shape) + " incompatible");
  if (Kx < 0 || static_cast<std::size_t>(Kx) > S.shape[1] || Ky < 0 ||
      static_cast<std::size_t>(Ky) > S.shape[2])
    shape_error("spectral-mix2", "mode counts exceed the spectrum extents");

  auto compute = [is = spec.id, iw = w.id, Kx, Ky](const Tape& t) {
    const Tensor& S = t.value(is);
    const Tensor& W = t.value(iw);
    const std::size_t ny = S.shape[2], c = S.shape[3];
    const std::size_t plane = S.numel() / 2, wplane = W.numel() / 2;
    Tensor out = S;
    for (int kx = 0; kx < Kx; ++kx)
      for (int ky = 0; ky < Ky; ++ky) {
        std::size_t sat = (static_cast<std::size_t>(kx) * ny + static_cast<std::size_t>(ky)) * c;
        std::size_t wat0 =
            (static_cast<std::size_t>(kx) * static_cast<std::size_t>(Ky) + static_cast<std::size_t>(ky)) *
            c * c;
        for (std::size_t o = 0; o < c; ++o) {
          double accr = 0.0, acci = 0.0;
          for (std::size_t i = 0; i < c; ++i) {
            double wr = W.data[wat0 + o * c + i];
            double wi = W.data[wplane + wat0 + o * c + i];
            double xr = S.data[sat + i];
            double xi = S.data[plane + sat + i];
            accr += wr * xr - wi * xi;
            acci += wr * xi + wi * xr;
          }
          out.data[sat + o] = accr;
          out.data[plane + sat + o] = acci;
        }
      }
    return out;
  };
  auto backward = [is = spec.id, iw = w.id, Kx, Ky](Tape& t, const Tensor& g) {
    const Tensor& S = t.value(is);
    const Tensor& W = t.value(iw);
    const std::size_t ny = S.shape[2], c = S.shape[3];
    const std::size_t plane = S.numel() / 2, wplane = W.numel() / 2;
    Tensor gs = g;
    Tensor gw(W.shape);
    for (int kx = 0; kx < Kx; ++kx)
      for (int ky = 0; ky < Ky; ++ky) {
        std::size_t sat = (static_cast<std::size_t>(kx) * ny + static_cast<std::size_t>(ky)) * c;
        std::size_t wat0 =
            (static_cast<std::size_t>(kx) * static_cast<std::size_t>(Ky) + static_cast<std::size_t>(ky)) *
            c * c;
        for (std::size_t i = 0; i < c; ++i) {
          gs.data[sat + i] = 0.0;
          gs.data[plane + sat + i] = 0.0;
        }
        for (std::size_t o = 0; o < c; ++o) {
          double gr = g.data[sat + o];
          double gi = g.data[plane + sat + o];
          for (std::size_t i = 0; i < c; ++i) {
            double wr = W.data[wat0 + o * c + i];
            double wi = W.data[wplane + wat0 + o * c + i];
            double xr = S.data[sat + i];
            double xi = S.data[plane + sat + i];
            gs.data[sat + i] += gr * wr + gi * wi;
            gs.data[plane + sat + i] += -gr * wi + gi * wr;
            gw.data[wat0 + o * c + i] += gr * xr + gi * xi;
            gw.data[wplane + wat0 + o * c + i] += -gr * xi + gi * xr;
          }
        }
      }
    t.accumulate_grad(is, std::move(gs));
    t.accumulate_grad(iw, std::move(gw));
  };
  return t.record("spectral-mix2", {spec, w}, compute(t), backward, compute);
}

namespace {

void check_conv_shapes(const std::string& op, const Tensor& X, const Tensor& K, const Tensor& B,
                       std::size_t spatial_rank) {
  if (X.rank() != spatial_rank + 1) shape_error(op, "field " + shape_to_string(X.shape));
  if (K.rank() != spatial_rank + 2) shape_error(op, "kernel " + shape_to_string(K.shape));
  for (std::size_t d = 0; d < spatial_rank; ++d)
    if (K.shape[d] % 2 == 0) shape_error(op, "kernel extent must be odd");
  if (K.shape[spatial_rank] != X.shape[spatial_rank])
    shape_error(op, "kernel input channels " + shape_to_string(K.shape) + " vs field " +
                        shape_to_string(X.shape));
  if (B.rank() != 1 || B.shape[0] != K.shape[spatial_rank + 1])
    shape_error(op, "bias " + shape_to_string(B.shape));
}

}  // namespace

Var conv_circular_1d(Var x, Var kernel, Var bias) {
  Tape& t = *x.tape;
  check_conv_shapes("conv-circular", t.value(x), t.value(kernel), t.value(bias), 1);
  auto compute = [ix = x.id, ik = kernel.id, ib = bias.id](const Tape& t) {
    const Tensor& X = t.value(ix);
    const Tensor& K = t.value(ik);
    const Tensor& B = t.value(ib);
    const std::size_t n = X.shape[0], cin = X.shape[1], ks = K.shape[0], cout = K.shape[2];
    const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(ks / 2);
    Tensor out({n, cout});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t o = 0; o < cout; ++o) {
        double acc = B(o);
        for (std::size_t d = 0; d < ks; ++d) {
          std::size_t src = static_cast<std::size_t>(
              (static_cast<std::ptrdiff_t>(i + n + d) - h) % static_cast<std::ptrdiff_t>(n));
          for (std::size_t ci = 0; ci < cin; ++ci) acc += X(src, ci) * K(d, ci, o);
        }
        out(i, o) = acc;
      }
    return out;
  };
  auto backward = [ix = x.id, ik = kernel.id, ib = bias.id](Tape& t, const Tensor& g) {
    const Tensor& X = t.value(ix);
    const Tensor& K = t.value(ik);
    const std::size_t n = X.shape[0], cin = X.shape[1], ks = K.shape[0], cout = K.shape[2];
    const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(ks / 2);
    Tensor gx(X.shape), gk(K.shape), gb(t.value(ib).shape);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t o = 0; o < cout; ++o) {
        double go = g(i, o);
        gb(o) += go;
        for (std::size_t d = 0; d < ks; ++d) {
          std::size_t src = static_cast<std::size_t>(
              (static_cast<std::ptrdiff_t>(i + n + d) - h) % static_cast<std::ptrdiff_t>(n));
          for (std::size_t ci = 0; ci < cin; ++ci) {
            gx(src, ci) += go * K(d, ci, o);
            gk(d, ci, o) += go * X(src, ci);
          }
        }
      }
    t.accumulate_grad(ix, std::move(gx));
    t.accumulate_grad(ik, std::move(gk));
    t.accumulate_grad(ib, std::move(gb));
  };
  return t.record("conv-circular", {x, kernel, bias}, compute(t), backward, compute);
}

Var conv_circular_2d(Var x, Var kernel, Var bias) {
  Tape& t = *x.tape;
  check_conv_shapes("conv-circular2", t.value(x), t.value(kernel), t.value(bias), 2);
  auto compute = [ix = x.id, ik = kernel.id, ib = bias.id](const Tape& t) {
    const Tensor& X = t.value(ix);
    const Tensor& K = t.value(ik);
    const Tensor& B = t.value(ib);
    const std::size_t nx = X.shape[0], ny = X.shape[1], cin = X.shape[2];
    const std::size_t ks = K.shape[0], cout = K.shape[3];
    const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(ks / 2);
    Tensor out({nx, ny, cout});
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t o = 0; o < cout; ++o) {
          double acc = B(o);
          for (std::size_t dx = 0; dx < ks; ++dx)
            for (std::size_t dy = 0; dy < ks; ++dy) {
              std::size_t sx = static_cast<std::size_t>(
                  (static_cast<std::ptrdiff_t>(i + nx + dx) - h) % static_cast<std::ptrdiff_t>(nx));
              std::size_t sy = static_cast<std::size_t>(
                  (static_cast<std::ptrdiff_t>(j + ny + dy) - h) % static_cast<std::ptrdiff_t>(ny));
              for (std::size_t ci = 0; ci < cin; ++ci)
                acc += X(sx, sy, ci) * K.at4(dx, dy, ci, o);
            }
          out(i, j, o) = acc;
        }
    return out;
  };
  auto backward = [ix = x.id, ik = kernel.id, ib = bias.id](Tape& t, const Tensor& g) {
    const Tensor& X = t.value(ix);
    const Tensor& K = t.value(ik);
    const std::size_t nx = X.shape[0], ny = X.shape[1], cin = X.shape[2];
    const std::size_t ks = K.shape[0], cout = K.shape[3];
    const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(ks / 2);
    Tensor gx(X.shape), gk(K.shape), gb(t.value(ib).shape);
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t o = 0; o < cout; ++o) {
          double go = g(i, j, o);
          gb(o) += go;
          for (std::size_t dx = 0; dx < ks; ++dx)
            for (std::size_t dy = 0; dy < ks; ++dy) {
              std::size_t sx = static_cast<std::size_t>(
                  (static_cast<std::ptrdiff_t>(i + nx + dx) - h) % static_cast<std::ptrdiff_t>(nx));
              std::size_t sy = static_cast<std::size_t>(
                  (static_cast<std::ptrdiff_t>(j + ny + dy) - h) % static_cast<std::ptrdiff_t>(ny));
              for (std::size_t ci = 0; ci < cin; ++ci) {
                gx(sx, sy, ci) += go * K.at4(dx, dy, ci, o);
                gk.at4(dx, dy, ci, o) += go * X(sx, sy, ci);
              }
            }
        }
    t.accumulate_grad(ix, std::move(gx));
    t.accumulate_grad(ik, std::move(gk));
    t.accumulate_grad(ib, std::move(gb));
  };
  return t.record("conv-circular2", {x, kernel, bias}, compute(t), backward, compute);
}

Var classical_fourier_layer_1d(Var x, Var w_spec, int K, Var conv_k, Var conv_b, bool activation) {
  Var spec = fft_grid(to_complex(x));
  Var mixed = spectral_mix_1d(spec, w_spec, K);
  Var back = real_part(fft_grid(mixed, true));
  Var out = add(back, conv_circular_1d(x, conv_k, conv_b));
  return activation ? gelu(out) : out;
}

Var classical_fourier_layer_2d(Var x, Var w_spec, int Kx, int Ky, Var conv_k, Var conv_b,
                               bool activation) {
  Var spec = fft_grid2(to_complex(x));
  Var mixed = spectral_mix_2d(spec, w_spec, Kx, Ky);
  Var back = real_part(fft_grid2(mixed, true));
  Var out = add(back, conv_circular_2d(x, conv_k, conv_b));
  return activation ? gelu(out) : out;
}

}  // namespace phqfno
