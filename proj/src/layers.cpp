#include "hcp/layers.hpp"

#include <algorithm>
#include <cmath>

namespace hcp {

namespace {

void check_conv_shapes(const Tensor& input, const Tensor& weights,
                       const Tensor& bias, int stride, int pad) {
  if (input.ndim() != 3) throw ShapeError("conv2d: input must be [C,H,W]");
  if (weights.ndim() != 4) throw ShapeError("conv2d: weights must be [F,C,kh,kw]");
  if (bias.ndim() != 1 || bias.dim(0) != weights.dim(0))
    throw ShapeError("conv2d: bias must be [F]");
  if (input.dim(0) != weights.dim(1))
    throw ShapeError("conv2d: input channels do not match weight channels");
  if (stride < 1 || pad < 0) throw ShapeError("conv2d: bad stride/pad");
  if (input.dim(1) + 2 * pad < weights.dim(2) ||
      input.dim(2) + 2 * pad < weights.dim(3))
    throw ShapeError("conv2d: kernel larger than padded input");
}

inline int conv_out_extent(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

// Valid output range [o0, o1) so that o*stride + k_off - pad lies in [0, in).
inline void valid_out_range(int in, int k_off, int stride, int pad, int out,
                            int& o0, int& o1) {
  int lo = pad - k_off;  // o*stride >= lo
  o0 = lo <= 0 ? 0 : (lo + stride - 1) / stride;
  int hi = in - 1 + pad - k_off;  // o*stride <= hi
  o1 = hi < 0 ? 0 : std::min(out, hi / stride + 1);
  if (o1 < o0) o1 = o0;
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const Tensor& weights,
                      const Tensor& bias, int stride, int pad) {
  check_conv_shapes(input, weights, bias, stride, pad);
  const int C = input.dim(0), H = input.dim(1), W = input.dim(2);
  const int F = weights.dim(0), kh = weights.dim(2), kw = weights.dim(3);
  const int Ho = conv_out_extent(H, kh, stride, pad);
  const int Wo = conv_out_extent(W, kw, stride, pad);

  Tensor out({F, Ho, Wo});
  for (int f = 0; f < F; ++f) {
    double b = bias[size_t(f)];
    double* of = &out.data[size_t(f) * Ho * Wo];
    std::fill(of, of + size_t(Ho) * Wo, b);
  }

  for (int f = 0; f < F; ++f) {
    double* of = &out.data[size_t(f) * Ho * Wo];
    for (int c = 0; c < C; ++c) {
      const double* ic = &input.data[size_t(c) * H * W];
      for (int ky = 0; ky < kh; ++ky) {
        int y0, y1;
        valid_out_range(H, ky, stride, pad, Ho, y0, y1);
        for (int kx = 0; kx < kw; ++kx) {
          int x0, x1;
          valid_out_range(W, kx, stride, pad, Wo, x0, x1);
          const double wv =
              weights.data[((size_t(f) * C + c) * kh + ky) * kw + kx];
          if (wv == 0.0) continue;
          for (int y = y0; y < y1; ++y) {
            const double* irow = ic + size_t(y * stride + ky - pad) * W;
            double* orow = of + size_t(y) * Wo;
            int ix = x0 * stride + kx - pad;
            for (int x = x0; x < x1; ++x, ix += stride)
              orow[x] += wv * irow[ix];
          }
        }
      }
    }
  }
  return out;
}

void conv2d_backward(const Tensor& input, const Tensor& weights,
                     const Tensor& grad_out, int stride, int pad,
                     Tensor& grad_input, Tensor& grad_weights,
                     Tensor& grad_bias) {
  const int C = input.dim(0), H = input.dim(1), W = input.dim(2);
  const int F = weights.dim(0), kh = weights.dim(2), kw = weights.dim(3);
  const int Ho = grad_out.dim(1), Wo = grad_out.dim(2);
  if (grad_out.dim(0) != F) throw ShapeError("conv2d backward: grad channels");

  grad_input = Tensor(input.shape);
  grad_weights = Tensor(weights.shape);
  grad_bias = Tensor({F});

  for (int f = 0; f < F; ++f) {
    const double* gf = &grad_out.data[size_t(f) * Ho * Wo];
    double acc = 0.0;
    for (long long i = 0; i < (long long)Ho * Wo; ++i) acc += gf[i];
    grad_bias[size_t(f)] = acc;
  }

  for (int f = 0; f < F; ++f) {
    const double* gf = &grad_out.data[size_t(f) * Ho * Wo];
    for (int c = 0; c < C; ++c) {
      const double* ic = &input.data[size_t(c) * H * W];
      double* gic = &grad_input.data[size_t(c) * H * W];
      for (int ky = 0; ky < kh; ++ky) {
        int y0, y1;
        valid_out_range(H, ky, stride, pad, Ho, y0, y1);
        for (int kx = 0; kx < kw; ++kx) {
          int x0, x1;
          valid_out_range(W, kx, stride, pad, Wo, x0, x1);
          const size_t widx = ((size_t(f) * C + c) * kh + ky) * kw + kx;
          const double wv = weights.data[widx];
          double wacc = 0.0;
          for (int y = y0; y < y1; ++y) {
            const double* irow = ic + size_t(y * stride + ky - pad) * W;
            double* girow = gic + size_t(y * stride + ky - pad) * W;
            const double* grow = gf + size_t(y) * Wo;
            int ix = x0 * stride + kx - pad;
            for (int x = x0; x < x1; ++x, ix += stride) {
              wacc += irow[ix] * grow[x];
              girow[ix] += wv * grow[x];
            }
          }
          grad_weights.data[widx] += wacc;
        }
      }
    }
  }
}

Tensor relu_forward(const Tensor& x) {
  Tensor out(x.shape);
  for (size_t i = 0; i < x.data.size(); ++i)
    out.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
  return out;
}

Tensor relu_backward(const Tensor& x, const Tensor& grad_out) {
  if (!x.same_shape(grad_out)) throw ShapeError("relu backward: shape mismatch");
  Tensor g(x.shape);
  for (size_t i = 0; i < x.data.size(); ++i)
    g.data[i] = x.data[i] > 0.0 ? grad_out.data[i] : 0.0;
  return g;
}

Tensor maxpool2d_forward(const Tensor& x, int kernel, int stride) {
  if (x.ndim() != 3) throw ShapeError("maxpool2d: input must be [C,H,W]");
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  if (kernel > H || kernel > W) throw ShapeError("maxpool2d: kernel exceeds input");
  const int Ho = (H - kernel) / stride + 1;
  const int Wo = (W - kernel) / stride + 1;
  Tensor out({C, Ho, Wo});
  for (int c = 0; c < C; ++c) {
    const double* ic = &x.data[size_t(c) * H * W];
    double* oc = &out.data[size_t(c) * Ho * Wo];
    for (int y = 0; y < Ho; ++y)
      for (int xo = 0; xo < Wo; ++xo) {
        double best = ic[size_t(y * stride) * W + xo * stride];
        for (int ky = 0; ky < kernel; ++ky) {
          const double* row = ic + size_t(y * stride + ky) * W + xo * stride;
          for (int kx = 0; kx < kernel; ++kx)
            if (row[kx] > best) best = row[kx];
        }
        oc[size_t(y) * Wo + xo] = best;
      }
  }
  return out;
}

Tensor maxpool2d_backward(const Tensor& x, const Tensor& grad_out, int kernel,
                          int stride) {
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const int Ho = grad_out.dim(1), Wo = grad_out.dim(2);
  Tensor g(x.shape);
  for (int c = 0; c < C; ++c) {
    const double* ic = &x.data[size_t(c) * H * W];
    double* gc = &g.data[size_t(c) * H * W];
    const double* go = &grad_out.data[size_t(c) * Ho * Wo];
    for (int y = 0; y < Ho; ++y)
      for (int xo = 0; xo < Wo; ++xo) {
        // argmax, lowest row-major index on ties
        int by = 0, bx = 0;
        double best = ic[size_t(y * stride) * W + xo * stride];
        for (int ky = 0; ky < kernel; ++ky)
          for (int kx = 0; kx < kernel; ++kx) {
            double v = ic[size_t(y * stride + ky) * W + xo * stride + kx];
            if (v > best) {
              best = v;
              by = ky;
              bx = kx;
            }
          }
        gc[size_t(y * stride + by) * W + xo * stride + bx] +=
            go[size_t(y) * Wo + xo];
      }
  }
  return g;
}

Tensor fc_forward(const Tensor& x, const Tensor& weights, const Tensor& bias) {
  if (weights.ndim() != 2) throw ShapeError("fc: weights must be [m,n]");
  const int m = weights.dim(0), n = weights.dim(1);
  if (x.numel() != n) throw ShapeError("fc: input length does not match weights");
  if (bias.numel() != m) throw ShapeError("fc: bias length does not match weights");
  Tensor out({m});
  for (int i = 0; i < m; ++i) {
    const double* wr = &weights.data[size_t(i) * n];
    double acc = bias[size_t(i)];
    for (int j = 0; j < n; ++j) acc += wr[j] * x.data[size_t(j)];
    out[size_t(i)] = acc;
  }
  return out;
}

void fc_backward(const Tensor& x, const Tensor& weights, const Tensor& grad_out,
                 Tensor& grad_input, Tensor& grad_weights, Tensor& grad_bias) {
  const int m = weights.dim(0), n = weights.dim(1);
  if (grad_out.numel() != m) throw ShapeError("fc backward: grad length");
  grad_input = Tensor(x.shape);
  grad_weights = Tensor(weights.shape);
  grad_bias = Tensor({m});
  for (int i = 0; i < m; ++i) {
    const double g = grad_out[size_t(i)];
    grad_bias[size_t(i)] = g;
    const double* wr = &weights.data[size_t(i) * n];
    double* gw = &grad_weights.data[size_t(i) * n];
    for (int j = 0; j < n; ++j) {
      gw[j] = g * x.data[size_t(j)];
      grad_input.data[size_t(j)] += g * wr[j];
    }
  }
}

Tensor dropout_forward(const Tensor& x, double ratio, Mode mode, Rng& rng,
                       std::vector<uint8_t>& mask) {
  if (ratio < 0.0 || ratio >= 1.0) throw ConfigError("dropout: ratio must be in [0,1)");
  if (mode == Mode::eval || ratio == 0.0) {
    mask.assign(x.data.size(), 1);
    return x;
  }
  mask.resize(x.data.size());
  Tensor out(x.shape);
  const double scale = 1.0 / (1.0 - ratio);
  for (size_t i = 0; i < x.data.size(); ++i) {
    bool keep = !rng.bernoulli(ratio);
    mask[i] = keep ? 1 : 0;
    out.data[i] = keep ? x.data[i] * scale : 0.0;
  }
  return out;
}

Tensor dropout_backward(const Tensor& grad_out, double ratio, Mode mode,
                        const std::vector<uint8_t>& mask) {
  if (mode == Mode::eval || ratio == 0.0) return grad_out;
  Tensor g(grad_out.shape);
  const double scale = 1.0 / (1.0 - ratio);
  for (size_t i = 0; i < g.data.size(); ++i)
    g.data[i] = mask[i] ? grad_out.data[i] * scale : 0.0;
  return g;
}

Tensor softmax_forward(const Tensor& x) {
  if (x.numel() < 1) throw ShapeError("softmax: empty input");
  Tensor out(x.shape);
  double mx = x.data[0];
  for (double v : x.data) mx = std::max(mx, v);
  double sum = 0.0;
  for (size_t i = 0; i < x.data.size(); ++i) {
    out.data[i] = std::exp(x.data[i] - mx);
    sum += out.data[i];
  }
  for (double& v : out.data) v /= sum;
  return out;
}

Tensor softmax_backward(const Tensor& p, const Tensor& grad_out) {
  if (!p.same_shape(grad_out)) throw ShapeError("softmax backward: shape mismatch");
  double dot = 0.0;
  for (size_t i = 0; i < p.data.size(); ++i) dot += p.data[i] * grad_out.data[i];
  Tensor g(p.shape);
  for (size_t i = 0; i < p.data.size(); ++i)
    g.data[i] = p.data[i] * (grad_out.data[i] - dot);
  return g;
}

}  // namespace hcp
