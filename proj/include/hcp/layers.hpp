#pragma once

#include <cstdint>
#include <vector>

#include "hcp/rng.hpp"
#include "hcp/tensor.hpp"

namespace hcp {

enum class LayerKind : uint32_t {
  conv = 0,
  relu = 1,
  maxpool = 2,
  fc = 3,
  dropout = 4,
  softmax = 5,
};

struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  int units = 0;        // conv: output channels, fc: output units
  int kernel = 0;       // conv / maxpool window side
  int stride = 1;
  int pad = 0;
  double drop_ratio = 0.0;
  int lr_group = 0;

  static LayerSpec conv(int channels, int kernel, int stride, int pad, int group) {
    return {LayerKind::conv, channels, kernel, stride, pad, 0.0, group};
  }
  static LayerSpec relu() { return {LayerKind::relu, 0, 0, 1, 0, 0.0, 0}; }
  static LayerSpec maxpool(int kernel, int stride) {
    return {LayerKind::maxpool, 0, kernel, stride, 0, 0.0, 0};
  }
  static LayerSpec fc(int units, int group) {
    return {LayerKind::fc, units, 0, 1, 0, 0.0, group};
  }
  static LayerSpec dropout(double ratio) {
    return {LayerKind::dropout, 0, 0, 1, 0, ratio, 0};
  }
  static LayerSpec softmax() { return {LayerKind::softmax, 0, 0, 1, 0, 0.0, 0}; }
};

// Trainable tensor with its gradient and momentum buffer. lr_group selects the
// per-group learning rate of the active schedule.
struct Parameter {
  Tensor value;
  Tensor grad;
  Tensor momentum_buf;
  int lr_group = 0;

  Parameter() = default;
  explicit Parameter(Tensor v, int group = 0)
      : value(std::move(v)), grad(value.shape), momentum_buf(value.shape),
        lr_group(group) {}
};

enum class Mode { train, eval };

// conv2d: input [C,H,W], weights [F,C,kh,kw], bias [F] -> [F,H',W'] with
// H' = (H + 2*pad - kh)/stride + 1.
Tensor conv2d_forward(const Tensor& input, const Tensor& weights,
                      const Tensor& bias, int stride, int pad);
void conv2d_backward(const Tensor& input, const Tensor& weights,
                     const Tensor& grad_out, int stride, int pad,
                     Tensor& grad_input, Tensor& grad_weights,
                     Tensor& grad_bias);

Tensor relu_forward(const Tensor& x);
Tensor relu_backward(const Tensor& x, const Tensor& grad_out);

// maxpool over [C,H,W]; backward routes each output gradient to the argmax
// cell of its window, lowest row-major index on ties.
Tensor maxpool2d_forward(const Tensor& x, int kernel, int stride);
Tensor maxpool2d_backward(const Tensor& x, const Tensor& grad_out, int kernel,
                          int stride);

// fc: x (any shape, flattened) [n], weights [m,n], bias [m] -> [m].
Tensor fc_forward(const Tensor& x, const Tensor& weights, const Tensor& bias);
void fc_backward(const Tensor& x, const Tensor& weights, const Tensor& grad_out,
                 Tensor& grad_input, Tensor& grad_weights, Tensor& grad_bias);

// Inverted dropout: survivors scaled by 1/(1-ratio) so eval is identity.
// The mask written by forward must be passed back to backward.
Tensor dropout_forward(const Tensor& x, double ratio, Mode mode, Rng& rng,
                       std::vector<uint8_t>& mask);
Tensor dropout_backward(const Tensor& grad_out, double ratio, Mode mode,
                        const std::vector<uint8_t>& mask);

Tensor softmax_forward(const Tensor& x);
// grad wrt inputs given softmax output p and upstream grad g.
Tensor softmax_backward(const Tensor& p, const Tensor& grad_out);

}  // namespace hcp
