#include "hcp/losses.hpp"

#include <cmath>

namespace hcp {

double multinomial_logistic_loss(const Tensor& p, int label) {
  if (label < 0 || size_t(label) >= p.data.size())
    throw ShapeError("logistic loss: label out of range");
  double v = p.data[size_t(label)];
  const double tiny = 1e-12;
  return -std::log(v > tiny ? v : tiny);
}

Tensor multinomial_logistic_grad_logits(const Tensor& p, int label) {
  if (label < 0 || size_t(label) >= p.data.size())
    throw ShapeError("logistic loss: label out of range");
  Tensor g = p;
  g.data[size_t(label)] -= 1.0;
  return g;
}

Tensor normalized_target(const std::vector<int>& labels) {
  double sum = 0.0;
  for (int v : labels) {
    if (v != 0 && v != 1) throw DataError("labels must be 0/1");
    sum += v;
  }
  if (sum == 0.0) throw DataError("normalized target needs at least one positive label");
  Tensor t({int(labels.size())});
  for (size_t i = 0; i < labels.size(); ++i) t.data[i] = labels[i] / sum;
  return t;
}

double squared_loss(const Tensor& p, const Tensor& target) {
  if (!p.same_shape(target)) throw ShapeError("squared loss: shape mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < p.data.size(); ++i) {
    double d = p.data[i] - target.data[i];
    acc += d * d;
  }
  return acc;
}

Tensor squared_loss_grad(const Tensor& p, const Tensor& target) {
  if (!p.same_shape(target)) throw ShapeError("squared loss: shape mismatch");
  Tensor g(p.shape);
  for (size_t i = 0; i < p.data.size(); ++i)
    g.data[i] = 2.0 * (p.data[i] - target.data[i]);
  return g;
}

}  // namespace hcp
