#include "hcp/fusion.hpp"

#include <algorithm>

namespace hcp {

Tensor fuse_max(const std::vector<Tensor>& outputs, std::vector<int>* argmax) {
  if (outputs.empty()) throw ShapeError("fuse: empty hypothesis list");
  const Tensor& first = outputs[0];
  Tensor fused = first;
  if (argmax) argmax->assign(first.data.size(), 0);
  for (size_t i = 1; i < outputs.size(); ++i) {
    if (!outputs[i].same_shape(first))
      throw ShapeError("fuse: hypothesis score lengths differ");
    for (size_t j = 0; j < fused.data.size(); ++j)
      if (outputs[i].data[j] > fused.data[j]) {
        fused.data[j] = outputs[i].data[j];
        if (argmax) (*argmax)[j] = int(i);
      }
  }
  return fused;
}

Tensor minmax_normalize(const Tensor& v) {
  if (v.data.empty()) throw ShapeError("normalize: empty vector");
  double lo = *std::min_element(v.data.begin(), v.data.end());
  double hi = *std::max_element(v.data.begin(), v.data.end());
  Tensor out(v.shape);
  if (hi > lo)
    for (size_t i = 0; i < v.data.size(); ++i)
      out.data[i] = (v.data[i] - lo) / (hi - lo);
  return out;
}

Tensor late_fusion(const Tensor& a, const Tensor& b, double weight) {
  if (!a.same_shape(b)) throw ShapeError("late fusion: length mismatch");
  if (weight < 0.0 || weight > 1.0)
    throw ConfigError("late fusion: weight must be in [0,1]");
  Tensor out(a.shape);
  for (size_t i = 0; i < a.data.size(); ++i)
    out.data[i] = weight * a.data[i] + (1.0 - weight) * b.data[i];
  return out;
}

}  // namespace hcp
