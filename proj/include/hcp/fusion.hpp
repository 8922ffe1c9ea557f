#pragma once

#include <vector>

#include "hcp/errors.hpp"
#include "hcp/tensor.hpp"

namespace hcp {

// Componentwise max over per-hypothesis score vectors. When `argmax` is
// given it receives, per class, the index of the winning hypothesis (lowest
// index on ties) — the routing record the training backward pass needs.
Tensor fuse_max(const std::vector<Tensor>& outputs,
                std::vector<int>* argmax = nullptr);

// Per-image min-max normalization to [0,1]; a constant vector maps to zeros.
Tensor minmax_normalize(const Tensor& v);

// weight*a + (1-weight)*b. Callers normalize first when fusing across models.
Tensor late_fusion(const Tensor& a, const Tensor& b, double weight);

}  // namespace hcp
