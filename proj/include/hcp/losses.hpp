#pragma once

#include <vector>

#include "hcp/errors.hpp"
#include "hcp/tensor.hpp"

namespace hcp {

// Cross-entropy against a single ground-truth class, applied to a softmax
// output p. The gradient is taken directly with respect to the pre-softmax
// logits (the usual fused form).
double multinomial_logistic_loss(const Tensor& p, int label);
Tensor multinomial_logistic_grad_logits(const Tensor& p, int label);

// Normalized multi-label target: y / sum(y). Throws DataError when the label
// vector has no positives.
Tensor normalized_target(const std::vector<int>& labels);

// Sum of squared differences between a probability vector and the normalized
// target, plus its gradient with respect to p (to be chained through the
// softmax backward).
double squared_loss(const Tensor& p, const Tensor& target);
Tensor squared_loss_grad(const Tensor& p, const Tensor& target);

}  // namespace hcp
