#include "hcp/optimizer.hpp"

#include <cmath>

namespace hcp {

double lr_at(const ScheduleSpec& spec, int epoch, int group) {
  if (group < 0 || size_t(group) >= spec.group_lrs.size())
    throw ConfigError("learning-rate group out of range");
  if (epoch < 0) throw ConfigError("epoch must be non-negative");
  if (spec.decay_epochs < 1) throw ConfigError("decay_epochs must be positive");
  int steps = epoch / spec.decay_epochs;
  return spec.group_lrs[size_t(group)] * std::pow(spec.decay_factor, steps);
}

void sgd_step(std::vector<Parameter*>& params, const ScheduleSpec& spec,
              int epoch) {
  for (Parameter* p : params) {
    const double lr = lr_at(spec, epoch, p->lr_group);
    auto& w = p->value.data;
    auto& g = p->grad.data;
    auto& v = p->momentum_buf.data;
    for (size_t i = 0; i < w.size(); ++i) {
      double step = spec.momentum * v[i] -
                    lr * (g[i] + spec.weight_decay * w[i]);
      v[i] = step;
      w[i] += step;
    }
  }
}

}  // namespace hcp
