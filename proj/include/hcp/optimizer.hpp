#pragma once

#include <vector>

#include "hcp/errors.hpp"
#include "hcp/layers.hpp"

namespace hcp {

// Per-group base learning rates with a step decay: the rate drops by a fixed
// factor every decay_epochs epochs. Momentum and weight decay are shared.
struct ScheduleSpec {
  std::vector<double> group_lrs;
  int decay_epochs = 20;
  double decay_factor = 0.1;
  double momentum = 0.9;
  double weight_decay = 0.0005;
};

double lr_at(const ScheduleSpec& spec, int epoch, int group);

// One SGD update with momentum and L2 weight decay:
//   v <- momentum*v - lr*(grad + weight_decay*w);  w <- w + v
// Gradients are left untouched; callers zero them between steps.
void sgd_step(std::vector<Parameter*>& params, const ScheduleSpec& spec,
              int epoch);

}  // namespace hcp
