#pragma once

#include <vector>

#include "hcp/errors.hpp"

namespace hcp {

struct PRPoint {
  double recall = 0.0;
  double precision = 0.0;
};

struct ClassEval {
  double ap = 0.0;
  bool evaluable = false;          // class had at least one positive
  bool ties_cross_boundary = false;  // a score tie mixes positives/negatives
  std::vector<PRPoint> curve;      // one point per ranking position
};

struct EvalReport {
  std::vector<ClassEval> per_class;
  double map = 0.0;
  std::vector<int> skipped_classes;  // no positives, excluded from the mean
};

// PASCAL classification AP. Default is the 11-point interpolation (mean over
// recall levels 0, 0.1, ..., 1.0 of the max precision at recall >= level);
// eleven_point=false switches to the all-points area variant. Score ties keep
// input order (stable ranking).
double average_precision(const std::vector<double>& scores,
                         const std::vector<int>& labels,
                         bool eleven_point = true);

ClassEval evaluate_class(const std::vector<double>& scores,
                         const std::vector<int>& labels,
                         bool eleven_point = true);

// scores[c][i], labels[c][i] per class c over a shared image list.
EvalReport mean_ap(const std::vector<std::vector<double>>& scores,
                   const std::vector<std::vector<int>>& labels,
                   bool eleven_point = true);

}  // namespace hcp
