#pragma once

#include <vector>

#include "hcp/errors.hpp"
#include "hcp/tensor.hpp"

namespace hcp {

// Axis-aligned pixel box, half-open: covers x in [x0, x0+w), y in [y0, y0+h).
struct Box {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;

  long long area() const { return (long long)w * h; }
  bool operator==(const Box& o) const {
    return x0 == o.x0 && y0 == o.y0 && w == o.w && h == o.h;
  }
};

struct ScoredProposal {
  Box box;
  double score = 0.0;
};

double iou(const Box& a, const Box& b);

// Indices ordered by descending score; equal scores fall back to (x0, y0,
// w, h) lexicographic order so proposal lists have one canonical layout.
std::vector<int> order_by_score(const std::vector<ScoredProposal>& props);
void sort_proposals(std::vector<ScoredProposal>& props);

// Greedy non-maximum suppression: walk proposals in descending score order,
// keep a box when its IoU with every kept box is below `thresh`, stop after
// `max_keep` boxes (no limit when max_keep < 0). Returns kept indices into
// the input vector, in the order they were kept.
std::vector<int> nms_keep(const std::vector<ScoredProposal>& props,
                          double thresh, int max_keep = -1);

// Pairwise IoU affinity matrix [n,n]; the diagonal is 1.
Tensor build_affinity(const std::vector<Box>& boxes);

}  // namespace hcp
