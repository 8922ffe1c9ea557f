#include "hcp/boxes.hpp"

#include <algorithm>
#include <numeric>

namespace hcp {

double iou(const Box& a, const Box& b) {
  if (a.w <= 0 || a.h <= 0 || b.w <= 0 || b.h <= 0) return 0.0;
  int ix0 = std::max(a.x0, b.x0);
  int iy0 = std::max(a.y0, b.y0);
  int ix1 = std::min(a.x0 + a.w, b.x0 + b.w);
  int iy1 = std::min(a.y0 + a.h, b.y0 + b.h);
  long long iw = ix1 - ix0, ih = iy1 - iy0;
  if (iw <= 0 || ih <= 0) return 0.0;
  double inter = double(iw * ih);
  double uni = double(a.area() + b.area()) - inter;
  return inter / uni;
}

std::vector<int> order_by_score(const std::vector<ScoredProposal>& props) {
  std::vector<int> idx(props.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int ia, int ib) {
    const ScoredProposal& a = props[size_t(ia)];
    const ScoredProposal& b = props[size_t(ib)];
    if (a.score != b.score) return a.score > b.score;
    const Box& x = a.box;
    const Box& y = b.box;
    if (x.x0 != y.x0) return x.x0 < y.x0;
    if (x.y0 != y.y0) return x.y0 < y.y0;
    if (x.w != y.w) return x.w < y.w;
    return x.h < y.h;
  });
  return idx;
}

void sort_proposals(std::vector<ScoredProposal>& props) {
  std::vector<int> order = order_by_score(props);
  std::vector<ScoredProposal> sorted;
  sorted.reserve(props.size());
  for (int i : order) sorted.push_back(props[size_t(i)]);
  props = std::move(sorted);
}

std::vector<int> nms_keep(const std::vector<ScoredProposal>& props,
                          double thresh, int max_keep) {
  std::vector<int> order = order_by_score(props);
  std::vector<int> kept;
  for (int i : order) {
    bool ok = true;
    for (int k : kept)
      if (iou(props[size_t(i)].box, props[size_t(k)].box) >= thresh) {
        ok = false;
        break;
      }
    if (ok) {
      kept.push_back(i);
      if (max_keep >= 0 && int(kept.size()) >= max_keep) break;
    }
  }
  return kept;
}

Tensor build_affinity(const std::vector<Box>& boxes) {
  int n = int(boxes.size());
  if (n < 1) throw ShapeError("affinity: need at least one box");
  Tensor w({n, n});
  for (int i = 0; i < n; ++i) {
    w.at(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      double v = iou(boxes[size_t(i)], boxes[size_t(j)]);
      w.at(i, j) = v;
      w.at(j, i) = v;
    }
  }
  return w;
}

}  // namespace hcp
