#include "hcp/ncut.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hcp {

void jacobi_eigen(const Tensor& a, std::vector<double>& values,
                  Tensor& vectors) {
  if (a.ndim() != 2 || a.dim(0) != a.dim(1))
    throw ShapeError("jacobi: matrix must be square");
  const int n = a.dim(0);
  Tensor m = a;
  vectors = Tensor({n, n});
  for (int i = 0; i < n; ++i) vectors.at(i, i) = 1.0;

  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += m.at(p, q) * m.at(p, q);
    if (off < 1e-24) break;
    // Skip rotations on entries already far below the remaining off-diagonal
    // mass; classic threshold strategy, keeps early sweeps cheap.
    double thresh = sweep < 3 ? 0.2 * off / (double(n) * n) : 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = m.at(p, q);
        if (apq * apq <= thresh) continue;
        double app = m.at(p, p), aqq = m.at(q, q);
        double theta = (aqq - app) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double mkp = m.at(k, p), mkq = m.at(k, q);
          m.at(k, p) = c * mkp - s * mkq;
          m.at(k, q) = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          double mpk = m.at(p, k), mqk = m.at(q, k);
          m.at(p, k) = c * mpk - s * mqk;
          m.at(q, k) = s * mpk + c * mqk;
        }
        for (int k = 0; k < n; ++k) {
          double vkp = vectors.at(k, p), vkq = vectors.at(k, q);
          vectors.at(k, p) = c * vkp - s * vkq;
          vectors.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  values.resize(size_t(n));
  for (int i = 0; i < n; ++i) values[size_t(i)] = m.at(i, i);
}

double ncut_value(const Tensor& w, const std::vector<int>& nodes,
                  const std::vector<uint8_t>& in_a) {
  const size_t k = nodes.size();
  if (in_a.size() != k) throw ShapeError("ncut: mask length mismatch");
  size_t na = 0;
  for (uint8_t v : in_a) na += v ? 1 : 0;
  if (na == 0 || na == k) throw ShapeError("ncut: bipartition has an empty side");

  double cut = 0.0, assoc_a = 0.0, assoc_b = 0.0;
  for (size_t i = 0; i < k; ++i)
    for (size_t j = 0; j < k; ++j) {
      double v = w.at(nodes[i], nodes[j]);
      if (in_a[i])
        assoc_a += v;
      else
        assoc_b += v;
      if (in_a[i] != in_a[j] && i < j) cut += v;
    }

  const double inf = std::numeric_limits<double>::infinity();
  double ta = assoc_a > 0.0 ? cut / assoc_a : (cut > 0.0 ? inf : 0.0);
  double tb = assoc_b > 0.0 ? cut / assoc_b : (cut > 0.0 ? inf : 0.0);
  return ta + tb;
}

namespace {

// One connected component (w>0 edges) containing nodes[0], as a mask; empty
// mask when the subgraph is connected.
std::vector<uint8_t> component_mask(const Tensor& w,
                                    const std::vector<int>& nodes) {
  const size_t k = nodes.size();
  std::vector<uint8_t> seen(k, 0);
  std::vector<size_t> stack = {0};
  seen[0] = 1;
  size_t count = 1;
  while (!stack.empty()) {
    size_t i = stack.back();
    stack.pop_back();
    for (size_t j = 0; j < k; ++j)
      if (!seen[j] && i != j && w.at(nodes[i], nodes[j]) > 0.0) {
        seen[j] = 1;
        ++count;
        stack.push_back(j);
      }
  }
  if (count == k) return {};
  return seen;
}

SplitResult exhaustive_bipartition(const Tensor& w,
                                   const std::vector<int>& nodes) {
  const size_t k = nodes.size();
  SplitResult best;
  best.value = std::numeric_limits<double>::infinity();
  std::vector<uint8_t> mask(k, 0);
  // The last node stays on side B, which visits every bipartition once.
  const uint64_t lim = uint64_t(1) << (k - 1);
  for (uint64_t bits = 1; bits < lim; ++bits) {
    for (size_t i = 0; i + 1 < k; ++i) mask[i] = (bits >> i) & 1u;
    double v = ncut_value(w, nodes, mask);
    if (v < best.value) {
      best.value = v;
      best.in_a = mask;
    }
  }
  return best;
}

SplitResult spectral_bipartition(const Tensor& w,
                                 const std::vector<int>& nodes) {
  const int k = int(nodes.size());
  std::vector<double> deg(size_t(k), 0.0);
  for (int i = 0; i < k; ++i) {
    double d = 0.0;
    for (int j = 0; j < k; ++j) d += w.at(nodes[size_t(i)], nodes[size_t(j)]);
    deg[size_t(i)] = d;
  }

  Tensor nmat({k, k});
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      double dd = deg[size_t(i)] * deg[size_t(j)];
      nmat.at(i, j) =
          dd > 0.0 ? w.at(nodes[size_t(i)], nodes[size_t(j)]) / std::sqrt(dd)
                   : 0.0;
    }

  std::vector<double> vals;
  Tensor vecs;
  jacobi_eigen(nmat, vals, vecs);

  // Index of the second-largest eigenvalue.
  int first = 0;
  for (int i = 1; i < k; ++i)
    if (vals[size_t(i)] > vals[size_t(first)]) first = i;
  int second = first == 0 ? 1 : 0;
  for (int i = 0; i < k; ++i)
    if (i != first && vals[size_t(i)] > vals[size_t(second)]) second = i;

  std::vector<double> x(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) {
    double d = deg[size_t(i)];
    x[size_t(i)] = d > 0.0 ? vecs.at(i, second) / std::sqrt(d)
                           : vecs.at(i, second);
  }

  double lo = *std::min_element(x.begin(), x.end());
  double hi = *std::max_element(x.begin(), x.end());

  SplitResult best;
  best.value = std::numeric_limits<double>::infinity();
  std::vector<uint8_t> mask(size_t(k), 0);
  const int nthresh = 32;
  for (int t = 1; t <= nthresh; ++t) {
    double thr = lo + (hi - lo) * double(t) / double(nthresh + 1);
    int na = 0;
    for (int i = 0; i < k; ++i) {
      mask[size_t(i)] = x[size_t(i)] <= thr ? 1 : 0;
      na += mask[size_t(i)];
    }
    if (na == 0 || na == k) continue;
    double v = ncut_value(w, nodes, mask);
    if (v < best.value) {
      best.value = v;
      best.in_a = mask;
    }
  }
  if (!best.in_a.empty()) return best;

  // Degenerate indicator (constant x): split the index order in half.
  std::vector<int> order(static_cast<size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return x[size_t(a)] < x[size_t(b)]; });
  std::fill(mask.begin(), mask.end(), 0);
  for (int i = 0; i < k / 2; ++i) mask[size_t(order[size_t(i)])] = 1;
  best.in_a = mask;
  best.value = ncut_value(w, nodes, mask);
  return best;
}

}  // namespace

SplitResult best_bipartition(const Tensor& w, const std::vector<int>& nodes) {
  if (nodes.size() < 2) throw ShapeError("bipartition: need at least two nodes");
  std::vector<uint8_t> comp = component_mask(w, nodes);
  if (!comp.empty()) {
    SplitResult r;
    r.in_a = comp;
    r.value = 0.0;
    return r;
  }
  if (nodes.size() <= 12) return exhaustive_bipartition(w, nodes);
  return spectral_bipartition(w, nodes);
}

std::vector<int> normalized_cut(const Tensor& w, int m) {
  if (w.ndim() != 2 || w.dim(0) != w.dim(1))
    throw ShapeError("normalized_cut: affinity must be square");
  const int n = w.dim(0);
  if (m < 1 || m > n)
    throw ConfigError("normalized_cut: cluster count must be in [1, n]");

  struct Cluster {
    std::vector<int> nodes;
    SplitResult split;  // valid when nodes.size() >= 2
  };
  std::vector<Cluster> clusters;
  {
    Cluster all;
    all.nodes.resize(size_t(n));
    std::iota(all.nodes.begin(), all.nodes.end(), 0);
    if (n >= 2) all.split = best_bipartition(w, all.nodes);
    clusters.push_back(std::move(all));
  }

  while (int(clusters.size()) < m) {
    int pick = -1;
    for (int i = 0; i < int(clusters.size()); ++i) {
      if (clusters[size_t(i)].nodes.size() < 2) continue;
      if (pick < 0) {
        pick = i;
        continue;
      }
      const Cluster& a = clusters[size_t(i)];
      const Cluster& b = clusters[size_t(pick)];
      if (a.split.value < b.split.value ||
          (a.split.value == b.split.value && a.nodes[0] < b.nodes[0]))
        pick = i;
    }
    // m <= n guarantees a splittable cluster exists.
    Cluster& c = clusters[size_t(pick)];
    Cluster left, right;
    for (size_t i = 0; i < c.nodes.size(); ++i)
      (c.split.in_a[i] ? left : right).nodes.push_back(c.nodes[i]);
    if (left.nodes.size() >= 2) left.split = best_bipartition(w, left.nodes);
    if (right.nodes.size() >= 2) right.split = best_bipartition(w, right.nodes);
    clusters[size_t(pick)] = std::move(left);
    clusters.push_back(std::move(right));
  }

  // Number clusters by smallest member.
  std::vector<int> order(clusters.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return clusters[size_t(a)].nodes[0] < clusters[size_t(b)].nodes[0];
  });
  std::vector<int> labels(size_t(n), -1);
  for (int rank = 0; rank < int(order.size()); ++rank)
    for (int node : clusters[size_t(order[size_t(rank)])].nodes)
      labels[size_t(node)] = rank;
  return labels;
}

}  // namespace hcp
