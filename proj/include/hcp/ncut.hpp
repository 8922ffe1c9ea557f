#pragma once

#include <cstdint>
#include <vector>

#include "hcp/errors.hpp"
#include "hcp/tensor.hpp"

namespace hcp {

// Cyclic Jacobi eigensolver for a symmetric matrix. Eigenvectors are the
// columns of `vectors`; order is whatever the sweeps produce (unsorted).
void jacobi_eigen(const Tensor& a, std::vector<double>& values,
                  Tensor& vectors);

// Ncut value of a bipartition of the subgraph induced by `nodes`:
//   cut(A,B)/assoc(A,V) + cut(A,B)/assoc(B,V)
// with V the subgraph itself. in_a[i] assigns nodes[i] to side A.
double ncut_value(const Tensor& w, const std::vector<int>& nodes,
                  const std::vector<uint8_t>& in_a);

struct SplitResult {
  std::vector<uint8_t> in_a;  // per position in `nodes`
  double value = 0.0;
};

// Minimum-Ncut 2-way split of the induced subgraph. Disconnected subgraphs
// split along a component (value 0); up to 12 nodes every bipartition is
// scored; larger subgraphs use the spectral relaxation (second-largest
// eigenvector of D^-1/2 W D^-1/2, swept over 32 evenly spaced thresholds).
SplitResult best_bipartition(const Tensor& w, const std::vector<int>& nodes);

// Recursive 2-way partition into exactly m clusters: repeatedly split the
// cluster whose best bipartition has the lowest Ncut value. Returned labels
// are 0..m-1, numbered by each cluster's smallest member index.
std::vector<int> normalized_cut(const Tensor& w, int m);

}  // namespace hcp
