#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "hcp/errors.hpp"

namespace hcp {

// Dense n-dimensional array, row-major, double storage. Carrier for images,
// activations, parameters and gradients.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(size_t(numel_of(shape)), 0.0);
  }
  Tensor(std::vector<int> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {
    if ((long long)data.size() != numel_of(shape))
      throw ShapeError("tensor data length does not match shape");
  }

  static long long numel_of(const std::vector<int>& s) {
    long long n = 1;
    for (int d : s) {
      if (d <= 0) throw ShapeError("tensor dimensions must be positive");
      n *= d;
    }
    return n;
  }

  long long numel() const { return (long long)data.size(); }
  int ndim() const { return (int)shape.size(); }
  int dim(int i) const { return shape[size_t(i)]; }

  double& operator[](size_t i) { return data[i]; }
  double operator[](size_t i) const { return data[i]; }

  // 1-3 dim indexed access; layers use raw offsets on hot paths.
  double& at(int i) { return data[size_t(i)]; }
  double at(int i) const { return data[size_t(i)]; }
  double& at(int i, int j) { return data[size_t(i) * shape[1] + j]; }
  double at(int i, int j) const { return data[size_t(i) * shape[1] + j]; }
  double& at(int i, int j, int k) {
    return data[(size_t(i) * shape[1] + j) * shape[2] + k];
  }
  double at(int i, int j, int k) const {
    return data[(size_t(i) * shape[1] + j) * shape[2] + k];
  }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline Tensor zeros_like(const Tensor& t) { return Tensor(t.shape); }

}  // namespace hcp
