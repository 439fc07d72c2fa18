#pragma once

#include <cstdint>
#include <vector>

namespace rgbt {

// Dense row-major array of doubles. Images are stored height x width x
// channels; batches prepend a leading dimension.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  static Tensor zeros(std::vector<int> shape);

  int64_t size() const { return static_cast<int64_t>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[i]; }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  double& operator()(int i) { return data[i]; }
  double operator()(int i) const { return data[i]; }
  double& operator()(int i, int j) {
    return data[static_cast<size_t>(i) * shape[1] + j];
  }
  double operator()(int i, int j) const {
    return data[static_cast<size_t>(i) * shape[1] + j];
  }
  double& operator()(int i, int j, int k) {
    return data[(static_cast<size_t>(i) * shape[1] + j) * shape[2] + k];
  }
  double operator()(int i, int j, int k) const {
    return data[(static_cast<size_t>(i) * shape[1] + j) * shape[2] + k];
  }
  double& operator()(int i, int j, int k, int l) {
    return data[((static_cast<size_t>(i) * shape[1] + j) * shape[2] + k) *
                    shape[3] +
                l];
  }
  double operator()(int i, int j, int k, int l) const {
    return data[((static_cast<size_t>(i) * shape[1] + j) * shape[2] + k) *
                    shape[3] +
                l];
  }

  void fill(double v);
};

// Stacks equally shaped tensors along a new leading dimension.
Tensor stack(const std::vector<const Tensor*>& items);

// Concatenates image tensors (H x W x C) left to right.
Tensor concat_width(const std::vector<const Tensor*>& parts);

int64_t element_count(const std::vector<int>& shape);

}  // namespace rgbt
