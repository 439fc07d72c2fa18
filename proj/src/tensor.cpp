#include "rgbt/tensor.hpp"

#include <cstring>
#include <stdexcept>

namespace rgbt {

int64_t element_count(const std::vector<int>& shape) {
  if (shape.empty()) return 0;
  int64_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("tensor shape must be positive");
    n *= d;
  }
  return n;
}

Tensor Tensor::zeros(std::vector<int> shape) {
  Tensor t;
  int64_t n = element_count(shape);
  t.shape = std::move(shape);
  t.data.assign(static_cast<size_t>(n), 0.0);
  return t;
}

void Tensor::fill(double v) {
  for (double& x : data) x = v;
}

Tensor stack(const std::vector<const Tensor*>& items) {
  if (items.empty()) throw std::invalid_argument("stack: no tensors");
  for (const Tensor* t : items)
    if (!t->same_shape(*items[0]))
      throw std::invalid_argument("stack: shape mismatch");
  std::vector<int> shape;
  shape.push_back(static_cast<int>(items.size()));
  shape.insert(shape.end(), items[0]->shape.begin(), items[0]->shape.end());
  Tensor out = Tensor::zeros(shape);
  size_t stride = items[0]->data.size();
  for (size_t i = 0; i < items.size(); ++i)
    std::memcpy(out.data.data() + i * stride, items[i]->data.data(),
                stride * sizeof(double));
  return out;
}

Tensor concat_width(const std::vector<const Tensor*>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_width: no parts");
  for (const Tensor* p : parts) {
    if (p->rank() != 3)
      throw std::invalid_argument("concat_width: expected H x W x C tensors");
    if (p->dim(0) != parts[0]->dim(0) || p->dim(2) != parts[0]->dim(2))
      throw std::invalid_argument("concat_width: mismatched parts");
  }
  int h = parts[0]->dim(0);
  int c = parts[0]->dim(2);
  int w = 0;
  for (const Tensor* p : parts) w += p->dim(1);
  Tensor out = Tensor::zeros({h, w, c});
  for (int y = 0; y < h; ++y) {
    size_t dst = static_cast<size_t>(y) * w * c;
    for (const Tensor* p : parts) {
      size_t row = static_cast<size_t>(p->dim(1)) * c;
      std::memcpy(out.data.data() + dst,
                  p->data.data() + static_cast<size_t>(y) * row,
                  row * sizeof(double));
      dst += row;
    }
  }
  return out;
}

}  // namespace rgbt
