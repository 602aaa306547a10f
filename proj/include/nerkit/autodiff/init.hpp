#pragma once

#include <cmath>

#include "nerkit/autodiff/tensor.hpp"
#include "nerkit/rng.hpp"

namespace nerkit::ad {

inline Tensor uniform(Shape shape, double limit, Rng& rng) {
  std::vector<double> values(shape_numel(shape));
  for (double& v : values) v = rng.uniform(-limit, limit);
  return Tensor(std::move(shape), std::move(values), true);
}

// Glorot/Xavier uniform for a {rows, cols} weight matrix.
inline Tensor xavier_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  return uniform({rows, cols}, std::sqrt(6.0 / static_cast<double>(rows + cols)), rng);
}

}  // namespace nerkit::ad
