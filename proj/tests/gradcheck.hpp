#pragma once

// Central finite-difference oracle. Test-only: evaluates the function on
// perturbed copies of its inputs without using any recorded backward pass.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "nerkit/autodiff/graph.hpp"
#include "nerkit/rng.hpp"

namespace nerkit::testing {

using ScalarFn = std::function<ad::Tensor(ad::Graph&)>;

// Relative error with a small absolute floor so entries that are
// analytically zero do not divide by zero.
inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-4});
  return std::abs(analytic - numeric) / scale;
}

// Max relative error between backward() and central differences over every
// entry of every input. `fn` must be deterministic given the input values.
inline double max_gradient_error(const ScalarFn& fn, std::vector<ad::Tensor> inputs, double step = 1e-5) {
  for (auto& t : inputs) t.zero_grad();
  {
    ad::Graph g;
    ad::Tensor root = fn(g);
    g.backward(root);
  }
  double worst = 0.0;
  for (auto& t : inputs) {
    std::vector<double> analytic(t.grad().begin(), t.grad().end());
    for (std::size_t i = 0; i < t.numel(); ++i) {
      const double original = t[i];
      t[i] = original + step;
      double plus;
      {
        ad::Graph g(false);
        plus = fn(g).item();
      }
      t[i] = original - step;
      double minus;
      {
        ad::Graph g(false);
        minus = fn(g).item();
      }
      t[i] = original;
      worst = std::max(worst, relative_error(analytic[i], (plus - minus) / (2.0 * step)));
    }
  }
  return worst;
}

inline ad::Tensor random_tensor(Rng& rng, ad::Shape shape, double lo = -1.0, double hi = 1.0, bool grad = true) {
  std::vector<double> values(ad::shape_numel(shape));
  for (double& v : values) v = rng.uniform(lo, hi);
  return ad::Tensor(std::move(shape), std::move(values), grad);
}

// Reduces any tensor to a scalar through fixed random weights, so every
// output entry contributes a distinct coefficient to the gradient.
inline ad::Tensor project(ad::Graph& g, const ad::Tensor& t, const ad::Tensor& weights) {
  return g.sum(g.mul(t, weights));
}

}  // namespace nerkit::testing
