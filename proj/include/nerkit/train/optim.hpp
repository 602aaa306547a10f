#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nerkit/autodiff/tensor.hpp"

namespace nerkit::train {

// lr after `epoch` completed epochs (1-based): lr_k = lr_{k-1} / (1 + 0.05 k).
double lr_decay_step(double lr_previous, std::size_t epoch);
// Closed form of applying lr_decay_step for epochs 1..epoch.
double lr_schedule(double lr_initial, std::size_t epoch);

// Scales all gradients by clip_norm / norm when the global L2 norm exceeds
// clip_norm. Returns the norm before clipping.
double clip_gradients(std::span<const ad::Tensor> params, double clip_norm);
double global_grad_norm(std::span<const ad::Tensor> params);

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(double lr) = 0;
};

// v <- momentum * v + grad; param <- param - lr * v
class SgdMomentum : public Optimizer {
 public:
  SgdMomentum(std::vector<ad::Tensor> params, double momentum);
  void step(double lr) override;
  const std::vector<std::vector<double>>& velocity() const { return velocity_; }

 private:
  std::vector<ad::Tensor> params_;
  double momentum_;
  std::vector<std::vector<double>> velocity_;
};

// Adam with decoupled weight decay: param <- param - lr * wd * param, then
// the bias-corrected adaptive step.
class AdamW : public Optimizer {
 public:
  AdamW(std::vector<ad::Tensor> params, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8,
        double weight_decay = 0.01);
  void step(double lr) override;

 private:
  std::vector<ad::Tensor> params_;
  double beta1_, beta2_, eps_, weight_decay_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace nerkit::train
