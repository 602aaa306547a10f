#include "nerkit/train/optim.hpp"

#include <cmath>

#include "nerkit/error.hpp"

namespace nerkit::train {

double lr_decay_step(double lr_previous, std::size_t epoch) {
  if (epoch < 1) throw UsageError("lr decay epoch counter starts at 1");
  return lr_previous / (1.0 + 0.05 * static_cast<double>(epoch));
}

double lr_schedule(double lr_initial, std::size_t epoch) {
  double lr = lr_initial;
  for (std::size_t k = 1; k <= epoch; ++k) lr = lr_decay_step(lr, k);
  return lr;
}

double global_grad_norm(std::span<const ad::Tensor> params) {
  double sq = 0.0;
  for (const auto& p : params)
    for (double g : p.grad()) sq += g * g;
  return std::sqrt(sq);
}

double clip_gradients(std::span<const ad::Tensor> params, double clip_norm) {
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be > 0");
  const double norm = global_grad_norm(params);
  if (norm > clip_norm) {
    const double factor = clip_norm / norm;
    for (const auto& p : params)
      for (double& g : p.grad()) g *= factor;
  }
  return norm;
}

SgdMomentum::SgdMomentum(std::vector<ad::Tensor> params, double momentum)
    : params_(std::move(params)), momentum_(momentum) {
  for (const auto& p : params_) velocity_.emplace_back(p.numel(), 0.0);
}

void SgdMomentum::step(double lr) {
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto values = params_[k].values();
    auto grad = params_[k].grad();
    auto& vel = velocity_[k];
    for (std::size_t i = 0; i < vel.size(); ++i) {
      vel[i] = momentum_ * vel[i] + grad[i];
      values[i] -= lr * vel[i];
    }
  }
}

AdamW::AdamW(std::vector<ad::Tensor> params, double beta1, double beta2, double eps, double weight_decay)
    : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay) {
  for (const auto& p : params_) {
    m_.emplace_back(p.numel(), 0.0);
    v_.emplace_back(p.numel(), 0.0);
  }
}

void AdamW::step(double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto values = params_[k].values();
    auto grad = params_[k].grad();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < m.size(); ++i) {
      values[i] -= lr * weight_decay_ * values[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * grad[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * grad[i] * grad[i];
      values[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
}

}  // namespace nerkit::train
