#pragma once

#include <vector>

#include "monsoon/tensor.hpp"

namespace monsoon {

double global_grad_norm(const std::vector<Tensor>& grads);

// Rescales all gradients by max_norm / norm when the global L2 norm exceeds
// max_norm; otherwise leaves them untouched (direction is always preserved).
void clip_gradients(std::vector<Tensor>& grads, double max_norm);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected adaptive-moment optimizer.
class Adam {
 public:
  Adam(AdamConfig config, const std::vector<Tensor>& params);

  void step(std::vector<Tensor>& params, const std::vector<Tensor>& grads);
  std::int64_t step_count() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::vector<Tensor> m_, v_;
  std::int64_t t_ = 0;
};

// Plain SGD, kept for ablation runs.
class Sgd {
 public:
  explicit Sgd(double learning_rate) : lr_(learning_rate) {}
  void step(std::vector<Tensor>& params, const std::vector<Tensor>& grads);

 private:
  double lr_;
};

}  // namespace monsoon
