#include "monsoon/optim.hpp"

#include <cmath>

#include "monsoon/errors.hpp"

namespace monsoon {

double global_grad_norm(const std::vector<Tensor>& grads) {
  double acc = 0.0;
  for (const Tensor& g : grads)
    for (std::int64_t i = 0; i < g.size(); ++i) acc += g[i] * g[i];
  return std::sqrt(acc);
}

void clip_gradients(std::vector<Tensor>& grads, double max_norm) {
  if (max_norm <= 0.0) raise(ErrorCode::ShapeMismatch, "clip_gradients: max_norm must be > 0");
  if (std::isinf(max_norm)) return;
  const double norm = global_grad_norm(grads);
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  for (Tensor& g : grads)
    for (std::int64_t i = 0; i < g.size(); ++i) g[i] *= scale;
}

Adam::Adam(AdamConfig config, const std::vector<Tensor>& params) : cfg_(config) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Tensor& p : params) {
    m_.emplace_back(p.shape());
    v_.emplace_back(p.shape());
  }
}

void Adam::step(std::vector<Tensor>& params, const std::vector<Tensor>& grads) {
  if (params.size() != grads.size() || params.size() != m_.size())
    raise(ErrorCode::ShapeMismatch, "Adam::step: parameter/gradient count mismatch");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = params[k];
    const Tensor& g = grads[k];
    if (!p.same_shape(g))
      raise(ErrorCode::ShapeMismatch, "Adam::step: gradient shape mismatch at param " + std::to_string(k));
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (std::int64_t i = 0; i < p.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    }
  }
}

void Sgd::step(std::vector<Tensor>& params, const std::vector<Tensor>& grads) {
  if (params.size() != grads.size())
    raise(ErrorCode::ShapeMismatch, "Sgd::step: parameter/gradient count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = params[k];
    const Tensor& g = grads[k];
    if (!p.same_shape(g)) raise(ErrorCode::ShapeMismatch, "Sgd::step: gradient shape mismatch");
    for (std::int64_t i = 0; i < p.size(); ++i) p[i] -= lr_ * g[i];
  }
}

}  // namespace monsoon
