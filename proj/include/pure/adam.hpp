#pragma once

#include <cmath>

#include "pure/common.hpp"

namespace pure {

// Bias-corrected Adam for one tensor. Descends: param -= lr * m_hat / (sqrt(v_hat) + eps).
template <typename TensorT>
struct AdamState {
  TensorT m, v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  explicit AdamState(const TensorT& like)
      : m(TensorT::Zero(like.rows(), like.cols())), v(TensorT::Zero(like.rows(), like.cols())) {}

  void step(TensorT& param, const TensorT& grad, double lr) {
    if (param.rows() != grad.rows() || param.cols() != grad.cols() || param.rows() != m.rows() ||
        param.cols() != m.cols())
      throw Error("adam_step: shape mismatch");
    ++t;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.array().square().matrix();
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
};

template <typename TensorT>
void adam_step(AdamState<TensorT>& state, TensorT& param, const TensorT& grad, double lr) {
  state.step(param, grad, lr);
}

}  // namespace pure
