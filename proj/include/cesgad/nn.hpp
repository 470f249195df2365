#pragma once

// Small dense neural-network toolkit shared by the spectral encoder, the
// edge classifier, and the node classification head: seeded initialization,
// activations with their derivatives, and a full-batch Adam optimizer.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cesgad/error.hpp"
#include "cesgad/graph.hpp"
#include "cesgad/random.hpp"

namespace cesgad {

// Uniform in +-sqrt(6 / (fan_in + fan_out)); variance-preserving for layers
// used as X * W with X [*, rows] and output [*, cols].
inline Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  if (rows < 1 || cols < 1) throw config_error("glorot: non-positive shape");
  const double limit =
      std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix w(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = dist(rng);
  }
  return w;
}

inline Matrix relu(const Matrix& x) { return x.cwiseMax(0.0); }

// Elementwise derivative mask of relu evaluated at pre-activation x.
inline Matrix relu_mask(const Matrix& x) {
  return (x.array() > 0.0).cast<double>().matrix();
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Row-wise softmax with max subtraction for overflow safety.
inline Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(i).array() - m).exp();
    out.row(i) = e / e.sum();
  }
  return out;
}

// Full-batch Adam with optional per-tensor L2 weight decay folded into the
// gradient. Parameters are registered once (stable order); each step call
// must pass gradients in that same order.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    if (!(lr > 0.0)) throw config_error("adam: learning rate must be > 0");
  }

  void register_parameter(Matrix* param, double weight_decay = 0.0) {
    params_.push_back(param);
    decay_.push_back(weight_decay);
    m_.emplace_back(Matrix::Zero(param->rows(), param->cols()));
    v_.emplace_back(Matrix::Zero(param->rows(), param->cols()));
  }

  std::size_t num_parameters() const { return params_.size(); }

  void step(const std::vector<Matrix>& grads) {
    if (grads.size() != params_.size()) {
      throw config_error("adam: gradient count " +
                         std::to_string(grads.size()) +
                         " does not match registered parameter count " +
                         std::to_string(params_.size()));
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
      Matrix& w = *params_[k];
      if (grads[k].rows() != w.rows() || grads[k].cols() != w.cols()) {
        throw config_error("adam: gradient shape mismatch at tensor " +
                           std::to_string(k));
      }
      Matrix g = grads[k];
      if (decay_[k] != 0.0) g += decay_[k] * w;
      m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * g;
      v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * g.cwiseProduct(g);
      const Matrix mhat = m_[k] / bc1;
      const Matrix vhat = v_[k] / bc2;
      w.array() -= lr_ * mhat.array() / (vhat.array().sqrt() + eps_);
    }
  }

 private:
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  std::int64_t t_ = 0;
  std::vector<Matrix*> params_;
  std::vector<double> decay_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace cesgad
