#include "gesture/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gesture {

void AdamParams::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning rate must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw std::invalid_argument("beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be positive");
}

AdamOptimizer::AdamOptimizer(std::vector<std::size_t> block_sizes, AdamParams params)
    : params_(params) {
  params_.validate();
  for (auto n : block_sizes) {
    m_.emplace_back(n, 0.0);
    v_.emplace_back(n, 0.0);
  }
}

AdamOptimizer AdamOptimizer::for_model(const MlpModel& model, AdamParams params) {
  std::vector<std::size_t> sizes;
  for (const auto& l : model.layers()) {
    sizes.push_back(static_cast<std::size_t>(l.weights.size()));
    sizes.push_back(static_cast<std::size_t>(l.bias.size()));
  }
  return AdamOptimizer(std::move(sizes), params);
}

void AdamOptimizer::step(std::span<const std::span<double>> params,
                         std::span<const std::span<const double>> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw DimensionError("expected " + std::to_string(m_.size()) + " parameter blocks");
  }
  for (std::size_t b = 0; b < m_.size(); ++b) {
    if (params[b].size() != m_[b].size() || grads[b].size() != m_[b].size()) {
      throw DimensionError("parameter block " + std::to_string(b) + " has the wrong size");
    }
  }

  ++t_;
  const double t = static_cast<double>(t_);
  const double correction1 = 1.0 - std::pow(params_.beta1, t);
  const double correction2 = 1.0 - std::pow(params_.beta2, t);
  const double b1 = params_.beta1;
  const double b2 = params_.beta2;

  for (std::size_t b = 0; b < m_.size(); ++b) {
    auto& m = m_[b];
    auto& v = v_[b];
    const auto g = grads[b];
    const auto theta = params[b];
    for (std::size_t i = 0; i < m.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      theta[i] -= params_.learning_rate * m_hat / (std::sqrt(v_hat) + params_.epsilon);
    }
  }
}

void AdamOptimizer::step(MlpModel& model, const GradientSet& grads) {
  auto& layers = model.layers();
  if (grads.layers.size() != layers.size()) {
    throw DimensionError("gradient set has " + std::to_string(grads.layers.size()) +
                         " layers, model has " + std::to_string(layers.size()));
  }
  std::vector<std::span<double>> p;
  std::vector<std::span<const double>> g;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto& l = layers[i];
    const auto& gl = grads.layers[i];
    if (gl.weights.rows() != l.weights.rows() || gl.weights.cols() != l.weights.cols() ||
        gl.bias.size() != l.bias.size()) {
      throw DimensionError("gradient for layer " + std::to_string(i) + " has the wrong shape");
    }
    p.emplace_back(l.weights.data(), static_cast<std::size_t>(l.weights.size()));
    p.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
    g.emplace_back(gl.weights.data(), static_cast<std::size_t>(gl.weights.size()));
    g.emplace_back(gl.bias.data(), static_cast<std::size_t>(gl.bias.size()));
  }
  step(p, g);
}

}  // namespace gesture
