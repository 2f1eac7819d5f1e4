#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "gesture/pose.hpp"

namespace gesture {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// y = x Aᵀ + b with A of shape [out × in].
struct DenseLayer {
  RowMatrix weights;
  Vector bias;

  DenseLayer() = default;
  DenseLayer(std::size_t in_dim, std::size_t out_dim);

  std::size_t in_dim() const noexcept { return static_cast<std::size_t>(weights.cols()); }
  std::size_t out_dim() const noexcept { return static_cast<std::size_t>(weights.rows()); }
};

struct LayerGradient {
  RowMatrix weights;
  Vector bias;
};

/// Per-layer parameter gradients, shape-congruent with the model they came from.
struct GradientSet {
  std::vector<LayerGradient> layers;
};

/// Dense feed-forward classifier. ReLU follows every layer except the last,
/// whose outputs are raw logits.
class MlpModel {
 public:
  /// 132 -> 256 -> 128 -> 64 -> 8.
  static std::vector<std::size_t> default_dims();

  /// Zero-initialized model with the given dimension chain.
  explicit MlpModel(std::span<const std::size_t> dims);
  explicit MlpModel(std::vector<DenseLayer> layers);

  /// He-normal weights (std = sqrt(2 / in_dim)) from a seeded generator, zero biases.
  static MlpModel he_initialized(std::span<const std::size_t> dims, std::uint64_t seed);

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }

  std::size_t input_dim() const noexcept { return layers_.front().in_dim(); }
  std::size_t output_dim() const noexcept { return layers_.back().out_dim(); }
  std::vector<std::size_t> dims() const;
  std::size_t parameter_count() const noexcept;

  /// Throws DimensionError if adjacent layers disagree or any parameter is non-finite.
  void check_consistent() const;

 private:
  std::vector<DenseLayer> layers_;
};

std::vector<double> relu(std::span<const double> v);
std::vector<double> softmax(std::span<const double> logits);

/// -log softmax(logits)[target], via log-sum-exp.
double cross_entropy_loss(std::span<const double> logits, std::size_t target);

std::vector<double> forward(const MlpModel& model, std::span<const double> input);

/// Row-per-sample batch forward pass; returns logits [batch × classes].
RowMatrix forward_batch(const MlpModel& model, const RowMatrix& inputs);

struct LossAndGradient {
  double loss = 0.0;
  GradientSet grads;
};

/// Single-sample loss and exact parameter gradients.
LossAndGradient backward(const MlpModel& model, std::span<const double> input, std::size_t target);

/// Mean per-sample loss over the batch and its gradient.
LossAndGradient backward_batch(const MlpModel& model, const RowMatrix& inputs,
                               std::span<const std::size_t> targets);

/// Mean cross-entropy over the batch without gradients.
double mean_loss(const MlpModel& model, const RowMatrix& inputs,
                 std::span<const std::size_t> targets);

/// Lowest index among the maxima.
std::size_t argmax(std::span<const double> values);

struct Prediction {
  GestureClass gesture = GestureClass::attention;
  std::vector<double> probabilities;
};

Prediction predict(const MlpModel& model, const PoseFrame& frame);
Prediction predict_flat(const MlpModel& model, std::span<const double> input);

}  // namespace gesture
