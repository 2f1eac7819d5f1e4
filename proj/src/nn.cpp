#include "gesture/nn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace gesture {

DenseLayer::DenseLayer(std::size_t in_dim, std::size_t out_dim)
    : weights(RowMatrix::Zero(static_cast<Eigen::Index>(out_dim), static_cast<Eigen::Index>(in_dim))),
      bias(Vector::Zero(static_cast<Eigen::Index>(out_dim))) {}

std::vector<std::size_t> MlpModel::default_dims() { return {kFrameWidth, 256, 128, 64, kClassCount}; }

MlpModel::MlpModel(std::span<const std::size_t> dims) {
  if (dims.size() < 2) throw DimensionError("a model needs at least an input and an output dimension");
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    if (dims[i] == 0 || dims[i + 1] == 0) throw DimensionError("layer dimensions must be positive");
    layers_.emplace_back(dims[i], dims[i + 1]);
  }
}

MlpModel::MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw DimensionError("a model needs at least one layer");
  check_consistent();
}

MlpModel MlpModel::he_initialized(std::span<const std::size_t> dims, std::uint64_t seed) {
  MlpModel model(dims);
  std::mt19937_64 rng(seed);
  for (auto& layer : model.layers_) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(layer.in_dim())));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = dist(rng);
    }
  }
  return model;
}

std::vector<std::size_t> MlpModel::dims() const {
  std::vector<std::size_t> out{input_dim()};
  for (const auto& l : layers_) out.push_back(l.out_dim());
  return out;
}

std::size_t MlpModel::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

void MlpModel::check_consistent() const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.weights.rows() == 0 || l.weights.cols() == 0) {
      throw DimensionError("layer " + std::to_string(i) + " has an empty weight matrix");
    }
    if (l.bias.size() != l.weights.rows()) {
      throw DimensionError("layer " + std::to_string(i) + " bias length does not match out_dim");
    }
    if (i > 0 && l.in_dim() != layers_[i - 1].out_dim()) {
      throw DimensionError("layer " + std::to_string(i) + " in_dim " + std::to_string(l.in_dim()) +
                           " does not match previous out_dim " +
                           std::to_string(layers_[i - 1].out_dim()));
    }
    if (!l.weights.allFinite() || !l.bias.allFinite()) {
      throw DimensionError("layer " + std::to_string(i) + " has non-finite parameters");
    }
  }
}

std::vector<double> relu(std::span<const double> v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return std::max(0.0, x); });
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (auto& p : out) p /= total;
  return out;
}

namespace {

double log_sum_exp(std::span<const double> z) {
  const double peak = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double v : z) total += std::exp(v - peak);
  return peak + std::log(total);
}

void check_input(const MlpModel& model, Eigen::Index width) {
  if (static_cast<std::size_t>(width) != model.input_dim()) {
    throw DimensionError("input has " + std::to_string(width) + " values, model expects " +
                         std::to_string(model.input_dim()));
  }
}

// Pre-activations of every layer; the last entry holds the logits.
std::vector<RowMatrix> forward_trace(const MlpModel& model, const RowMatrix& inputs) {
  check_input(model, inputs.cols());
  const auto& layers = model.layers();
  std::vector<RowMatrix> pre;
  pre.reserve(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    RowMatrix z;
    if (i == 0) {
      z.noalias() = inputs * layers[i].weights.transpose();
    } else {
      z.noalias() = pre.back().cwiseMax(0.0) * layers[i].weights.transpose();
    }
    z.rowwise() += layers[i].bias.transpose();
    pre.push_back(std::move(z));
  }
  return pre;
}

RowMatrix as_row(std::span<const double> input) {
  return Eigen::Map<const RowMatrix>(input.data(), 1, static_cast<Eigen::Index>(input.size()));
}

void check_targets(const MlpModel& model, const RowMatrix& inputs,
                   std::span<const std::size_t> targets) {
  if (static_cast<std::size_t>(inputs.rows()) != targets.size()) {
    throw DimensionError("batch has " + std::to_string(inputs.rows()) + " rows but " +
                         std::to_string(targets.size()) + " targets");
  }
  if (targets.empty()) throw DimensionError("empty batch");
  for (auto t : targets) {
    if (t >= model.output_dim()) {
      throw std::out_of_range("target index " + std::to_string(t) + " out of range");
    }
  }
}

}  // namespace

double cross_entropy_loss(std::span<const double> logits, std::size_t target) {
  if (target >= logits.size()) {
    throw std::out_of_range("target index " + std::to_string(target) + " out of range");
  }
  return log_sum_exp(logits) - logits[target];
}

RowMatrix forward_batch(const MlpModel& model, const RowMatrix& inputs) {
  return std::move(forward_trace(model, inputs).back());
}

std::vector<double> forward(const MlpModel& model, std::span<const double> input) {
  check_input(model, static_cast<Eigen::Index>(input.size()));
  const RowMatrix logits = forward_batch(model, as_row(input));
  return {logits.data(), logits.data() + logits.size()};
}

double mean_loss(const MlpModel& model, const RowMatrix& inputs,
                 std::span<const std::size_t> targets) {
  check_targets(model, inputs, targets);
  const RowMatrix logits = forward_batch(model, inputs);
  double total = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    total += cross_entropy_loss({logits.row(r).data(), static_cast<std::size_t>(logits.cols())},
                                targets[static_cast<std::size_t>(r)]);
  }
  return total / static_cast<double>(logits.rows());
}

LossAndGradient backward_batch(const MlpModel& model, const RowMatrix& inputs,
                               std::span<const std::size_t> targets) {
  check_targets(model, inputs, targets);
  const auto& layers = model.layers();
  const auto pre = forward_trace(model, inputs);
  const double n = static_cast<double>(inputs.rows());

  // dL/dlogits = (softmax - one_hot) / n, row by row.
  RowMatrix delta = pre.back();
  double total = 0.0;
  for (Eigen::Index r = 0; r < delta.rows(); ++r) {
    std::span<const double> z{pre.back().row(r).data(), static_cast<std::size_t>(delta.cols())};
    const auto t = targets[static_cast<std::size_t>(r)];
    total += cross_entropy_loss(z, t);
    const auto p = softmax(z);
    for (Eigen::Index c = 0; c < delta.cols(); ++c) delta(r, c) = p[static_cast<std::size_t>(c)];
    delta(r, static_cast<Eigen::Index>(t)) -= 1.0;
  }
  delta /= n;

  LossAndGradient out;
  out.loss = total / n;
  out.grads.layers.resize(layers.size());
  for (std::size_t i = layers.size(); i-- > 0;) {
    auto& g = out.grads.layers[i];
    if (i == 0) {
      g.weights.noalias() = delta.transpose() * inputs;
    } else {
      g.weights.noalias() = delta.transpose() * pre[i - 1].cwiseMax(0.0);
    }
    g.bias = delta.colwise().sum().transpose();
    if (i > 0) {
      RowMatrix upstream;
      upstream.noalias() = delta * layers[i].weights;
      delta = upstream.cwiseProduct((pre[i - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return out;
}

LossAndGradient backward(const MlpModel& model, std::span<const double> input, std::size_t target) {
  check_input(model, static_cast<Eigen::Index>(input.size()));
  const std::size_t t[] = {target};
  return backward_batch(model, as_row(input), t);
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of an empty vector");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

Prediction predict_flat(const MlpModel& model, std::span<const double> input) {
  if (model.output_dim() != kClassCount) {
    throw DimensionError("model emits " + std::to_string(model.output_dim()) +
                         " scores, expected one per gesture class");
  }
  Prediction p;
  p.probabilities = softmax(forward(model, input));
  p.gesture = class_from_index(argmax(p.probabilities));
  return p;
}

Prediction predict(const MlpModel& model, const PoseFrame& frame) {
  return predict_flat(model, frame.flatten());
}

}  // namespace gesture
