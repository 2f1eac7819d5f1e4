#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gesture/nn.hpp"

namespace gesture {

struct AdamParams {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  /// Throws std::invalid_argument unless lr > 0, 0 <= beta < 1 and eps > 0.
  void validate() const;
};

/// Bias-corrected Adam. Keeps one first/second-moment buffer per parameter block.
class AdamOptimizer {
 public:
  AdamOptimizer(std::vector<std::size_t> block_sizes, AdamParams params = {});

  /// Two blocks per layer (weights, then bias), matching the model's layout.
  static AdamOptimizer for_model(const MlpModel& model, AdamParams params = {});

  /// One update over every block. Shapes must match the constructor's.
  void step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads);
  void step(MlpModel& model, const GradientSet& grads);

  const AdamParams& params() const noexcept { return params_; }
  std::uint64_t step_count() const noexcept { return t_; }
  const std::vector<std::vector<double>>& first_moments() const noexcept { return m_; }
  const std::vector<std::vector<double>>& second_moments() const noexcept { return v_; }

 private:
  AdamParams params_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace gesture
