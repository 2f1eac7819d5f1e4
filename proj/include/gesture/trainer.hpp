#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gesture/adam.hpp"
#include "gesture/dataio.hpp"
#include "gesture/metrics.hpp"
#include "gesture/nn.hpp"
#include "gesture/pose.hpp"

namespace gesture {

struct TrainConfig {
  std::uint64_t seed = 42;
  std::size_t max_epochs = 2000;
  /// 0 trains full-batch; otherwise seeded shuffled mini-batches of this size.
  std::size_t batch_size = 0;
  std::size_t patience = 50;
  bool normalize = false;
  AdamParams adam;
  std::vector<std::size_t> dims = MlpModel::default_dims();

  void validate() const;
};

struct Fold {
  std::string held_out_subject;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

struct SplitPlan {
  std::vector<Fold> folds;
};

/// One fold per subject, in lexicographic subject order. Needs at least two subjects.
SplitPlan loso_split(const Dataset& ds);

/// Moves the hip midpoint to the origin and divides x, y, z by the
/// shoulder-midpoint to hip-midpoint distance. Throws std::domain_error on a
/// zero-length torso.
PoseFrame normalize_frame(const PoseFrame& frame);

/// Rows of flattened (optionally normalized) frames for the given samples.
RowMatrix design_matrix(const Dataset& ds, std::span<const std::size_t> indices, bool normalize);

struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> heldout_loss;
  /// 1-based epoch whose model was kept.
  std::size_t best_epoch = 0;
  MlpModel model{MlpModel::default_dims()};
  double wall_seconds = 0.0;

  std::size_t epochs_run() const noexcept { return train_loss.size(); }
  double best_heldout_loss() const { return heldout_loss.at(best_epoch - 1); }
};

/// Trains on the fold's train indices with early stopping on the test indices.
TrainReport train_fold(const Dataset& ds, const Fold& fold, const TrainConfig& config);

/// Lower-level entry point over prepared matrices, used by train_fold.
TrainReport train_on(const RowMatrix& train_x, std::span<const std::size_t> train_y,
                     const RowMatrix& test_x, std::span<const std::size_t> test_y,
                     const TrainConfig& config);

struct FoldResult {
  Fold fold;
  TrainReport report;
  std::vector<GestureClass> predictions;  // parallel to fold.test_indices
  ConfusionMatrix confusion;
};

struct LosoResult {
  std::vector<FoldResult> folds;
  ConfusionMatrix pooled;
};

/// Full rotation, or the single fold for `only_subject`. Folds may run on
/// `jobs` threads; results are assembled in subject order.
LosoResult run_loso(const Dataset& ds, const TrainConfig& config,
                    const std::optional<std::string>& only_subject = std::nullopt, std::size_t jobs = 1);

Checkpoint to_checkpoint(const FoldResult& result, const TrainConfig& config);

/// Deterministic text summary: per-fold training outcome plus pooled metrics.
std::string render_training_report(const LosoResult& result, const TrainConfig& config);

}  // namespace gesture
