#include "gesture/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace gesture {

void TrainConfig::validate() const {
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be at least 1");
  if (patience < 1) throw std::invalid_argument("patience must be at least 1");
  adam.validate();
  if (dims.size() < 2) throw std::invalid_argument("model needs at least one layer");
}

SplitPlan loso_split(const Dataset& ds) {
  const auto ids = subjects(ds);
  if (ids.size() < 2) {
    throw std::invalid_argument("leave-one-subject-out needs at least 2 subjects, found " +
                                std::to_string(ids.size()));
  }
  SplitPlan plan;
  for (const auto& id : ids) {
    Fold fold;
    fold.held_out_subject = id;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      (ds.samples[i].subject == id ? fold.test_indices : fold.train_indices).push_back(i);
    }
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

PoseFrame normalize_frame(const PoseFrame& frame) {
  auto mid = [&](std::size_t a, std::size_t b) {
    return std::array<double, 3>{(frame[a].x + frame[b].x) / 2.0, (frame[a].y + frame[b].y) / 2.0,
                                 (frame[a].z + frame[b].z) / 2.0};
  };
  const auto hip = mid(lm::left_hip, lm::right_hip);
  const auto shoulder = mid(lm::left_shoulder, lm::right_shoulder);
  const double torso = std::hypot(shoulder[0] - hip[0], shoulder[1] - hip[1], shoulder[2] - hip[2]);
  if (!(torso > 0.0) || !std::isfinite(torso)) {
    throw std::domain_error("cannot normalize a skeleton with zero torso length");
  }
  PoseFrame::Landmarks out = frame.landmarks();
  for (auto& p : out) {
    p.x = (p.x - hip[0]) / torso;
    p.y = (p.y - hip[1]) / torso;
    p.z = (p.z - hip[2]) / torso;
  }
  return PoseFrame(out);
}

RowMatrix design_matrix(const Dataset& ds, std::span<const std::size_t> indices, bool normalize) {
  RowMatrix x(static_cast<Eigen::Index>(indices.size()), static_cast<Eigen::Index>(kFrameWidth));
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto& frame = ds.samples.at(indices[r]).frame;
    std::span<double> row{x.row(static_cast<Eigen::Index>(r)).data(), kFrameWidth};
    (normalize ? normalize_frame(frame) : frame).flatten_into(row);
  }
  return x;
}

namespace {

std::vector<std::size_t> labels_of(const Dataset& ds, std::span<const std::size_t> indices) {
  std::vector<std::size_t> y;
  y.reserve(indices.size());
  for (auto i : indices) y.push_back(index_of(ds.samples.at(i).label));
  return y;
}

}  // namespace

TrainReport train_on(const RowMatrix& train_x, std::span<const std::size_t> train_y,
                     const RowMatrix& test_x, std::span<const std::size_t> test_y,
                     const TrainConfig& config) {
  config.validate();
  if (train_x.rows() == 0 || train_y.empty()) throw std::invalid_argument("empty training partition");
  if (test_x.rows() == 0 || test_y.empty()) throw std::invalid_argument("empty held-out partition");

  const auto started = std::chrono::steady_clock::now();
  MlpModel model = MlpModel::he_initialized(config.dims, config.seed);
  AdamOptimizer adam = AdamOptimizer::for_model(model, config.adam);
  std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  const std::size_t n = train_y.size();
  const bool full_batch = config.batch_size == 0 || config.batch_size >= n;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainReport report;
  report.model = model;
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    double epoch_loss = 0.0;
    if (full_batch) {
      const auto step = backward_batch(model, train_x, train_y);
      adam.step(model, step.grads);
      epoch_loss = step.loss;
    } else {
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      for (std::size_t start = 0; start < n; start += config.batch_size) {
        const std::size_t len = std::min(config.batch_size, n - start);
        RowMatrix bx(static_cast<Eigen::Index>(len), train_x.cols());
        std::vector<std::size_t> by(len);
        for (std::size_t k = 0; k < len; ++k) {
          bx.row(static_cast<Eigen::Index>(k)) = train_x.row(static_cast<Eigen::Index>(order[start + k]));
          by[k] = train_y[order[start + k]];
        }
        const auto step = backward_batch(model, bx, by);
        adam.step(model, step.grads);
        epoch_loss += step.loss * static_cast<double>(len);
      }
      epoch_loss /= static_cast<double>(n);
    }

    const double held = mean_loss(model, test_x, test_y);
    report.train_loss.push_back(epoch_loss);
    report.heldout_loss.push_back(held);
    if (held < best) {
      best = held;
      report.best_epoch = epoch;
      report.model = model;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

TrainReport train_fold(const Dataset& ds, const Fold& fold, const TrainConfig& config) {
  if (fold.train_indices.empty()) throw std::invalid_argument("fold has no training samples");
  if (fold.test_indices.empty()) throw std::invalid_argument("fold has no held-out samples");
  const auto train_x = design_matrix(ds, fold.train_indices, config.normalize);
  const auto test_x = design_matrix(ds, fold.test_indices, config.normalize);
  return train_on(train_x, labels_of(ds, fold.train_indices), test_x, labels_of(ds, fold.test_indices),
                  config);
}

namespace {

FoldResult run_fold(const Dataset& ds, const Fold& fold, const TrainConfig& config) {
  FoldResult result{fold, train_fold(ds, fold, config), {}, ConfusionMatrix{}};
  const RowMatrix logits =
      forward_batch(result.report.model, design_matrix(ds, fold.test_indices, config.normalize));
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const std::size_t best = argmax({logits.row(r).data(), static_cast<std::size_t>(logits.cols())});
    result.predictions.push_back(class_from_index(best));
    result.confusion.accumulate(ds.samples[fold.test_indices[static_cast<std::size_t>(r)]].label,
                                result.predictions.back());
  }
  return result;
}

}  // namespace

LosoResult run_loso(const Dataset& ds, const TrainConfig& config,
                    const std::optional<std::string>& only_subject, std::size_t jobs) {
  config.validate();
  if (config.dims.back() != kClassCount) {
    throw std::invalid_argument("model output width must equal the gesture class count");
  }
  auto plan = loso_split(ds);
  if (only_subject) {
    std::erase_if(plan.folds, [&](const Fold& f) { return f.held_out_subject != *only_subject; });
    if (plan.folds.empty()) throw std::invalid_argument("no subject '" + *only_subject + "' in dataset");
  }

  LosoResult out;
  jobs = std::max<std::size_t>(1, jobs);
  for (std::size_t start = 0; start < plan.folds.size(); start += jobs) {
    const std::size_t end = std::min(plan.folds.size(), start + jobs);
    if (jobs == 1) {
      out.folds.push_back(run_fold(ds, plan.folds[start], config));
      continue;
    }
    std::vector<std::future<FoldResult>> pending;
    for (std::size_t i = start; i < end; ++i) {
      pending.push_back(std::async(std::launch::async, run_fold, std::cref(ds), std::cref(plan.folds[i]),
                                   std::cref(config)));
    }
    for (auto& f : pending) out.folds.push_back(f.get());
  }

  for (const auto& fr : out.folds) out.pooled.merge(fr.confusion);
  return out;
}

Checkpoint to_checkpoint(const FoldResult& result, const TrainConfig& config) {
  const auto& r = result.report;
  TrainingMetadata meta;
  meta.seed = config.seed;
  meta.epochs_run = r.epochs_run();
  meta.best_epoch = r.best_epoch;
  meta.final_train_loss = r.train_loss.at(r.best_epoch - 1);
  meta.final_heldout_loss = r.best_heldout_loss();
  meta.held_out_subject = result.fold.held_out_subject;
  meta.normalize = config.normalize;
  return Checkpoint{r.model, meta};
}

std::string render_training_report(const LosoResult& result, const TrainConfig& config) {
  char buf[256];
  std::string out;
  out += "training configuration\n";
  std::string dims;
  for (std::size_t i = 0; i < config.dims.size(); ++i) {
    dims += (i ? "-" : "") + std::to_string(config.dims[i]);
  }
  std::snprintf(buf, sizeof buf,
                "  seed %llu  dims %s  max_epochs %zu  patience %zu  batch %s  normalize %s\n",
                static_cast<unsigned long long>(config.seed), dims.c_str(), config.max_epochs,
                config.patience, config.batch_size == 0 ? "full" : std::to_string(config.batch_size).c_str(),
                config.normalize ? "on" : "off");
  out += buf;
  std::snprintf(buf, sizeof buf, "  adam lr %g  beta1 %g  beta2 %g  eps %g\n\n", config.adam.learning_rate,
                config.adam.beta1, config.adam.beta2, config.adam.epsilon);
  out += buf;

  out += "folds (held-out subject)\n";
  std::snprintf(buf, sizeof buf, "  %-10s %8s %8s %12s %12s %10s\n", "subject", "epochs", "best",
                "train_loss", "heldout_loss", "accuracy");
  out += buf;
  for (const auto& fr : result.folds) {
    const auto& r = fr.report;
    const auto accuracy = report(fr.confusion).accuracy;
    std::snprintf(buf, sizeof buf, "  %-10s %8zu %8zu %12.6f %12.6f %10.4f\n", fr.fold.held_out_subject.c_str(),
                  r.epochs_run(), r.best_epoch, r.train_loss.at(r.best_epoch - 1), r.best_heldout_loss(),
                  accuracy.value_or(0.0));
    out += buf;
  }
  out += "\npooled held-out evaluation\n";
  out += render_report(report(result.pooled), result.pooled);
  return out;
}

}  // namespace gesture
