#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gesture/pose.hpp"

namespace gesture {

/// Square count matrix; rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = kClassCount);
  /// Throws std::invalid_argument unless `rows` is square and non-empty.
  static ConfusionMatrix from_rows(const std::vector<std::vector<std::uint64_t>>& rows);

  std::size_t classes() const noexcept { return n_; }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const;
  std::uint64_t total() const noexcept;
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t column_sum(std::size_t predicted) const;
  std::uint64_t trace() const noexcept;

  /// Increments exactly one cell; throws std::out_of_range on a bad index.
  void accumulate(std::size_t truth, std::size_t predicted);
  void accumulate(GestureClass truth, GestureClass predicted) {
    accumulate(index_of(truth), index_of(predicted));
  }
  /// Cellwise sum; sizes must match.
  void merge(const ConfusionMatrix& other);

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<std::uint64_t> counts_;
};

/// std::nullopt marks a metric whose denominator is zero.
using Metric = std::optional<double>;

struct ClassMetrics {
  Metric precision;
  Metric recall;
  Metric f1;
  std::uint64_t support = 0;
};

struct MacroAverage {
  Metric value;
  /// Classes left out because their metric was undefined.
  std::size_t skipped = 0;
};

struct ClassReport {
  std::vector<ClassMetrics> per_class;
  MacroAverage macro_precision;
  MacroAverage macro_recall;
  MacroAverage macro_f1;
  Metric micro_precision;
  Metric micro_recall;
  Metric accuracy;
};

ClassReport report(const ConfusionMatrix& cm);

/// Fixed-width table plus the labelled confusion matrix. Class labels come
/// from gesture names when the matrix is 8x8, otherwise from indices.
std::string render_report(const ClassReport& report, const ConfusionMatrix& cm);

nlohmann::ordered_json report_to_json(const ClassReport& report, const ConfusionMatrix& cm);

}  // namespace gesture
