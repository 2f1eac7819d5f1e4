#include "gesture/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace gesture {

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : n_(classes), counts_(classes * classes, 0) {
  if (classes == 0) throw std::invalid_argument("confusion matrix needs at least one class");
}

ConfusionMatrix ConfusionMatrix::from_rows(const std::vector<std::vector<std::uint64_t>>& rows) {
  ConfusionMatrix cm(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.size()) throw std::invalid_argument("confusion matrix must be square");
    std::copy(rows[r].begin(), rows[r].end(), cm.counts_.begin() + static_cast<std::ptrdiff_t>(r * cm.n_));
  }
  return cm;
}

std::uint64_t ConfusionMatrix::at(std::size_t truth, std::size_t predicted) const {
  if (truth >= n_ || predicted >= n_) throw std::out_of_range("confusion matrix index out of range");
  return counts_[truth * n_ + predicted];
}

std::uint64_t ConfusionMatrix::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t s = 0;
  for (std::size_t c = 0; c < n_; ++c) s += at(truth, c);
  return s;
}

std::uint64_t ConfusionMatrix::column_sum(std::size_t predicted) const {
  std::uint64_t s = 0;
  for (std::size_t r = 0; r < n_; ++r) s += at(r, predicted);
  return s;
}

std::uint64_t ConfusionMatrix::trace() const noexcept {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < n_; ++i) s += counts_[i * n_ + i];
  return s;
}

void ConfusionMatrix::accumulate(std::size_t truth, std::size_t predicted) {
  if (truth >= n_ || predicted >= n_) throw std::out_of_range("confusion matrix index out of range");
  ++counts_[truth * n_ + predicted];
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.n_ != n_) throw std::invalid_argument("cannot merge confusion matrices of different sizes");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

namespace {

Metric ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

MacroAverage macro(const std::vector<ClassMetrics>& rows, Metric ClassMetrics::*field) {
  MacroAverage out;
  double sum = 0.0;
  std::size_t used = 0;
  for (const auto& r : rows) {
    if (const auto& m = r.*field) {
      sum += *m;
      ++used;
    } else {
      ++out.skipped;
    }
  }
  if (used > 0) out.value = sum / static_cast<double>(used);
  return out;
}

std::string fmt_metric(const Metric& m) {
  if (!m) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *m);
  return buf;
}

std::string label_for(std::size_t i, std::size_t n) {
  if (n == kClassCount) return std::string(class_name(class_from_index(i)));
  return std::to_string(i);
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

nlohmann::ordered_json metric_json(const Metric& m) {
  return m ? nlohmann::ordered_json(*m) : nlohmann::ordered_json(nullptr);
}

}  // namespace

ClassReport report(const ConfusionMatrix& cm) {
  ClassReport out;
  const std::size_t n = cm.classes();
  for (std::size_t c = 0; c < n; ++c) {
    ClassMetrics m;
    m.support = cm.row_sum(c);
    m.precision = ratio(cm.at(c, c), cm.column_sum(c));
    m.recall = ratio(cm.at(c, c), m.support);
    if (m.precision && m.recall && *m.precision + *m.recall > 0.0) {
      m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    } else if (m.precision && m.recall) {
      m.f1 = 0.0;
    }
    out.per_class.push_back(m);
  }
  out.macro_precision = macro(out.per_class, &ClassMetrics::precision);
  out.macro_recall = macro(out.per_class, &ClassMetrics::recall);
  out.macro_f1 = macro(out.per_class, &ClassMetrics::f1);

  // Single-label: every sample adds one to both a row and a column.
  std::uint64_t tp = 0, predicted = 0, actual = 0;
  for (std::size_t c = 0; c < n; ++c) {
    tp += cm.at(c, c);
    predicted += cm.column_sum(c);
    actual += cm.row_sum(c);
  }
  out.micro_precision = ratio(tp, predicted);
  out.micro_recall = ratio(tp, actual);
  out.accuracy = ratio(cm.trace(), cm.total());
  return out;
}

std::string render_report(const ClassReport& rep, const ConfusionMatrix& cm) {
  const std::size_t n = cm.classes();
  std::size_t name_width = 9;
  for (std::size_t i = 0; i < n; ++i) name_width = std::max(name_width, label_for(i, n).size());
  name_width += 2;
  constexpr std::size_t kCol = 11;

  std::string out;
  out += pad_right("class", name_width) + pad_left("precision", kCol) + pad_left("recall", kCol) +
         pad_left("f1", kCol) + pad_left("support", kCol) + "\n";
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = rep.per_class[i];
    out += pad_right(label_for(i, n), name_width) + pad_left(fmt_metric(m.precision), kCol) +
           pad_left(fmt_metric(m.recall), kCol) + pad_left(fmt_metric(m.f1), kCol) +
           pad_left(std::to_string(m.support), kCol) + "\n";
  }
  out += "\n";
  auto macro_line = [&](const char* name, const MacroAverage& a) {
    out += pad_right(name, 17) + pad_left(fmt_metric(a.value), kCol) + "  (skipped " +
           std::to_string(a.skipped) + ")\n";
  };
  macro_line("macro precision", rep.macro_precision);
  macro_line("macro recall", rep.macro_recall);
  macro_line("macro f1", rep.macro_f1);
  out += pad_right("accuracy", 17) + pad_left(fmt_metric(rep.accuracy), kCol) + "  (n=" +
         std::to_string(cm.total()) + ")\n";

  out += "\nconfusion matrix (rows = true, columns = predicted)\n";
  std::size_t cell = 6;
  for (std::size_t i = 0; i < n; ++i) cell = std::max(cell, label_for(i, n).size() + 1);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) cell = std::max(cell, std::to_string(cm.at(r, c)).size() + 1);
  }
  out += pad_right("", name_width);
  for (std::size_t c = 0; c < n; ++c) out += pad_left(label_for(c, n), cell);
  out += "\n";
  for (std::size_t r = 0; r < n; ++r) {
    out += pad_right(label_for(r, n), name_width);
    for (std::size_t c = 0; c < n; ++c) out += pad_left(std::to_string(cm.at(r, c)), cell);
    out += "\n";
  }
  return out;
}

nlohmann::ordered_json report_to_json(const ClassReport& rep, const ConfusionMatrix& cm) {
  nlohmann::ordered_json out;
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < rep.per_class.size(); ++i) {
    const auto& m = rep.per_class[i];
    nlohmann::ordered_json row;
    row["class"] = label_for(i, cm.classes());
    row["precision"] = metric_json(m.precision);
    row["recall"] = metric_json(m.recall);
    row["f1"] = metric_json(m.f1);
    row["support"] = m.support;
    classes.push_back(row);
  }
  out["classes"] = classes;
  auto macro_json = [](const MacroAverage& a) {
    nlohmann::ordered_json j;
    j["value"] = metric_json(a.value);
    j["skipped"] = a.skipped;
    return j;
  };
  out["macro_precision"] = macro_json(rep.macro_precision);
  out["macro_recall"] = macro_json(rep.macro_recall);
  out["macro_f1"] = macro_json(rep.macro_f1);
  out["micro_precision"] = metric_json(rep.micro_precision);
  out["micro_recall"] = metric_json(rep.micro_recall);
  out["accuracy"] = metric_json(rep.accuracy);
  nlohmann::ordered_json matrix = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < cm.classes(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < cm.classes(); ++c) row.push_back(cm.at(r, c));
    matrix.push_back(row);
  }
  out["confusion_matrix"] = matrix;
  return out;
}

}  // namespace gesture
