#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "gesture/nn.hpp"
#include "gesture/pose.hpp"

namespace gesture {

/// Bad file contents or an unreadable file. The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A dataset record or wire frame that fails to parse or validate.
class RecordError : public DataError {
 public:
  enum class Fault { parse, arity, nonfinite, label, range };

  RecordError(Fault fault, std::size_t line, const std::string& detail);

  Fault fault() const noexcept { return fault_; }
  /// 1-based line number, 0 when not read from a file.
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Fault fault_;
  std::size_t line_;
  std::string detail_;
};

class CheckpointError : public DataError {
 public:
  enum class Kind { io, corrupt, version, dims, classes };

  CheckpointError(Kind kind, const std::string& detail)
      : DataError("checkpoint: " + detail), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

std::string_view fault_name(RecordError::Fault fault) noexcept;

/// 33 x [x, y, z, visibility] arrays. Throws RecordError tagged with `line`.
PoseFrame frame_from_json(const nlohmann::json& landmarks, std::size_t line = 0);
nlohmann::ordered_json frame_to_json(const PoseFrame& frame);

/// json::parse with failures mapped to RecordError (overflowing numbers are `nonfinite`).
nlohmann::json parse_json_text(std::string_view text);

/// One dataset record (no trailing newline).
std::string format_record(const Sample& sample);
Sample parse_record(std::string_view line, std::size_t line_number = 0);

/// Reads newline-delimited records; blank lines are skipped.
Dataset read_dataset(const std::filesystem::path& path);
void write_dataset(const Dataset& ds, const std::filesystem::path& path);

inline constexpr int kCheckpointVersion = 1;

struct TrainingMetadata {
  std::uint64_t seed = 0;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double final_train_loss = 0.0;
  double final_heldout_loss = 0.0;
  /// Empty when the model was not trained on a subject-held-out fold.
  std::string held_out_subject;
  /// Whether inputs must go through normalize_frame before inference.
  bool normalize = false;

  friend bool operator==(const TrainingMetadata&, const TrainingMetadata&) = default;
};

struct Checkpoint {
  MlpModel model;
  TrainingMetadata meta;
};

std::string encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(std::string_view text);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Hex SHA-256 prefix (16 chars) identifying checkpoint bytes.
std::string model_checksum(std::string_view bytes);

/// Little-endian base64 payload of doubles; exposed for tests.
std::string encode_doubles(std::span<const double> values);
std::vector<double> decode_doubles(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace gesture
