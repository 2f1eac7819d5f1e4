#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gesture {

/// Number of body landmarks produced by the pose estimator.
inline constexpr std::size_t kLandmarkCount = 33;
/// Channels per landmark: x, y, z, visibility.
inline constexpr std::size_t kChannels = 4;
/// Length of a flattened frame.
inline constexpr std::size_t kFrameWidth = kLandmarkCount * kChannels;
inline constexpr std::size_t kClassCount = 8;

/// Thrown when a landmark, frame or sample violates its invariants.
class InvalidPose : public std::invalid_argument {
 public:
  enum class Fault { nonfinite, visibility, arity, distance };

  InvalidPose(Fault fault, const std::string& what)
      : std::invalid_argument(what), fault_(fault) {}

  Fault fault() const noexcept { return fault_; }

 private:
  Fault fault_;
};

/// 33-point body topology of the pose estimator. Left/right are from the
/// subject's point of view.
namespace lm {
enum Index : std::size_t {
  nose = 0,
  left_eye_inner,
  left_eye,
  left_eye_outer,
  right_eye_inner,
  right_eye,
  right_eye_outer,
  left_ear,
  right_ear,
  mouth_left,
  mouth_right,
  left_shoulder,
  right_shoulder,
  left_elbow,
  right_elbow,
  left_wrist,
  right_wrist,
  left_pinky,
  right_pinky,
  left_index,
  right_index,
  left_thumb,
  right_thumb,
  left_hip,
  right_hip,
  left_knee,
  right_knee,
  left_ankle,
  right_ankle,
  left_heel,
  right_heel,
  left_foot_index,
  right_foot_index,
};

/// Index of the same body part on the other side (identity for the nose).
std::size_t mirror(std::size_t index);
std::string_view name(std::size_t index);
}  // namespace lm

struct Landmark {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double visibility = 0.0;

  friend bool operator==(const Landmark&, const Landmark&) = default;
};

/// Throws InvalidPose unless coordinates are finite and visibility in [0,1].
void validate(const Landmark& landmark);

/// One pose snapshot of exactly 33 validated landmarks.
class PoseFrame {
 public:
  using Landmarks = std::array<Landmark, kLandmarkCount>;

  /// All-zero frame.
  PoseFrame() = default;
  explicit PoseFrame(const Landmarks& landmarks);

  /// Inverse of flatten(); throws InvalidPose on wrong length or bad values.
  static PoseFrame from_flat(std::span<const double> values);

  const Landmarks& landmarks() const noexcept { return landmarks_; }
  const Landmark& operator[](std::size_t i) const { return landmarks_[i]; }

  /// Landmark-major layout: [x0, y0, z0, v0, x1, ...].
  std::vector<double> flatten() const;
  void flatten_into(std::span<double> out) const;

  friend bool operator==(const PoseFrame&, const PoseFrame&) = default;

 private:
  Landmarks landmarks_{};
};

inline std::vector<double> flatten_frame(const PoseFrame& frame) { return frame.flatten(); }

enum class GestureClass : std::size_t {
  attention = 0,
  right = 1,
  left = 2,
  stop = 3,
  yes = 4,
  shrug = 5,
  random = 6,
  static_pose = 7,
};

inline constexpr std::array<GestureClass, kClassCount> kAllClasses = {
    GestureClass::attention, GestureClass::right, GestureClass::left,   GestureClass::stop,
    GestureClass::yes,       GestureClass::shrug, GestureClass::random, GestureClass::static_pose};

constexpr std::size_t index_of(GestureClass c) noexcept { return static_cast<std::size_t>(c); }

/// Throws std::out_of_range for indices >= 8.
GestureClass class_from_index(std::size_t index);

/// Lowercase wire name ("attention", ..., "static").
std::string_view class_name(GestureClass c) noexcept;
std::optional<GestureClass> parse_class(std::string_view name) noexcept;

struct Sample {
  PoseFrame frame;
  GestureClass label = GestureClass::static_pose;
  std::string subject;
  double distance_m = 1.0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// Throws InvalidPose if distance_m is not a positive finite number.
void validate(const Sample& sample);

struct Dataset {
  std::vector<Sample> samples;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

std::array<std::size_t, kClassCount> class_histogram(const Dataset& ds);

/// Distinct subject identifiers in lexicographic order.
std::vector<std::string> subjects(const Dataset& ds);

}  // namespace gesture
