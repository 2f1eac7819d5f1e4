#include "gesture/pose.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace gesture {

namespace lm {

namespace {
constexpr std::array<std::string_view, kLandmarkCount> kNames = {
    "nose",           "left_eye_inner", "left_eye",       "left_eye_outer", "right_eye_inner",
    "right_eye",      "right_eye_outer", "left_ear",      "right_ear",      "mouth_left",
    "mouth_right",    "left_shoulder",  "right_shoulder", "left_elbow",     "right_elbow",
    "left_wrist",     "right_wrist",    "left_pinky",     "right_pinky",    "left_index",
    "right_index",    "left_thumb",     "right_thumb",    "left_hip",       "right_hip",
    "left_knee",      "right_knee",     "left_ankle",     "right_ankle",    "left_heel",
    "right_heel",     "left_foot_index", "right_foot_index"};
}  // namespace

std::size_t mirror(std::size_t index) {
  if (index >= kLandmarkCount) throw std::out_of_range("landmark index out of range");
  if (index == nose) return nose;
  // Face: 1..3 pair with 4..6; everything from the ears on alternates left/right.
  if (index <= left_eye_outer) return index + 3;
  if (index <= right_eye_outer) return index - 3;
  return (index % 2 == 1) ? index + 1 : index - 1;
}

std::string_view name(std::size_t index) {
  if (index >= kLandmarkCount) throw std::out_of_range("landmark index out of range");
  return kNames[index];
}

}  // namespace lm

void validate(const Landmark& l) {
  if (!std::isfinite(l.x) || !std::isfinite(l.y) || !std::isfinite(l.z) ||
      !std::isfinite(l.visibility)) {
    throw InvalidPose(InvalidPose::Fault::nonfinite, "landmark has a non-finite value");
  }
  if (l.visibility < 0.0 || l.visibility > 1.0) {
    throw InvalidPose(InvalidPose::Fault::visibility, "landmark visibility outside [0, 1]");
  }
}

PoseFrame::PoseFrame(const Landmarks& landmarks) : landmarks_(landmarks) {
  for (const auto& l : landmarks_) validate(l);
}

PoseFrame PoseFrame::from_flat(std::span<const double> values) {
  if (values.size() != kFrameWidth) {
    throw InvalidPose(InvalidPose::Fault::arity,
                      "flat frame must hold " + std::to_string(kFrameWidth) + " values, got " +
                          std::to_string(values.size()));
  }
  Landmarks ls;
  for (std::size_t k = 0; k < kLandmarkCount; ++k) {
    const auto* p = values.data() + k * kChannels;
    ls[k] = Landmark{p[0], p[1], p[2], p[3]};
  }
  return PoseFrame(ls);
}

std::vector<double> PoseFrame::flatten() const {
  std::vector<double> out(kFrameWidth);
  flatten_into(out);
  return out;
}

void PoseFrame::flatten_into(std::span<double> out) const {
  if (out.size() != kFrameWidth) throw std::invalid_argument("flatten target must hold 132 values");
  for (std::size_t k = 0; k < kLandmarkCount; ++k) {
    const auto& l = landmarks_[k];
    out[k * kChannels + 0] = l.x;
    out[k * kChannels + 1] = l.y;
    out[k * kChannels + 2] = l.z;
    out[k * kChannels + 3] = l.visibility;
  }
}

namespace {
constexpr std::array<std::string_view, kClassCount> kClassNames = {
    "attention", "right", "left", "stop", "yes", "shrug", "random", "static"};
}

GestureClass class_from_index(std::size_t index) {
  if (index >= kClassCount) {
    throw std::out_of_range("gesture class index " + std::to_string(index) + " out of range");
  }
  return static_cast<GestureClass>(index);
}

std::string_view class_name(GestureClass c) noexcept { return kClassNames[index_of(c)]; }

std::optional<GestureClass> parse_class(std::string_view name) noexcept {
  const auto it = std::find(kClassNames.begin(), kClassNames.end(), name);
  if (it == kClassNames.end()) return std::nullopt;
  return static_cast<GestureClass>(it - kClassNames.begin());
}

void validate(const Sample& sample) {
  if (!std::isfinite(sample.distance_m) || sample.distance_m <= 0.0) {
    throw InvalidPose(InvalidPose::Fault::distance, "distance_m must be positive");
  }
}

std::array<std::size_t, kClassCount> class_histogram(const Dataset& ds) {
  std::array<std::size_t, kClassCount> counts{};
  for (const auto& s : ds.samples) ++counts[index_of(s.label)];
  return counts;
}

std::vector<std::string> subjects(const Dataset& ds) {
  std::set<std::string> unique;
  for (const auto& s : ds.samples) unique.insert(s.subject);
  return {unique.begin(), unique.end()};
}

}  // namespace gesture
