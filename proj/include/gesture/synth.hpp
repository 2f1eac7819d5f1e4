#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gesture/pose.hpp"

namespace gesture::synth {

/// Per-subject variation applied on top of every class archetype.
struct SubjectStyle {
  /// Scales each landmark's displacement away from the neutral stance.
  double amplitude = 1.0;
  /// One-handed gestures (stop, yes) use the left arm instead of the right.
  bool left_handed = false;
};

struct SynthConfig {
  std::size_t subjects = 8;
  std::size_t samples_per_class_per_subject = 5;
  std::vector<double> distances{1.0, 4.0, 6.0};
  double noise_std = 0.02;
  std::uint64_t seed = 42;

  /// Throws std::invalid_argument on zero counts, negative noise or non-positive distances.
  void validate() const;
};

/// Neutral standing pose at 1 m: image-normalized x, y in [0, 1], z relative depth.
PoseFrame base_skeleton();

/// Noiseless frame for one class.
///
/// The `random` class draws a fresh arm configuration from `rng`; without a
/// generator it falls back to one fixed representative configuration.
PoseFrame archetype_frame(GestureClass cls, const SubjectStyle& style = {}, double distance_m = 1.0,
                          std::mt19937_64* rng = nullptr);

/// Shrinks coordinates toward the frame center by 1/distance and lowers visibility.
PoseFrame apply_distance(const PoseFrame& frame, double distance_m);

/// Landmarks in which stop and yes archetypes are allowed to differ.
bool is_hand_landmark(std::size_t index) noexcept;

/// Reflects x about the body midline (x = 0.5) and swaps left/right indices.
PoseFrame mirror_frame(const PoseFrame& frame);

SubjectStyle subject_style(std::uint64_t seed, std::size_t subject_index);
std::string subject_id(std::size_t subject_index, std::size_t subject_count);

/// subjects x 8 classes x samples_per_class_per_subject x distances samples,
/// ordered subject-major, then class, distance and repetition.
Dataset generate(const SynthConfig& config);

}  // namespace gesture::synth
