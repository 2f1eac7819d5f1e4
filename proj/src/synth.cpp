#include "gesture/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace gesture::synth {

namespace {

constexpr double kMidline = 0.5;
constexpr double kCenterY = 0.5;
constexpr double kUpperArm = 0.12;
constexpr double kForearm = 0.11;
// Fraction of visibility lost per meter beyond the first.
constexpr double kVisibilityFalloff = 0.03;

// Offsets along (outward from the midline, down, toward-camera-negative z).
struct Offset {
  double out = 0.0;
  double down = 0.0;
  double z = 0.0;
};

// Elbow and wrist relative to the shoulder; hand points relative to the wrist.
struct ArmPose {
  Offset elbow;
  Offset wrist;
  Offset pinky;
  Offset index;
  Offset thumb;
};

enum Side : int { kLeft = 1, kRight = -1 };

constexpr double sign(Side s) { return static_cast<double>(static_cast<int>(s)); }

constexpr ArmPose kArmDown{{0.015, 0.12, 0.03}, {0.020, 0.23, 0.02},
                           {0.005, 0.035, -0.01}, {-0.002, 0.042, -0.02}, {-0.010, 0.030, -0.02}};
constexpr ArmPose kArmLateral{{0.12, 0.0, 0.0}, {0.23, -0.005, 0.0},
                              {0.035, 0.005, -0.01}, {0.042, -0.002, -0.02}, {0.030, -0.012, -0.02}};
constexpr ArmPose kArmOverhead{{0.06, -0.11, 0.0}, {0.05, -0.22, 0.0},
                               {0.003, -0.035, -0.01}, {-0.004, -0.042, -0.02}, {-0.012, -0.030, -0.02}};
// Elbows out, forearms out sideways, palms up.
constexpr ArmPose kArmShrug{{0.09, 0.08, 0.0}, {0.20, 0.05, -0.05},
                            {0.030, 0.005, -0.01}, {0.035, -0.005, -0.02}, {0.020, -0.015, -0.02}};
// Forearm toward the camera at chest height, open palm, fingers up.
constexpr ArmPose kArmPalmOut{{0.02, 0.06, -0.15}, {0.03, 0.0, -0.28},
                              {0.012, -0.035, -0.01}, {-0.005, -0.045, -0.01}, {-0.020, -0.020, -0.01}};
// Same arm as kArmPalmOut, closed fist with the thumb up.
constexpr ArmPose kArmThumbUp{{0.02, 0.06, -0.15}, {0.03, 0.0, -0.28},
                              {0.010, -0.012, -0.015}, {-0.002, -0.018, -0.02}, {-0.008, -0.040, -0.015}};
constexpr double kShrugLift = 0.04;
constexpr double kRandomMargin = 0.50;
constexpr int kRandomAttempts = 1000;

using Landmarks = PoseFrame::Landmarks;

Landmark symmetric(double out, double y, double z, double vis, Side side) {
  return Landmark{kMidline + sign(side) * out, y, z, vis};
}

Landmarks neutral_landmarks() {
  Landmarks l{};
  l[lm::nose] = {kMidline, 0.200, -0.30, 0.99};
  for (Side s : {kLeft, kRight}) {
    const bool left = s == kLeft;
    l[left ? lm::left_eye_inner : lm::right_eye_inner] = symmetric(0.010, 0.185, -0.29, 0.99, s);
    l[left ? lm::left_eye : lm::right_eye] = symmetric(0.017, 0.184, -0.29, 0.99, s);
    l[left ? lm::left_eye_outer : lm::right_eye_outer] = symmetric(0.024, 0.185, -0.29, 0.99, s);
    l[left ? lm::left_ear : lm::right_ear] = symmetric(0.040, 0.195, -0.18, 0.97, s);
    l[left ? lm::mouth_left : lm::mouth_right] = symmetric(0.012, 0.225, -0.27, 0.99, s);
    l[left ? lm::left_shoulder : lm::right_shoulder] = symmetric(0.090, 0.300, -0.08, 0.99, s);
    l[left ? lm::left_hip : lm::right_hip] = symmetric(0.060, 0.550, 0.00, 0.98, s);
    l[left ? lm::left_knee : lm::right_knee] = symmetric(0.062, 0.720, 0.02, 0.93, s);
    l[left ? lm::left_ankle : lm::right_ankle] = symmetric(0.062, 0.880, 0.06, 0.88, s);
    l[left ? lm::left_heel : lm::right_heel] = symmetric(0.060, 0.900, 0.07, 0.85, s);
    l[left ? lm::left_foot_index : lm::right_foot_index] = symmetric(0.070, 0.915, -0.02, 0.85, s);
  }
  return l;
}

struct ArmIndices {
  std::size_t shoulder, elbow, wrist, pinky, index, thumb;
};

ArmIndices arm_indices(Side side) {
  if (side == kLeft) {
    return {lm::left_shoulder, lm::left_elbow, lm::left_wrist, lm::left_pinky, lm::left_index, lm::left_thumb};
  }
  return {lm::right_shoulder, lm::right_elbow, lm::right_wrist, lm::right_pinky, lm::right_index,
          lm::right_thumb};
}

constexpr double kArmVisibility[] = {0.95, 0.92, 0.88, 0.88, 0.88};

// Writes elbow, wrist and hand landmarks for one arm given its shoulder position.
void place_arm(Landmarks& l, Side side, const ArmPose& pose) {
  const auto idx = arm_indices(side);
  const Landmark& sh = l[idx.shoulder];
  auto at = [&](const Landmark& origin, const Offset& o, double vis) {
    return Landmark{origin.x + sign(side) * o.out, origin.y + o.down, origin.z + o.z, vis};
  };
  l[idx.elbow] = at(sh, pose.elbow, kArmVisibility[0]);
  l[idx.wrist] = at(sh, pose.wrist, kArmVisibility[1]);
  const Landmark wrist = l[idx.wrist];
  l[idx.pinky] = at(wrist, pose.pinky, kArmVisibility[2]);
  l[idx.index] = at(wrist, pose.index, kArmVisibility[3]);
  l[idx.thumb] = at(wrist, pose.thumb, kArmVisibility[4]);
}

ArmPose random_arm(std::mt19937_64& rng) {
  constexpr double deg = std::numbers::pi / 180.0;
  std::uniform_real_distribution<double> raise(60.0 * deg, 160.0 * deg);
  std::uniform_real_distribution<double> bend(0.0, 110.0 * deg);
  std::uniform_real_distribution<double> depth(-0.10, 0.05);
  std::bernoulli_distribution flip(0.5);

  const double upper = raise(rng);
  const double fore = upper + (flip(rng) ? 1.0 : -1.0) * bend(rng);
  const double dz = depth(rng);
  ArmPose p;
  p.elbow = {kUpperArm * std::sin(upper), kUpperArm * std::cos(upper), 0.0};
  p.wrist = {p.elbow.out + kForearm * std::sin(fore), p.elbow.down + kForearm * std::cos(fore), dz};
  const double along_out = std::sin(fore);
  const double along_down = std::cos(fore);
  auto hand = [&](double along, double across) {
    return Offset{along * along_out + across * along_down, along * along_down - across * along_out, -0.015};
  };
  p.pinky = hand(0.035, 0.008);
  p.index = hand(0.042, 0.0);
  p.thumb = hand(0.030, -0.010);
  return p;
}

ArmPose representative_random_arm() {
  constexpr double deg = std::numbers::pi / 180.0;
  const double upper = 60.0 * deg;
  const double fore = 120.0 * deg;
  ArmPose p;
  p.elbow = {kUpperArm * std::sin(upper), kUpperArm * std::cos(upper), 0.0};
  p.wrist = {p.elbow.out + kForearm * std::sin(fore), p.elbow.down + kForearm * std::cos(fore), -0.02};
  p.pinky = {0.035 * std::sin(fore), 0.035 * std::cos(fore), -0.015};
  p.index = {0.042 * std::sin(fore), 0.042 * std::cos(fore), -0.015};
  p.thumb = {0.030 * std::sin(fore), 0.030 * std::cos(fore), -0.015};
  return p;
}

Landmarks class_landmarks(GestureClass cls, const SubjectStyle& style, std::mt19937_64* rng);

// Arm-landmark distance (x, y only) between two poses with identical torsos.
double arm_distance(const Landmarks& a, const Landmarks& b) {
  double sum = 0.0;
  for (std::size_t k = lm::left_elbow; k <= lm::right_thumb; ++k) {
    sum += (a[k].x - b[k].x) * (a[k].x - b[k].x) + (a[k].y - b[k].y) * (a[k].y - b[k].y);
  }
  return std::sqrt(sum);
}

// Random arms, redrawn until the pose is at least kRandomMargin away from
// every vocabulary gesture (either handedness).
Landmarks random_landmarks(std::mt19937_64& rng) {
  static const std::vector<Landmarks> vocabulary = [] {
    std::vector<Landmarks> v;
    for (auto cls : kAllClasses) {
      if (cls == GestureClass::random) continue;
      v.push_back(class_landmarks(cls, SubjectStyle{1.0, false}, nullptr));
      v.push_back(class_landmarks(cls, SubjectStyle{1.0, true}, nullptr));
    }
    return v;
  }();

  Landmarks l = neutral_landmarks();
  for (int attempt = 0; attempt < kRandomAttempts; ++attempt) {
    place_arm(l, kLeft, random_arm(rng));
    place_arm(l, kRight, random_arm(rng));
    const bool clear = std::all_of(vocabulary.begin(), vocabulary.end(),
                                   [&](const Landmarks& g) { return arm_distance(l, g) >= kRandomMargin; });
    if (clear) break;
  }
  return l;
}

Landmarks class_landmarks(GestureClass cls, const SubjectStyle& style, std::mt19937_64* rng) {
  Landmarks l = neutral_landmarks();
  const Side dominant = style.left_handed ? kLeft : kRight;
  const Side other = style.left_handed ? kRight : kLeft;
  switch (cls) {
    case GestureClass::attention:
      place_arm(l, kLeft, kArmOverhead);
      place_arm(l, kRight, kArmOverhead);
      break;
    case GestureClass::left:
      place_arm(l, kLeft, kArmLateral);
      place_arm(l, kRight, kArmDown);
      break;
    case GestureClass::right:
      place_arm(l, kRight, kArmLateral);
      place_arm(l, kLeft, kArmDown);
      break;
    case GestureClass::stop:
      place_arm(l, dominant, kArmPalmOut);
      place_arm(l, other, kArmDown);
      break;
    case GestureClass::yes:
      place_arm(l, dominant, kArmThumbUp);
      place_arm(l, other, kArmDown);
      break;
    case GestureClass::shrug:
      for (Side s : {kLeft, kRight}) {
        l[arm_indices(s).shoulder].y -= kShrugLift;
        place_arm(l, s, kArmShrug);
      }
      break;
    case GestureClass::random:
      if (rng) {
        l = random_landmarks(*rng);
      } else {
        place_arm(l, kLeft, representative_random_arm());
        place_arm(l, kRight, representative_random_arm());
      }
      break;
    case GestureClass::static_pose:
      place_arm(l, kLeft, kArmDown);
      place_arm(l, kRight, kArmDown);
      break;
  }

  if (style.amplitude != 1.0) {
    const Landmarks base = neutral_landmarks();
    Landmarks arms_down = base;
    place_arm(arms_down, kLeft, kArmDown);
    place_arm(arms_down, kRight, kArmDown);
    for (std::size_t k = 0; k < kLandmarkCount; ++k) {
      auto& p = l[k];
      const auto& q = arms_down[k];
      p.x = q.x + style.amplitude * (p.x - q.x);
      p.y = q.y + style.amplitude * (p.y - q.y);
      p.z = q.z + style.amplitude * (p.z - q.z);
    }
  }
  return l;
}

}  // namespace

void SynthConfig::validate() const {
  if (subjects < 1) throw std::invalid_argument("subjects must be at least 1");
  if (samples_per_class_per_subject < 1) {
    throw std::invalid_argument("samples per class per subject must be at least 1");
  }
  if (distances.empty()) throw std::invalid_argument("at least one distance is required");
  for (double d : distances) {
    if (!(d > 0.0) || !std::isfinite(d)) throw std::invalid_argument("distances must be positive");
  }
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw std::invalid_argument("noise_std must be non-negative");
  }
}

PoseFrame base_skeleton() {
  Landmarks l = neutral_landmarks();
  place_arm(l, kLeft, kArmDown);
  place_arm(l, kRight, kArmDown);
  return PoseFrame(l);
}

bool is_hand_landmark(std::size_t index) noexcept {
  return index >= lm::left_wrist && index <= lm::right_thumb;
}

PoseFrame apply_distance(const PoseFrame& frame, double distance_m) {
  if (!(distance_m > 0.0)) throw std::invalid_argument("distance must be positive");
  const double visibility_scale = std::clamp(1.0 - kVisibilityFalloff * (distance_m - 1.0), 0.0, 1.0);
  Landmarks l = frame.landmarks();
  for (auto& p : l) {
    p.x = kMidline + (p.x - kMidline) / distance_m;
    p.y = kCenterY + (p.y - kCenterY) / distance_m;
    p.z /= distance_m;
    p.visibility = std::clamp(p.visibility * visibility_scale, 0.0, 1.0);
  }
  return PoseFrame(l);
}

PoseFrame archetype_frame(GestureClass cls, const SubjectStyle& style, double distance_m,
                          std::mt19937_64* rng) {
  const PoseFrame frame(class_landmarks(cls, style, rng));
  return distance_m == 1.0 ? frame : apply_distance(frame, distance_m);
}

PoseFrame mirror_frame(const PoseFrame& frame) {
  Landmarks out{};
  for (std::size_t k = 0; k < kLandmarkCount; ++k) {
    Landmark p = frame[k];
    p.x = 2.0 * kMidline - p.x;
    out[lm::mirror(k)] = p;
  }
  return PoseFrame(out);
}

SubjectStyle subject_style(std::uint64_t seed, std::size_t subject_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(subject_index), 0u};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> amplitude(0.85, 1.15);
  std::bernoulli_distribution left_handed(0.5);
  SubjectStyle s;
  s.amplitude = amplitude(rng);
  s.left_handed = left_handed(rng);
  return s;
}

std::string subject_id(std::size_t subject_index, std::size_t subject_count) {
  const std::size_t width = std::max<std::size_t>(2, std::to_string(subject_count).size());
  std::string digits = std::to_string(subject_index + 1);
  return "s" + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

Dataset generate(const SynthConfig& config) {
  config.validate();
  Dataset ds;
  ds.samples.reserve(config.subjects * kClassCount * config.samples_per_class_per_subject *
                     config.distances.size());
  for (std::size_t s = 0; s < config.subjects; ++s) {
    const SubjectStyle style = subject_style(config.seed, s);
    const std::string id = subject_id(s, config.subjects);
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                      static_cast<std::uint32_t>(config.seed >> 32), static_cast<std::uint32_t>(s), 1u};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> noise(0.0, 1.0);

    for (auto cls : kAllClasses) {
      for (double distance : config.distances) {
        for (std::size_t r = 0; r < config.samples_per_class_per_subject; ++r) {
          const PoseFrame clean = archetype_frame(cls, style, distance, &rng);
          Landmarks l = clean.landmarks();
          if (config.noise_std > 0.0) {
            for (auto& p : l) {
              p.x += config.noise_std * noise(rng);
              p.y += config.noise_std * noise(rng);
              p.z += config.noise_std * noise(rng);
            }
          }
          ds.samples.push_back(Sample{PoseFrame(l), cls, id, distance});
        }
      }
    }
  }
  return ds;
}

}  // namespace gesture::synth
