#include <gtest/gtest.h>

#include <cmath>

#include "gesture/synth.hpp"

using namespace gesture;
using namespace gesture::synth;

namespace {

double frame_distance(const PoseFrame& a, const PoseFrame& b) {
  double s = 0;
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    s += std::pow(a[i].x - b[i].x, 2) + std::pow(a[i].y - b[i].y, 2) + std::pow(a[i].z - b[i].z, 2);
  }
  return std::sqrt(s);
}

double max_abs_diff(const PoseFrame& a, const PoseFrame& b) {
  double m = 0;
  const auto fa = a.flatten(), fb = b.flatten();
  for (std::size_t i = 0; i < fa.size(); ++i) m = std::max(m, std::abs(fa[i] - fb[i]));
  return m;
}

}  // namespace

TEST(Synth, DefaultSizeAndHistogram) {
  const auto ds = generate({});
  EXPECT_EQ(ds.size(), 8u * 8 * 5 * 3);
  for (auto n : class_histogram(ds)) EXPECT_EQ(n, 120u);
  const auto ids = subjects(ds);
  ASSERT_EQ(ids.size(), 8u);
  EXPECT_EQ(ids.front(), "s01");
  EXPECT_EQ(ids.back(), "s08");
}

TEST(Synth, SubjectIdsSortNumerically) {
  EXPECT_EQ(subject_id(0, 8), "s01");
  EXPECT_EQ(subject_id(9, 12), "s10");
  EXPECT_EQ(subject_id(4, 150), "s005");
}

TEST(Synth, SameSeedSameBytes) {
  SynthConfig c;
  c.subjects = 3;
  EXPECT_EQ(generate(c), generate(c));
  auto other = c;
  other.seed = 43;
  EXPECT_NE(generate(c), generate(other));
}

TEST(Synth, RejectsBadConfig) {
  SynthConfig c;
  c.subjects = 0;
  EXPECT_THROW(generate(c), std::invalid_argument);
  c = {};
  c.noise_std = -0.1;
  EXPECT_THROW(generate(c), std::invalid_argument);
  c = {};
  c.distances = {1.0, 0.0};
  EXPECT_THROW(generate(c), std::invalid_argument);
}

TEST(Synth, NoiselessSamplesAreTheirArchetype) {
  SynthConfig c;
  c.subjects = 4;
  c.noise_std = 0.0;
  c.samples_per_class_per_subject = 2;
  const auto ds = generate(c);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& s = ds.samples[i];
    if (s.label == GestureClass::random) continue;
    const auto style = subject_style(c.seed, i / (8 * 2 * 3));
    EXPECT_EQ(s.frame, archetype_frame(s.label, style, s.distance_m)) << i;
  }
}

TEST(Synth, ArchetypesArePairwiseDistinct) {
  for (double d : {1.0, 4.0, 6.0}) {
    for (bool lefty : {false, true}) {
      const SubjectStyle style{1.1, lefty};
      for (auto a : kAllClasses) {
        for (auto b : kAllClasses) {
          if (a == b) continue;
          EXPECT_GT(frame_distance(archetype_frame(a, style, d), archetype_frame(b, style, d)), 0.01 / d)
              << class_name(a) << " vs " << class_name(b) << " at " << d;
        }
      }
    }
  }
}

TEST(Synth, StopAndYesDifferOnlyInTheHand) {
  for (bool lefty : {false, true}) {
    const SubjectStyle style{0.9, lefty};
    const auto stop = archetype_frame(GestureClass::stop, style);
    const auto yes = archetype_frame(GestureClass::yes, style);
    bool any = false;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
      if (is_hand_landmark(i)) {
        any = any || !(stop[i] == yes[i]);
      } else {
        EXPECT_EQ(stop[i], yes[i]) << lm::name(i);
      }
    }
    EXPECT_TRUE(any);
  }
}

TEST(Synth, LeftIsMirrorOfRight) {
  for (double amp : {0.85, 1.0, 1.15}) {
    const SubjectStyle style{amp, false};
    EXPECT_LT(max_abs_diff(mirror_frame(archetype_frame(GestureClass::left, style)),
                           archetype_frame(GestureClass::right, style)),
              1e-12);
  }
  const auto base = base_skeleton();
  EXPECT_LT(max_abs_diff(mirror_frame(base), base), 1e-12);
}

TEST(Synth, HandednessMirrorsOneHandedGestures) {
  for (auto cls : {GestureClass::stop, GestureClass::yes}) {
    EXPECT_LT(max_abs_diff(mirror_frame(archetype_frame(cls, {1.0, false})), archetype_frame(cls, {1.0, true})),
              1e-12);
  }
}

TEST(Synth, StaticIsTheBaseSkeleton) {
  EXPECT_EQ(archetype_frame(GestureClass::static_pose, {1.12, true}), base_skeleton());
}

TEST(Synth, DistanceShrinksTowardCenterAndDimsVisibility) {
  const auto base = archetype_frame(GestureClass::attention);
  double prev_vis = 2.0, prev_spread = 1e9;
  for (double d : {1.0, 2.0, 4.0, 6.0}) {
    const auto f = apply_distance(base, d);
    double vis = 0, spread = 0;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
      vis += f[i].visibility;
      spread += std::abs(f[i].x - 0.5);
      EXPECT_LE(f[i].visibility, base[i].visibility);
      EXPECT_NEAR(f[i].x - 0.5, (base[i].x - 0.5) / d, 1e-15);
      EXPECT_NEAR(f[i].z, base[i].z / d, 1e-15);
    }
    EXPECT_LT(vis, prev_vis * (d == 1.0 ? 1e9 : 1.0));
    EXPECT_LT(spread, prev_spread);
    prev_vis = vis;
    prev_spread = spread;
  }
  EXPECT_LT(max_abs_diff(apply_distance(base, 1.0), base), 1e-15);
}

TEST(Synth, RandomDrawsVary) {
  std::mt19937_64 rng(5);
  const auto a = archetype_frame(GestureClass::random, {}, 1.0, &rng);
  const auto b = archetype_frame(GestureClass::random, {}, 1.0, &rng);
  EXPECT_NE(a, b);
  EXPECT_EQ(archetype_frame(GestureClass::random), archetype_frame(GestureClass::random));
}

TEST(Synth, StylesAreSeededPerSubject) {
  const auto a = subject_style(42, 3);
  const auto b = subject_style(42, 3);
  EXPECT_EQ(a.amplitude, b.amplitude);
  EXPECT_EQ(a.left_handed, b.left_handed);
  for (std::size_t s = 0; s < 50; ++s) {
    const auto st = subject_style(42, s);
    EXPECT_GE(st.amplitude, 0.85);
    EXPECT_LT(st.amplitude, 1.15);
  }
}
