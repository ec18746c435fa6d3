// Copyright 2026 The xres Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "xres/degrade.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <array>
#include <variant>
#include <vector>

#include "test_util.hpp"

namespace {

using ::xres::DegradationKind;
using ::xres::DegradationSettings;
using ::xres::Image;
using ::xres::SeedPath;
using ::xres::testing::random_image;

TEST(DegradationKindTest, NamesAndCodesRoundTrip) {
  const auto kinds = xres::all_degradation_kinds();
  ASSERT_EQ(kinds.size(), 11u);
  for (int code = 0; code < 11; ++code) {
    const DegradationKind k = xres::degradation_from_code(code);
    EXPECT_EQ(static_cast<int>(k), code);
    EXPECT_EQ(xres::degradation_from_string(xres::to_string(k)), k);
  }
  EXPECT_EQ(xres::to_string(DegradationKind::kGaussianBlur), "gaussian_blur");
  EXPECT_THROW(xres::degradation_from_string("jpeg"), std::invalid_argument);
  EXPECT_THROW(xres::degradation_from_code(11), std::invalid_argument);
  EXPECT_THROW(xres::degradation_from_code(-1), std::invalid_argument);
}

TEST(DegradationTest, EveryKindKeepsShapeAndRange) {
  const Image img = random_image(33, 21, 1);
  for (auto k : xres::all_degradation_kinds()) {
    const Image out = xres::apply_degradation(img, k, SeedPath(5));
    EXPECT_EQ(out.width(), 33) << xres::to_string(k);
    EXPECT_EQ(out.height(), 21) << xres::to_string(k);
    EXPECT_EQ(out.channels(), 3);
    for (int c = 0; c < 3; ++c) {
      EXPECT_GE(out.plane(c).minCoeff(), 0.0f);
      EXPECT_LE(out.plane(c).maxCoeff(), 1.0f);
    }
  }
}

TEST(DegradationTest, SameSeedSameOutput) {
  const Image img = random_image(24, 24, 2);
  for (auto k : xres::all_degradation_kinds()) {
    EXPECT_TRUE(xres::apply_degradation(img, k, SeedPath(9, {1, 2})) ==
                xres::apply_degradation(img, k, SeedPath(9, {1, 2})))
        << xres::to_string(k);
  }
}

TEST(DegradationTest, StochasticKindsDependOnSeed) {
  const Image img = random_image(24, 24, 3);
  for (auto k : xres::all_degradation_kinds()) {
    const bool same = xres::apply_degradation(img, k, SeedPath(1)) ==
                      xres::apply_degradation(img, k, SeedPath(2));
    EXPECT_EQ(same, xres::is_deterministic(k)) << xres::to_string(k);
  }
}

TEST(DegradationTest, GeometricKindsNeedEightPixels) {
  const Image small = random_image(7, 12, 4);
  for (auto k : xres::all_degradation_kinds()) {
    if (xres::is_geometric(k)) {
      EXPECT_THROW(xres::apply_degradation(small, k, SeedPath(1)), std::invalid_argument);
    } else {
      EXPECT_NO_THROW(xres::apply_degradation(small, k, SeedPath(1)));
    }
  }
}

TEST(DegradationTest, BlursRunOnImagesSmallerThanTheirKernels) {
  const Image tiny = random_image(3, 2, 5);
  for (auto k : {DegradationKind::kMotionBlur, DegradationKind::kDiskBlur,
                 DegradationKind::kGaussianBlur}) {
    const Image out = xres::apply_degradation(tiny, k, SeedPath(0));
    EXPECT_EQ(out.width(), 3);
  }
}

TEST(DegradationTest, BlursPreserveConstantImages) {
  const Image flat = Image::constant(20, 20, 0.4f);
  for (auto k : {DegradationKind::kMotionBlur, DegradationKind::kDiskBlur,
                 DegradationKind::kGaussianBlur, DegradationKind::kDownUp,
                 DegradationKind::kPerspective, DegradationKind::kShear,
                 DegradationKind::kPatchShuffle}) {
    const Image out = xres::apply_degradation(flat, k, SeedPath(3));
    for (int c = 0; c < 3; ++c) {
      EXPECT_NEAR(out.plane(c).minCoeff(), 0.4f, 1e-5) << xres::to_string(k);
      EXPECT_NEAR(out.plane(c).maxCoeff(), 0.4f, 1e-5) << xres::to_string(k);
    }
  }
}

TEST(DegradationTest, GaussianNoiseHasConfiguredVariance) {
  const Image flat = Image::constant(128, 128, 0.5f);
  const Image out = xres::apply_degradation(flat, DegradationKind::kGaussNoise, SeedPath(11));
  double sum = 0, sq = 0;
  const auto n = static_cast<double>(out.size());
  for (int c = 0; c < 3; ++c) {
    sum += (out.plane(c) - 0.5f).cast<double>().sum();
    sq += (out.plane(c) - 0.5f).cast<double>().square().sum();
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 0.003);
  // Clipping at [0, 1] is 3.5 sigma away and negligible here.
  EXPECT_NEAR(sq / n - mean * mean, 0.02, 0.001);
}

TEST(DegradationTest, SpeckleScalesWithIntensity) {
  const Image black = Image::constant(16, 16, 0.0f);
  EXPECT_TRUE(xres::apply_degradation(black, DegradationKind::kSpeckleNoise, SeedPath(1)) == black);
}

TEST(DegradationTest, BrightnessJitterFollowsParameters) {
  const Image img = random_image(9, 9, 6);
  const auto p = xres::sample_params(DegradationKind::kBrightnessJitter, SeedPath(4));
  const auto& bj = std::get<xres::params::BrightnessJitter>(p.value);
  EXPECT_GE(bj.brightness_scale, 0.8);
  EXPECT_LE(bj.brightness_scale, 1.2);
  const Image out = xres::apply_degradation(img, p);
  for (int y = 0; y < 9; ++y) {
    for (int x = 0; x < 9; ++x) {
      const double expect =
          std::clamp((img(x, y, 0) * bj.brightness_scale - 0.5) * bj.contrast_scale + 0.5, 0.0, 1.0);
      EXPECT_NEAR(out(x, y, 0), expect, 1e-5);
    }
  }
}

TEST(DegradationTest, ZeroStrengthGeometryIsIdentity) {
  DegradationSettings s;
  s.perspective_displacement = 0.0;
  s.shear_range = 0.0;
  const Image img = random_image(16, 12, 7);
  for (auto k : {DegradationKind::kPerspective, DegradationKind::kShear}) {
    const Image out = xres::apply_degradation(img, k, SeedPath(8), s);
    for (int c = 0; c < 3; ++c) {
      EXPECT_LT((out.plane(c) - img.plane(c)).abs().maxCoeff(), 1e-5) << xres::to_string(k);
    }
  }
}

TEST(DegradationTest, ColorJitterWithoutShiftIsIdentity) {
  DegradationSettings s;
  s.hue_shift = 0.0;
  s.saturation_range = 0.0;
  const Image img = random_image(10, 10, 8);
  const Image out = xres::apply_degradation(img, DegradationKind::kColorJitter, SeedPath(1), s);
  for (int c = 0; c < 3; ++c) EXPECT_LT((out.plane(c) - img.plane(c)).abs().maxCoeff(), 1e-5);
}

TEST(DegradationTest, PatchShufflePermutesWithinPatches) {
  const Image img = random_image(10, 7, 9);  // partial patches on both borders
  const Image out = xres::apply_degradation(img, DegradationKind::kPatchShuffle, SeedPath(2));
  EXPECT_FALSE(out == img);
  for (int py = 0; py < 7; py += 4) {
    for (int px = 0; px < 10; px += 4) {
      std::vector<std::array<float, 3>> a, b;
      for (int y = py; y < std::min(py + 4, 7); ++y) {
        for (int x = px; x < std::min(px + 4, 10); ++x) {
          a.push_back({img(x, y, 0), img(x, y, 1), img(x, y, 2)});
          b.push_back({out(x, y, 0), out(x, y, 1), out(x, y, 2)});
        }
      }
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      EXPECT_EQ(a, b);
    }
  }
}

TEST(DegradationTest, ParametersArePureFunctionsOfSeed) {
  for (auto k : xres::all_degradation_kinds()) {
    const auto a = xres::sample_params(k, SeedPath(3, {4}));
    const auto b = xres::sample_params(k, SeedPath(3, {4}));
    EXPECT_EQ(a.kind, k);
    EXPECT_EQ(a.value.index(), b.value.index());
    const Image img = random_image(12, 12, 10);
    EXPECT_TRUE(xres::apply_degradation(img, a) == xres::apply_degradation(img, k, SeedPath(3, {4})));
  }
}

TEST(KernelShapeTest, MotionKernelIsUniformRow) {
  const auto k = xres::motion_blur_kernel(21);
  EXPECT_EQ(k.width(), 21);
  EXPECT_EQ(k.height(), 1);
  for (int i = 0; i < 21; ++i) EXPECT_NEAR(k.weights(0, i), 1.0 / 21.0, 1e-12);
  EXPECT_EQ(xres::motion_blur_kernel(20).width(), 21);
  EXPECT_THROW(xres::motion_blur_kernel(0), std::invalid_argument);
  EXPECT_EQ(std::get<xres::params::MotionBlur>(
                xres::sample_params(DegradationKind::kMotionBlur, SeedPath(0)).value)
                .taps,
            21);
}

TEST(KernelShapeTest, DiskKernelIsNormalizedIndicator) {
  const auto k = xres::disk_kernel(5);
  EXPECT_EQ(k.width(), 11);
  int count = 0;
  for (int y = -5; y <= 5; ++y) {
    for (int x = -5; x <= 5; ++x) count += x * x + y * y <= 25 ? 1 : 0;
  }
  EXPECT_EQ(count, 81);
  for (int y = -5; y <= 5; ++y) {
    for (int x = -5; x <= 5; ++x) {
      EXPECT_NEAR(k.weights(y + 5, x + 5), x * x + y * y <= 25 ? 1.0 / count : 0.0, 1e-12);
    }
  }
  EXPECT_THROW(xres::disk_kernel(-1), std::invalid_argument);
}

TEST(HsvTest, RoundTrip) {
  xres::CounterRng rng(SeedPath(12));
  for (int i = 0; i < 500; ++i) {
    const double r = rng.uniform(), g = rng.uniform(), b = rng.uniform();
    double h, s, v, r2, g2, b2;
    xres::rgb_to_hsv(r, g, b, h, s, v);
    EXPECT_GE(h, 0.0);
    EXPECT_LT(h, 1.0);
    xres::hsv_to_rgb(h, s, v, r2, g2, b2);
    EXPECT_NEAR(r, r2, 1e-9);
    EXPECT_NEAR(g, g2, 1e-9);
    EXPECT_NEAR(b, b2, 1e-9);
  }
}

}  // namespace
