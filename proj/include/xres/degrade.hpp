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

#ifndef XRES_DEGRADE_HPP_
#define XRES_DEGRADE_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "xres/image.hpp"
#include "xres/rng.hpp"

namespace xres {

/// The gallery degradation operators. Integer codes are stable and used in
/// manifests and cache file names.
enum class DegradationKind : int {
  kGaussNoise = 0,
  kSpeckleNoise = 1,
  kColorJitter = 2,
  kBrightnessJitter = 3,
  kMotionBlur = 4,
  kGaussianBlur = 5,
  kDiskBlur = 6,
  kPerspective = 7,
  kShear = 8,
  kDownUp = 9,
  kPatchShuffle = 10,
};

inline constexpr int kNumDegradationKinds = 11;

std::string_view to_string(DegradationKind kind);
DegradationKind degradation_from_string(std::string_view name);
DegradationKind degradation_from_code(int code);
std::vector<DegradationKind> all_degradation_kinds();

/// True for kinds whose output does not depend on the seed.
bool is_deterministic(DegradationKind kind);
bool is_geometric(DegradationKind kind);

/// Magnitudes of the random and fixed degradations. Defaults are the
/// library's standard gallery set; every field can be overridden from config.
struct DegradationSettings {
  double noise_variance = 0.02;
  double speckle_variance = 0.02;
  double hue_shift = 0.05;          // +- fraction of the hue circle
  double saturation_range = 0.2;    // scale in [1 - r, 1 + r]
  double brightness_range = 0.2;
  double contrast_range = 0.2;
  int motion_window = 20;           // even windows are padded to the next odd size
  double blur_sigma = 1.1;
  int blur_window = 5;
  int disk_radius = 5;
  double perspective_displacement = 0.1;  // fraction of the image dimension
  double shear_range = 0.2;
  int patch_size = 4;

  friend bool operator==(const DegradationSettings&, const DegradationSettings&) = default;
};

namespace params {
struct Noise {
  double variance;
  std::uint64_t stream;  // key of the per-pixel noise stream
};
struct ColorJitter {
  double hue_shift;
  double saturation_scale;
};
struct BrightnessJitter {
  double brightness_scale;
  double contrast_scale;
};
struct MotionBlur {
  int taps;
};
struct GaussianBlur {
  double sigma;
  int window;
};
struct DiskBlur {
  int radius;
};
struct Perspective {
  // (dx, dy) per corner as fractions of (width, height):
  // top-left, top-right, bottom-right, bottom-left.
  std::array<double, 8> corner_offsets;
};
struct Shear {
  double factor;
};
struct DownUp {};
struct PatchShuffle {
  int patch_size;
  std::uint64_t stream;
};
}  // namespace params

/// The exact parameters one degradation application uses.
struct DegradationParams {
  using Value = std::variant<params::Noise, params::ColorJitter, params::BrightnessJitter,
                             params::MotionBlur, params::GaussianBlur, params::DiskBlur,
                             params::Perspective, params::Shear, params::DownUp,
                             params::PatchShuffle>;
  DegradationKind kind;
  Value value;
};

/// Pure function of (kind, seed, settings).
DegradationParams sample_params(DegradationKind kind, const SeedPath& seed,
                                const DegradationSettings& settings = {});

/// Applies one degradation. Output has the input's dimensions and lies in [0,1].
/// Perspective and shear need both dimensions >= 8.
Image apply_degradation(const Image& img, DegradationKind kind, const SeedPath& seed,
                        const DegradationSettings& settings = {});

Image apply_degradation(const Image& img, const DegradationParams& p);

Kernel2D motion_blur_kernel(int window);
Kernel2D disk_kernel(int radius);

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v);
void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b);

}  // namespace xres

#endif  // XRES_DEGRADE_HPP_
