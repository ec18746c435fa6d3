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

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace xres {
namespace {

constexpr std::array<std::string_view, kNumDegradationKinds> kNames = {
    "gauss_noise",  "speckle_noise", "color_jitter", "brightness_jitter",
    "motion_blur",  "gaussian_blur", "disk_blur",    "perspective",
    "shear",        "down_up",       "patch_shuffle"};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Image add_noise(const Image& img, double variance, std::uint64_t stream, bool multiplicative) {
  CounterRng rng(stream);
  const float sigma = static_cast<float>(std::sqrt(variance));
  Image out = img;
  for (int c = 0; c < out.channels(); ++c) {
    auto& p = out.plane(c);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const float n = sigma * static_cast<float>(rng.normal());
      float& v = p.data()[i];
      v = multiplicative ? v * (1.0f + n) : v + n;
    }
  }
  out.clamp();
  return out;
}

Image color_jitter(const Image& img, const params::ColorJitter& p) {
  if (img.channels() != 3) throw std::invalid_argument("color_jitter needs an RGB image");
  Image out = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double h, s, v, r, g, b;
      rgb_to_hsv(img(x, y, 0), img(x, y, 1), img(x, y, 2), h, s, v);
      h = std::fmod(h + p.hue_shift + 1.0, 1.0);
      s = std::clamp(s * p.saturation_scale, 0.0, 1.0);
      hsv_to_rgb(h, s, v, r, g, b);
      out(x, y, 0) = static_cast<float>(r);
      out(x, y, 1) = static_cast<float>(g);
      out(x, y, 2) = static_cast<float>(b);
    }
  }
  out.clamp();
  return out;
}

Image brightness_jitter(const Image& img, const params::BrightnessJitter& p) {
  Image out = img;
  const float b = static_cast<float>(p.brightness_scale);
  const float c = static_cast<float>(p.contrast_scale);
  for (int ch = 0; ch < out.channels(); ++ch) {
    auto& pl = out.plane(ch);
    pl = ((pl * b) - 0.5f) * c + 0.5f;
  }
  out.clamp();
  return out;
}

float sample_bilinear(const Image::Plane& p, double u, double v) {
  const int w = static_cast<int>(p.cols());
  const int h = static_cast<int>(p.rows());
  const double fx = std::floor(u);
  const double fy = std::floor(v);
  const double ax = u - fx;
  const double ay = v - fy;
  const int x0 = detail::reflect_index(static_cast<int>(fx), w);
  const int x1 = detail::reflect_index(static_cast<int>(fx) + 1, w);
  const int y0 = detail::reflect_index(static_cast<int>(fy), h);
  const int y1 = detail::reflect_index(static_cast<int>(fy) + 1, h);
  const double top = (1.0 - ax) * p(y0, x0) + ax * p(y0, x1);
  const double bottom = (1.0 - ax) * p(y1, x0) + ax * p(y1, x1);
  return static_cast<float>((1.0 - ay) * top + ay * bottom);
}

template <typename Map>
Image inverse_warp(const Image& img, Map&& map) {
  Image out(img.width(), img.height(), img.channels());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const auto [u, v] = map(static_cast<double>(x), static_cast<double>(y));
      for (int c = 0; c < img.channels(); ++c) out(x, y, c) = sample_bilinear(img.plane(c), u, v);
    }
  }
  out.clamp();
  return out;
}

Image perspective(const Image& img, const params::Perspective& p) {
  const double w = img.width() - 1.0;
  const double h = img.height() - 1.0;
  const std::array<double, 8> dst = {0, 0, w, 0, w, h, 0, h};
  // Homography taking output corners to the displaced source corners.
  Eigen::Matrix<double, 8, 8> a;
  Eigen::Matrix<double, 8, 1> rhs;
  for (int i = 0; i < 4; ++i) {
    const double x = dst[2 * i];
    const double y = dst[2 * i + 1];
    const double u = x + p.corner_offsets[2 * i];
    const double v = y + p.corner_offsets[2 * i + 1];
    a.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
    a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
    rhs(2 * i) = u;
    rhs(2 * i + 1) = v;
  }
  const Eigen::Matrix<double, 8, 1> hv = a.fullPivLu().solve(rhs);
  Eigen::Matrix3d hm;
  hm << hv(0), hv(1), hv(2), hv(3), hv(4), hv(5), hv(6), hv(7), 1.0;
  return inverse_warp(img, [&](double x, double y) {
    const Eigen::Vector3d q = hm * Eigen::Vector3d(x, y, 1.0);
    return std::pair<double, double>(q.x() / q.z(), q.y() / q.z());
  });
}

Image shear(const Image& img, const params::Shear& p) {
  const double cy = (img.height() - 1) / 2.0;
  return inverse_warp(img, [&](double x, double y) {
    return std::pair<double, double>(x + p.factor * (y - cy), y);
  });
}

Image patch_shuffle(const Image& img, const params::PatchShuffle& p) {
  CounterRng rng(p.stream);
  Image out(img.width(), img.height(), img.channels());
  const int ps = p.patch_size;
  std::vector<std::pair<int, int>> cells;
  std::vector<int> perm;
  for (int py = 0; py < img.height(); py += ps) {
    for (int px = 0; px < img.width(); px += ps) {
      cells.clear();
      for (int y = py; y < std::min(py + ps, img.height()); ++y) {
        for (int x = px; x < std::min(px + ps, img.width()); ++x) cells.emplace_back(x, y);
      }
      perm.resize(cells.size());
      for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
      rng.shuffle(perm.begin(), perm.end());
      for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto [dx, dy] = cells[i];
        const auto [sx, sy] = cells[static_cast<std::size_t>(perm[i])];
        for (int c = 0; c < img.channels(); ++c) out(dx, dy, c) = img(sx, sy, c);
      }
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(DegradationKind kind) {
  return kNames.at(static_cast<std::size_t>(kind));
}

DegradationKind degradation_from_string(std::string_view name) {
  for (int i = 0; i < kNumDegradationKinds; ++i) {
    if (kNames[static_cast<std::size_t>(i)] == name) return static_cast<DegradationKind>(i);
  }
  throw std::invalid_argument("unknown degradation kind '" + std::string(name) + "'");
}

DegradationKind degradation_from_code(int code) {
  if (code < 0 || code >= kNumDegradationKinds) {
    throw std::invalid_argument("degradation code out of range: " + std::to_string(code));
  }
  return static_cast<DegradationKind>(code);
}

std::vector<DegradationKind> all_degradation_kinds() {
  std::vector<DegradationKind> kinds;
  for (int i = 0; i < kNumDegradationKinds; ++i) kinds.push_back(static_cast<DegradationKind>(i));
  return kinds;
}

bool is_deterministic(DegradationKind kind) {
  switch (kind) {
    case DegradationKind::kMotionBlur:
    case DegradationKind::kGaussianBlur:
    case DegradationKind::kDiskBlur:
    case DegradationKind::kDownUp:
      return true;
    default:
      return false;
  }
}

bool is_geometric(DegradationKind kind) {
  return kind == DegradationKind::kPerspective || kind == DegradationKind::kShear;
}

Kernel2D motion_blur_kernel(int window) {
  if (window < 1) throw std::invalid_argument("motion blur window must be positive");
  const int taps = window % 2 == 0 ? window + 1 : window;
  return Kernel2D(Kernel2D::Weights::Constant(1, taps, 1.0 / taps));
}

Kernel2D disk_kernel(int radius) {
  if (radius < 0) throw std::invalid_argument("disk radius must be non-negative");
  const int n = 2 * radius + 1;
  Kernel2D::Weights w = Kernel2D::Weights::Zero(n, n);
  for (int y = -radius; y <= radius; ++y) {
    for (int x = -radius; x <= radius; ++x) {
      if (x * x + y * y <= radius * radius) w(y + radius, x + radius) = 1.0;
    }
  }
  w /= w.sum();
  return Kernel2D(std::move(w));
}

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double d = mx - mn;
  v = mx;
  s = mx > 0.0 ? d / mx : 0.0;
  if (d <= 0.0) {
    h = 0.0;
    return;
  }
  if (mx == r) {
    h = (g - b) / d;
  } else if (mx == g) {
    h = 2.0 + (b - r) / d;
  } else {
    h = 4.0 + (r - g) / d;
  }
  h /= 6.0;
  if (h < 0.0) h += 1.0;
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
  const double h6 = std::fmod(h, 1.0) * 6.0;
  const int sector = static_cast<int>(std::floor(h6)) % 6;
  const double f = h6 - std::floor(h6);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
}

DegradationParams sample_params(DegradationKind kind, const SeedPath& seed,
                                const DegradationSettings& s) {
  CounterRng rng(seed.child(0));
  const std::uint64_t stream = seed.child(1).key();
  switch (kind) {
    case DegradationKind::kGaussNoise:
      return {kind, params::Noise{s.noise_variance, stream}};
    case DegradationKind::kSpeckleNoise:
      return {kind, params::Noise{s.speckle_variance, stream}};
    case DegradationKind::kColorJitter: {
      const double hue = rng.uniform(-s.hue_shift, s.hue_shift);
      const double sat = rng.uniform(1.0 - s.saturation_range, 1.0 + s.saturation_range);
      return {kind, params::ColorJitter{hue, sat}};
    }
    case DegradationKind::kBrightnessJitter: {
      const double b = rng.uniform(1.0 - s.brightness_range, 1.0 + s.brightness_range);
      const double c = rng.uniform(1.0 - s.contrast_range, 1.0 + s.contrast_range);
      return {kind, params::BrightnessJitter{b, c}};
    }
    case DegradationKind::kMotionBlur:
      return {kind, params::MotionBlur{s.motion_window % 2 == 0 ? s.motion_window + 1
                                                                 : s.motion_window}};
    case DegradationKind::kGaussianBlur:
      return {kind, params::GaussianBlur{s.blur_sigma, s.blur_window}};
    case DegradationKind::kDiskBlur:
      return {kind, params::DiskBlur{s.disk_radius}};
    case DegradationKind::kPerspective: {
      // Offsets are stored as fractions here and scaled by the image size at
      // application time, so the record stays independent of the input.
      params::Perspective p{};
      for (double& o : p.corner_offsets) {
        o = rng.uniform(-s.perspective_displacement, s.perspective_displacement);
      }
      return {kind, p};
    }
    case DegradationKind::kShear:
      return {kind, params::Shear{rng.uniform(-s.shear_range, s.shear_range)}};
    case DegradationKind::kDownUp:
      return {kind, params::DownUp{}};
    case DegradationKind::kPatchShuffle:
      return {kind, params::PatchShuffle{s.patch_size, stream}};
  }
  throw std::invalid_argument("invalid degradation kind");
}

Image apply_degradation(const Image& img, const DegradationParams& dp) {
  if (img.empty()) throw std::invalid_argument("cannot degrade an empty image");
  if (is_geometric(dp.kind) && (img.width() < 8 || img.height() < 8)) {
    throw std::invalid_argument(std::string(to_string(dp.kind)) +
                                " needs an image of at least 8x8, got " +
                                std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
  return std::visit(
      Overloaded{
          [&](const params::Noise& p) {
            return add_noise(img, p.variance, p.stream,
                             dp.kind == DegradationKind::kSpeckleNoise);
          },
          [&](const params::ColorJitter& p) { return color_jitter(img, p); },
          [&](const params::BrightnessJitter& p) { return brightness_jitter(img, p); },
          [&](const params::MotionBlur& p) { return convolve2d(img, motion_blur_kernel(p.taps)); },
          [&](const params::GaussianBlur& p) {
            return convolve2d(img, gaussian_kernel(p.sigma, p.window));
          },
          [&](const params::DiskBlur& p) { return convolve2d(img, disk_kernel(p.radius)); },
          [&](const params::Perspective& p) {
            params::Perspective px = p;
            for (int i = 0; i < 4; ++i) {
              px.corner_offsets[2 * i] *= img.width();
              px.corner_offsets[2 * i + 1] *= img.height();
            }
            return perspective(img, px);
          },
          [&](const params::Shear& p) { return shear(img, p); },
          [&](const params::DownUp&) {
            return resize_bicubic(downsample_x2(img), img.width(), img.height());
          },
          [&](const params::PatchShuffle& p) { return patch_shuffle(img, p); },
      },
      dp.value);
}

Image apply_degradation(const Image& img, DegradationKind kind, const SeedPath& seed,
                        const DegradationSettings& settings) {
  return apply_degradation(img, sample_params(kind, seed, settings));
}

}  // namespace xres
