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

#ifndef XRES_IMAGE_HPP_
#define XRES_IMAGE_HPP_

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace xres {

/// Planar raster of intensities in [0,1]. Each channel is a row-major
/// height x width Eigen array; RGB images carry three planes, grayscale one.
template <typename Scalar>
class ImageT {
 public:
  using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  ImageT() = default;
  ImageT(int width, int height, int channels = 3, Scalar fill = Scalar(0))
      : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw std::invalid_argument("image dimensions must be positive, got " +
                                  std::to_string(width) + "x" + std::to_string(height));
    }
    if (channels != 1 && channels != 3) {
      throw std::invalid_argument("image must have 1 or 3 channels");
    }
    planes_.assign(static_cast<std::size_t>(channels), Plane::Constant(height, width, fill));
  }

  static ImageT constant(int width, int height, Scalar value, int channels = 3) {
    return ImageT(width, height, channels, value);
  }

  /// Builds an image from planes of equal shape; values are clamped to [0,1].
  static ImageT from_planes(std::vector<Plane> planes) {
    if (planes.empty()) throw std::invalid_argument("no planes");
    if (planes.size() != 1 && planes.size() != 3) {
      throw std::invalid_argument("image must have 1 or 3 channels");
    }
    ImageT img;
    img.width_ = static_cast<int>(planes[0].cols());
    img.height_ = static_cast<int>(planes[0].rows());
    if (img.width_ < 1 || img.height_ < 1) {
      throw std::invalid_argument("image dimensions must be positive");
    }
    for (const auto& p : planes) {
      if (p.rows() != img.height_ || p.cols() != img.width_) {
        throw std::invalid_argument("plane shape mismatch");
      }
    }
    img.planes_ = std::move(planes);
    img.clamp();
    return img;
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return static_cast<int>(planes_.size()); }
  bool empty() const { return planes_.empty(); }
  std::size_t size() const { return static_cast<std::size_t>(width_) * height_ * planes_.size(); }

  Plane& plane(int c) { return planes_[static_cast<std::size_t>(c)]; }
  const Plane& plane(int c) const { return planes_[static_cast<std::size_t>(c)]; }

  Scalar& operator()(int x, int y, int c) { return planes_[static_cast<std::size_t>(c)](y, x); }
  Scalar operator()(int x, int y, int c) const {
    return planes_[static_cast<std::size_t>(c)](y, x);
  }

  void clamp() {
    for (auto& p : planes_) p = p.max(Scalar(0)).min(Scalar(1));
  }

  Scalar mean() const {
    double acc = 0.0;
    for (const auto& p : planes_) acc += static_cast<double>(p.sum());
    return static_cast<Scalar>(acc / static_cast<double>(size()));
  }

  template <typename Other>
  ImageT<Other> cast() const {
    ImageT<Other> out(width_, height_, channels());
    for (int c = 0; c < channels(); ++c) out.plane(c) = plane(c).template cast<Other>();
    return out;
  }

  friend bool operator==(const ImageT& a, const ImageT& b) {
    if (a.width_ != b.width_ || a.height_ != b.height_ || a.channels() != b.channels()) {
      return false;
    }
    for (int c = 0; c < a.channels(); ++c) {
      if (!(a.plane(c) == b.plane(c)).all()) return false;
    }
    return true;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Plane> planes_;
};

using Image = ImageT<float>;

/// Odd-sized correlation kernel, row-major weights.
struct Kernel2D {
  using Weights = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Kernel2D() = default;
  explicit Kernel2D(Weights w) : weights(std::move(w)) {
    if (weights.rows() % 2 == 0 || weights.cols() % 2 == 0) {
      throw std::invalid_argument("kernel dimensions must be odd, got " +
                                  std::to_string(weights.cols()) + "x" +
                                  std::to_string(weights.rows()));
    }
  }

  int width() const { return static_cast<int>(weights.cols()); }
  int height() const { return static_cast<int>(weights.rows()); }
  double sum() const { return weights.sum(); }

  Weights weights;
};

namespace detail {

/// Reflect-101 border index, folded for offsets of any magnitude.
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

inline int clamp_index(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

inline double cubic_weight(double t, double a = -0.5) {
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

/// Four clamped source taps and normalized weights per output coordinate,
/// sampling at pixel centres.
struct AxisTaps {
  std::vector<std::array<int, 4>> index;
  std::vector<std::array<double, 4>> weight;
};

inline AxisTaps bicubic_taps(int in_size, int out_size) {
  AxisTaps taps;
  taps.index.resize(static_cast<std::size_t>(out_size));
  taps.weight.resize(static_cast<std::size_t>(out_size));
  const double scale = static_cast<double>(in_size) / static_cast<double>(out_size);
  for (int o = 0; o < out_size; ++o) {
    const double src = (o + 0.5) * scale - 0.5;
    const double base = std::floor(src);
    const double frac = src - base;
    double total = 0.0;
    for (int t = 0; t < 4; ++t) {
      const double w = cubic_weight(frac - (t - 1));
      taps.index[o][t] = clamp_index(static_cast<int>(base) + t - 1, in_size);
      taps.weight[o][t] = w;
      total += w;
    }
    for (int t = 0; t < 4; ++t) taps.weight[o][t] /= total;
  }
  return taps;
}

template <typename Plane>
Plane resize_plane(const Plane& in, int out_w, int out_h) {
  using Scalar = typename Plane::Scalar;
  const int in_h = static_cast<int>(in.rows());
  const int in_w = static_cast<int>(in.cols());
  const AxisTaps hx = bicubic_taps(in_w, out_w);
  const AxisTaps vy = bicubic_taps(in_h, out_h);

  // Horizontal pass on the transposed plane, so both passes combine whole
  // contiguous rows; per-pixel arithmetic matches the direct form exactly.
  const Plane in_t = in.transpose();
  Plane tmp_t(out_w, in_h);
  for (int x = 0; x < out_w; ++x) {
    const auto& i = hx.index[x];
    const Scalar w0 = static_cast<Scalar>(hx.weight[x][0]);
    const Scalar w1 = static_cast<Scalar>(hx.weight[x][1]);
    const Scalar w2 = static_cast<Scalar>(hx.weight[x][2]);
    const Scalar w3 = static_cast<Scalar>(hx.weight[x][3]);
    const Scalar* r0 = in_t.data() + static_cast<std::ptrdiff_t>(i[0]) * in_h;
    const Scalar* r1 = in_t.data() + static_cast<std::ptrdiff_t>(i[1]) * in_h;
    const Scalar* r2 = in_t.data() + static_cast<std::ptrdiff_t>(i[2]) * in_h;
    const Scalar* r3 = in_t.data() + static_cast<std::ptrdiff_t>(i[3]) * in_h;
    Scalar* dst = tmp_t.data() + static_cast<std::ptrdiff_t>(x) * in_h;
    for (int y = 0; y < in_h; ++y) dst[y] = w0 * r0[y] + w1 * r1[y] + w2 * r2[y] + w3 * r3[y];
  }
  const Plane tmp = tmp_t.transpose();
  Plane out(out_h, out_w);
  for (int y = 0; y < out_h; ++y) {
    const auto& i = vy.index[y];
    const Scalar w0 = static_cast<Scalar>(vy.weight[y][0]);
    const Scalar w1 = static_cast<Scalar>(vy.weight[y][1]);
    const Scalar w2 = static_cast<Scalar>(vy.weight[y][2]);
    const Scalar w3 = static_cast<Scalar>(vy.weight[y][3]);
    const Scalar* r0 = tmp.data() + static_cast<std::ptrdiff_t>(i[0]) * out_w;
    const Scalar* r1 = tmp.data() + static_cast<std::ptrdiff_t>(i[1]) * out_w;
    const Scalar* r2 = tmp.data() + static_cast<std::ptrdiff_t>(i[2]) * out_w;
    const Scalar* r3 = tmp.data() + static_cast<std::ptrdiff_t>(i[3]) * out_w;
    Scalar* dst = out.data() + static_cast<std::ptrdiff_t>(y) * out_w;
    for (int x = 0; x < out_w; ++x) dst[x] = w0 * r0[x] + w1 * r1[x] + w2 * r2[x] + w3 * r3[x];
  }
  return out;
}

}  // namespace detail

/// Separable bicubic resampling (a = -0.5) with clamped edges.
template <typename Scalar>
ImageT<Scalar> resize_bicubic(const ImageT<Scalar>& img, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) {
    throw std::invalid_argument("resize target must be at least 1x1, got " +
                                std::to_string(out_w) + "x" + std::to_string(out_h));
  }
  if (out_w == img.width() && out_h == img.height()) return img;
  std::vector<typename ImageT<Scalar>::Plane> planes;
  planes.reserve(static_cast<std::size_t>(img.channels()));
  for (int c = 0; c < img.channels(); ++c) {
    planes.push_back(detail::resize_plane(img.plane(c), out_w, out_h));
  }
  return ImageT<Scalar>::from_planes(std::move(planes));
}

template <typename Scalar>
ImageT<Scalar> downsample_x2(const ImageT<Scalar>& img) {
  if (img.width() < 2 || img.height() < 2) {
    throw std::invalid_argument("downsample_x2 needs at least 2x2 input");
  }
  return resize_bicubic(img, img.width() / 2, img.height() / 2);
}

/// Raw 2-D correlation of one plane with reflect-101 padding, no clamping.
template <typename Plane>
Plane filter_plane(const Plane& in, const Kernel2D& k) {
  using Scalar = typename Plane::Scalar;
  const int h = static_cast<int>(in.rows());
  const int w = static_cast<int>(in.cols());
  const int rx = k.width() / 2;
  const int ry = k.height() / 2;
  Plane padded(h + 2 * ry, w + 2 * rx);
  for (int y = 0; y < padded.rows(); ++y) {
    const int sy = detail::reflect_index(y - ry, h);
    for (int x = 0; x < padded.cols(); ++x) {
      padded(y, x) = in(sy, detail::reflect_index(x - rx, w));
    }
  }
  Plane out = Plane::Zero(h, w);
  for (int j = 0; j < k.height(); ++j) {
    for (int i = 0; i < k.width(); ++i) {
      const double wt = k.weights(j, i);
      if (wt == 0.0) continue;
      out += static_cast<Scalar>(wt) * padded.block(j, i, h, w);
    }
  }
  return out;
}

template <typename Scalar>
ImageT<Scalar> convolve2d(const ImageT<Scalar>& img, const Kernel2D& k) {
  if (k.width() % 2 == 0 || k.height() % 2 == 0) {
    throw std::invalid_argument("kernel dimensions must be odd");
  }
  std::vector<typename ImageT<Scalar>::Plane> planes;
  planes.reserve(static_cast<std::size_t>(img.channels()));
  for (int c = 0; c < img.channels(); ++c) planes.push_back(filter_plane(img.plane(c), k));
  return ImageT<Scalar>::from_planes(std::move(planes));
}

/// Isotropic Gaussian sampled at integer offsets and normalized to sum 1.
/// sigma == 0 yields the discrete delta.
inline Kernel2D gaussian_kernel(double sigma, int window) {
  if (sigma < 0.0 || !std::isfinite(sigma)) {
    throw std::invalid_argument("gaussian sigma must be non-negative");
  }
  if (window < 1 || window % 2 == 0) {
    throw std::invalid_argument("gaussian window must be odd and positive");
  }
  const int r = window / 2;
  Kernel2D::Weights w = Kernel2D::Weights::Zero(window, window);
  if (sigma == 0.0) {
    w(r, r) = 1.0;
    return Kernel2D(std::move(w));
  }
  for (int y = -r; y <= r; ++y) {
    for (int x = -r; x <= r; ++x) {
      w(y + r, x + r) = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
    }
  }
  w /= w.sum();
  return Kernel2D(std::move(w));
}

/// Luma (0.299, 0.587, 0.114); single-channel input is returned unchanged.
template <typename Scalar>
ImageT<Scalar> to_grayscale(const ImageT<Scalar>& img) {
  if (img.channels() == 1) return img;
  std::vector<typename ImageT<Scalar>::Plane> planes;
  planes.push_back(Scalar(0.299) * img.plane(0) + Scalar(0.587) * img.plane(1) +
                   Scalar(0.114) * img.plane(2));
  return ImageT<Scalar>::from_planes(std::move(planes));
}

}  // namespace xres

#endif  // XRES_IMAGE_HPP_
