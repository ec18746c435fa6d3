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

#include "xres/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstring>
#include <vector>

namespace xres {

Image read_png(const std::filesystem::path& path) {
  png_image info;
  std::memset(&info, 0, sizeof(info));
  info.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&info, path.c_str())) {
    throw DataError("cannot read PNG " + path.string() + ": " + info.message);
  }
  info.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(info));
  if (!png_image_finish_read(&info, nullptr, buf.data(), 0, nullptr)) {
    std::string msg = info.message;
    png_image_free(&info);
    throw DataError("cannot decode PNG " + path.string() + ": " + msg);
  }
  const int w = static_cast<int>(info.width);
  const int h = static_cast<int>(info.height);
  Image img(w, h, 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const png_byte* px = &buf[(static_cast<std::size_t>(y) * w + x) * 3];
      for (int c = 0; c < 3; ++c) img(x, y, c) = static_cast<float>(px[c]) / 255.0f;
    }
  }
  return img;
}

void write_png(const Image& img, const std::filesystem::path& path) {
  if (img.empty()) throw std::invalid_argument("cannot write empty image");
  png_image info;
  std::memset(&info, 0, sizeof(info));
  info.version = PNG_IMAGE_VERSION;
  info.width = static_cast<png_uint_32>(img.width());
  info.height = static_cast<png_uint_32>(img.height());
  info.format = img.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  const int ch = img.channels();
  std::vector<png_byte> buf(static_cast<std::size_t>(img.width()) * img.height() * ch);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < ch; ++c) {
        const float v = std::round(255.0f * img(x, y, c));
        buf[(static_cast<std::size_t>(y) * img.width() + x) * ch + c] =
            static_cast<png_byte>(v < 0.0f ? 0.0f : (v > 255.0f ? 255.0f : v));
      }
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!png_image_write_to_file(&info, path.c_str(), 0, buf.data(), 0, nullptr)) {
    std::string msg = info.message;
    png_image_free(&info);
    throw DataError("cannot write PNG " + path.string() + ": " + msg);
  }
}

}  // namespace xres
