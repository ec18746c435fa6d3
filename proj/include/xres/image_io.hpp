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

#ifndef XRES_IMAGE_IO_HPP_
#define XRES_IMAGE_IO_HPP_

#include <filesystem>

#include "xres/errors.hpp"
#include "xres/image.hpp"

namespace xres {

// 8-bit PNG. Loading scales by 1/255 and always yields RGB; saving writes
// round(255 v), as grayscale for single-channel images.
Image read_png(const std::filesystem::path& path);
void write_png(const Image& img, const std::filesystem::path& path);

}  // namespace xres

#endif  // XRES_IMAGE_IO_HPP_
