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

#ifndef XRES_TESTS_TEST_UTIL_HPP_
#define XRES_TESTS_TEST_UTIL_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "xres/image.hpp"
#include "xres/rng.hpp"
#include "xres/templates.hpp"

namespace xres::testing {

inline Image random_image(int w, int h, std::uint64_t seed, int channels = 3) {
  CounterRng rng(SeedPath(seed, {0x696d67}));
  std::vector<Image::Plane> planes;
  for (int c = 0; c < channels; ++c) {
    Image::Plane p(h, w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) p(y, x) = static_cast<float>(rng.uniform());
    }
    planes.push_back(std::move(p));
  }
  return Image::from_planes(std::move(planes));
}

inline Eigen::VectorXd random_vector(int d, CounterRng& rng) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = rng.normal();
  return v;
}

inline std::vector<Template> random_templates(int n, int d, CounterRng& rng) {
  std::vector<Template> out;
  for (int i = 0; i < n; ++i) out.push_back(Template{random_vector(d, rng), std::nullopt, {}});
  return out;
}

/// Field count of each CSV line, honouring double-quoted fields.
inline std::vector<int> csv_field_counts(const std::string& text) {
  std::vector<int> counts;
  int fields = 1;
  bool quoted = false;
  for (char c : text) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      ++fields;
    } else if (c == '\n' && !quoted) {
      counts.push_back(fields);
      fields = 1;
    }
  }
  return counts;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("xres_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace xres::testing

#endif  // XRES_TESTS_TEST_UTIL_HPP_
