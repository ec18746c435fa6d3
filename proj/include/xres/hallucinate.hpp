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

#ifndef XRES_HALLUCINATE_HPP_
#define XRES_HALLUCINATE_HPP_

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "xres/exchange.hpp"
#include "xres/gallery.hpp"
#include "xres/image.hpp"
#include "xres/templates.hpp"

namespace xres {

inline constexpr int kLadderSize = 16;
inline constexpr double kLadderSigmaMax = 1.0;
inline constexpr int kLadderWindow = 5;

/// Probe blurred with sigma_i = sigma_max * i / (count - 1), i = 0..count-1,
/// 5-tap Gaussian. Element 0 is the input itself.
std::vector<Image> blur_ladder(const Image& x, int count = kLadderSize,
                               double sigma_max = kLadderSigmaMax);

class UpsamplerBackend {
 public:
  virtual ~UpsamplerBackend() = default;
  virtual std::string id() const = 0;
  virtual bool supports(int factor) const = 0;
  virtual bool concurrent() const { return false; }
  virtual std::vector<Image> upsample(const std::vector<Image>& inputs, int factor) = 0;
};

class BicubicUpsampler final : public UpsamplerBackend {
 public:
  std::string id() const override { return "bicubic"; }
  bool supports(int factor) const override { return factor == 2 || factor == 4 || factor == 8; }
  bool concurrent() const override { return true; }
  std::vector<Image> upsample(const std::vector<Image>& inputs, int factor) override;
};

/// A super-resolution model behind the file-exchange protocol.
class ExternalUpsampler final : public UpsamplerBackend {
 public:
  ExternalUpsampler(std::string id, std::string command, std::filesystem::path work_dir,
                    std::set<int> factors = {2, 4, 8},
                    std::chrono::milliseconds timeout = std::chrono::minutes(10));
  std::string id() const override { return id_; }
  bool supports(int factor) const override { return factors_.count(factor) > 0; }
  std::vector<Image> upsample(const std::vector<Image>& inputs, int factor) override;

 private:
  std::string id_;
  exchange::Client client_;
  std::set<int> factors_;
};

/// Dimensions multiplied by k. Throws UnsupportedError if the backend lacks
/// the factor and ProtocolError if it returns the wrong size.
Image upsample(const Image& x, int k, UpsamplerBackend& backend);

struct ProbeHypothesis {
  Image image;
  std::string source_subject;
  double blur_sigma = 0.0;
  int ladder_index = 0;
  ScaleTag scale;
};

/// One hypothesis per (scale, ladder element), scale-major: ladder_size * |scales|.
std::vector<ProbeHypothesis> generate_probe_hypotheses(const Image& probe,
                                                       const std::string& subject,
                                                       const std::vector<ScaleTag>& scales,
                                                       UpsamplerBackend& backend,
                                                       int ladder_size = kLadderSize);

/// argmax_i max_j correlation(probe_i, gallery_j); lowest index wins ties.
std::size_t select_best_hypothesis(const std::vector<Template>& probe_templates,
                                   const std::vector<Template>& gallery_templates);

}  // namespace xres

#endif  // XRES_HALLUCINATE_HPP_
