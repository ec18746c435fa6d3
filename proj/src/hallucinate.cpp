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

#include "xres/hallucinate.hpp"

#include <limits>

#include "xres/errors.hpp"
#include "xres/fusion.hpp"

namespace xres {

std::vector<Image> blur_ladder(const Image& x, int count, double sigma_max) {
  if (count < 2) throw std::invalid_argument("blur ladder needs at least 2 levels");
  if (sigma_max < 0.0) throw std::invalid_argument("ladder sigma must be non-negative");
  std::vector<Image> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double sigma = sigma_max * i / (count - 1);
    out.push_back(i == 0 ? x : convolve2d(x, gaussian_kernel(sigma, kLadderWindow)));
  }
  return out;
}

std::vector<Image> BicubicUpsampler::upsample(const std::vector<Image>& inputs, int factor) {
  std::vector<Image> out;
  out.reserve(inputs.size());
  for (const auto& img : inputs) {
    out.push_back(resize_bicubic(img, img.width() * factor, img.height() * factor));
  }
  return out;
}

ExternalUpsampler::ExternalUpsampler(std::string id, std::string command,
                                     std::filesystem::path work_dir, std::set<int> factors,
                                     std::chrono::milliseconds timeout)
    : id_(std::move(id)),
      client_(std::move(command), std::move(work_dir), timeout),
      factors_(std::move(factors)) {}

std::vector<Image> ExternalUpsampler::upsample(const std::vector<Image>& inputs, int factor) {
  try {
    return client_.upsample(inputs, factor);
  } catch (const ProtocolError& e) {
    throw ProtocolError("upsampler '" + id_ + "': " + e.what());
  } catch (const BackendError& e) {
    throw BackendError("upsampler '" + id_ + "': " + e.what());
  }
}

namespace {

std::vector<Image> checked_upsample(const std::vector<Image>& inputs, int k,
                                    UpsamplerBackend& backend) {
  if (!backend.supports(k)) {
    throw UnsupportedError("upsampler '" + backend.id() + "' does not support x" +
                           std::to_string(k));
  }
  auto out = backend.upsample(inputs, k);
  if (out.size() != inputs.size()) {
    throw ProtocolError("upsampler '" + backend.id() + "' returned " + std::to_string(out.size()) +
                        " images for " + std::to_string(inputs.size()));
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].width() != inputs[i].width() * k || out[i].height() != inputs[i].height() * k) {
      throw ProtocolError("upsampler '" + backend.id() + "' returned wrong dimensions");
    }
  }
  return out;
}

}  // namespace

Image upsample(const Image& x, int k, UpsamplerBackend& backend) {
  return std::move(checked_upsample({x}, k, backend).front());
}

std::vector<ProbeHypothesis> generate_probe_hypotheses(const Image& probe,
                                                       const std::string& subject,
                                                       const std::vector<ScaleTag>& scales,
                                                       UpsamplerBackend& backend,
                                                       int ladder_size) {
  const std::vector<Image> ladder = blur_ladder(probe, ladder_size);
  std::vector<ProbeHypothesis> out;
  out.reserve(ladder.size() * scales.size());
  for (const ScaleTag& tag : scales) {
    std::vector<Image> up = checked_upsample(ladder, tag.factor, backend);
    for (std::size_t i = 0; i < up.size(); ++i) {
      out.push_back(ProbeHypothesis{std::move(up[i]), subject,
                                    kLadderSigmaMax * static_cast<double>(i) / (ladder_size - 1),
                                    static_cast<int>(i), tag});
    }
  }
  return out;
}

std::size_t select_best_hypothesis(const std::vector<Template>& probe_templates,
                                   const std::vector<Template>& gallery_templates) {
  if (probe_templates.empty() || gallery_templates.empty()) {
    throw std::invalid_argument("hypothesis selection needs probe and gallery templates");
  }
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < probe_templates.size(); ++i) {
    double row = -std::numeric_limits<double>::infinity();
    for (const auto& g : gallery_templates) row = std::max(row, correlation(probe_templates[i], g));
    if (row > best_score) {
      best_score = row;
      best = i;
    }
  }
  return best;
}

}  // namespace xres
