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

#include "xres/gallery.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "xres/parallel.hpp"

namespace xres {

ScaleTag ScaleTag::for_factor(int factor, int base) {
  if (factor != 2 && factor != 4 && factor != 8) {
    throw std::invalid_argument("scale factor must be 2, 4 or 8, got " + std::to_string(factor));
  }
  if (base < 1) throw std::invalid_argument("nominal probe size must be positive");
  return ScaleTag{factor, factor * base};
}

std::vector<ScaleTag> scales_for_factors(const std::vector<int>& factors, int base) {
  std::vector<ScaleTag> out;
  out.reserve(factors.size());
  for (int f : factors) out.push_back(ScaleTag::for_factor(f, base));
  return out;
}

std::string DegradationChain::code() const {
  if (steps.empty()) return "clean";
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const int c = static_cast<int>(steps[i]);
    if (i > 0) out += '-';
    out += static_cast<char>('0' + c / 10);
    out += static_cast<char>('0' + c % 10);
  }
  return out;
}

DegradationChain DegradationChain::from_code(const std::string& code) {
  DegradationChain chain;
  if (code == "clean") return chain;
  std::stringstream ss(code);
  std::string part;
  while (std::getline(ss, part, '-')) {
    if (part.empty()) throw std::invalid_argument("malformed chain code '" + code + "'");
    chain.steps.push_back(degradation_from_code(std::stoi(part)));
  }
  if (chain.steps.empty() || chain.steps.size() > 3) {
    throw std::invalid_argument("malformed chain code '" + code + "'");
  }
  return chain;
}

std::size_t chain_count(std::size_t num_kinds, int max_len) {
  std::size_t total = 0;
  std::size_t power = 1;
  for (int j = 1; j <= max_len; ++j) {
    power *= num_kinds;
    total += power;
  }
  return total;
}

std::vector<DegradationChain> enumerate_chains(const std::vector<DegradationKind>& kinds,
                                               int max_len) {
  if (kinds.empty()) throw std::invalid_argument("enumerate_chains needs at least one kind");
  if (max_len < 1) throw std::invalid_argument("max_len must be at least 1");
  const std::set<DegradationKind> unique(kinds.begin(), kinds.end());
  const std::vector<DegradationKind> sorted(unique.begin(), unique.end());
  const std::size_t l = sorted.size();

  std::vector<DegradationChain> chains;
  chains.reserve(chain_count(l, max_len));
  for (int len = 1; len <= max_len; ++len) {
    // Odometer over base-l digits, most significant step first.
    std::vector<std::size_t> digits(static_cast<std::size_t>(len), 0);
    for (;;) {
      DegradationChain c;
      c.steps.reserve(digits.size());
      for (std::size_t d : digits) c.steps.push_back(sorted[d]);
      chains.push_back(std::move(c));
      int pos = len - 1;
      while (pos >= 0 && ++digits[static_cast<std::size_t>(pos)] == l) {
        digits[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
    }
  }
  return chains;
}

Image apply_chain(const Image& img, const DegradationChain& chain, const SeedPath& seed,
                  const DegradationSettings& settings) {
  if (chain.steps.empty()) return img;
  if (chain.length() > 3) throw std::invalid_argument("degradation chains have at most 3 steps");
  int w = img.width();
  int h = img.height();
  for (std::size_t j = 1; j < chain.length(); ++j) {
    w /= 2;
    h /= 2;
  }
  if (w < 8 || h < 8) {
    throw std::invalid_argument("image " + std::to_string(img.width()) + "x" +
                                std::to_string(img.height()) + " too small for chain " +
                                chain.code());
  }
  Image out = img;
  for (std::size_t j = 0; j < chain.length(); ++j) {
    if (j > 0) out = downsample_x2(out);
    out = apply_degradation(out, chain.steps[j], seed.child(j), settings);
  }
  return out;
}

Image resolution_match(const Image& img, int target_w, int target_h) {
  return resize_bicubic(img, target_w, target_h);
}

std::size_t GallerySettings::hypotheses_per_scale() const {
  const std::set<DegradationKind> unique(kinds.begin(), kinds.end());
  return chain_count(unique.size(), max_len) + (include_clean ? 1 : 0);
}

std::vector<DegradationChain> gallery_chains(const GallerySettings& settings) {
  std::vector<DegradationChain> chains;
  if (settings.include_clean) chains.emplace_back();
  if (!settings.kinds.empty()) {
    auto degraded = enumerate_chains(settings.kinds, settings.max_len);
    chains.insert(chains.end(), std::make_move_iterator(degraded.begin()),
                  std::make_move_iterator(degraded.end()));
  }
  return chains;
}

std::vector<GalleryHypothesis> render_chain_hypotheses(const Image& gallery,
                                                       const std::string& subject,
                                                       const DegradationChain& chain,
                                                       std::size_t chain_index,
                                                       const std::vector<ScaleTag>& scales,
                                                       const SeedPath& seed,
                                                       const DegradationSettings& settings) {
  const Image degraded =
      chain.clean()
          ? gallery
          : apply_chain(gallery, chain, seed.child(fnv1a64(subject)).child(chain_index), settings);
  std::vector<GalleryHypothesis> out;
  out.reserve(scales.size());
  for (const ScaleTag& tag : scales) {
    out.push_back(GalleryHypothesis{resolution_match(degraded, tag.nominal_size, tag.nominal_size),
                                    subject, chain, tag, tag.nominal_size, tag.nominal_size});
  }
  return out;
}

void visit_gallery_hypotheses(const Image& gallery, const std::string& subject,
                              const GallerySettings& settings,
                              const std::vector<ScaleTag>& scales, const SeedPath& seed,
                              int threads,
                              const std::function<void(std::size_t, GalleryHypothesis&&)>& sink) {
  if (scales.empty()) throw std::invalid_argument("at least one scale is required");
  const std::vector<DegradationChain> chains = gallery_chains(settings);
  const std::size_t offset = settings.include_clean ? 1 : 0;
  parallel_for(chains.size(), threads, [&](std::size_t u) {
    // Chain indices count degraded chains only, so toggling include_clean
    // leaves every chain's stream unchanged.
    auto hyps = render_chain_hypotheses(gallery, subject, chains[u], u < offset ? 0 : u - offset,
                                        scales, seed, settings.degradation);
    for (std::size_t s = 0; s < hyps.size(); ++s) sink(u * scales.size() + s, std::move(hyps[s]));
  });
}

std::vector<GalleryHypothesis> generate_gallery_hypotheses(const Image& gallery,
                                                           const std::string& subject,
                                                           const GallerySettings& settings,
                                                           const std::vector<ScaleTag>& scales,
                                                           const SeedPath& seed, int threads) {
  std::vector<GalleryHypothesis> out(settings.hypotheses_per_scale() * scales.size());
  visit_gallery_hypotheses(gallery, subject, settings, scales, seed, threads,
                           [&](std::size_t i, GalleryHypothesis&& h) { out[i] = std::move(h); });
  return out;
}

}  // namespace xres
