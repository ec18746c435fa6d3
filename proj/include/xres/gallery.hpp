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

#ifndef XRES_GALLERY_HPP_
#define XRES_GALLERY_HPP_

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "xres/degrade.hpp"
#include "xres/image.hpp"
#include "xres/rng.hpp"

namespace xres {

inline constexpr int kDefaultNominalBase = 24;

/// A probe magnification and the square side its images are matched to.
struct ScaleTag {
  int factor = 2;
  int nominal_size = 2 * kDefaultNominalBase;

  /// factor must be 2, 4 or 8; nominal_size = factor * base.
  static ScaleTag for_factor(int factor, int base = kDefaultNominalBase);

  friend bool operator==(const ScaleTag&, const ScaleTag&) = default;
  friend auto operator<=>(const ScaleTag&, const ScaleTag&) = default;
};

std::vector<ScaleTag> scales_for_factors(const std::vector<int>& factors,
                                         int base = kDefaultNominalBase);

/// Ordered degradations, 1..3 steps, with a x2 bicubic downsample between
/// consecutive steps. An empty chain denotes the undegraded image.
struct DegradationChain {
  std::vector<DegradationKind> steps;

  std::size_t length() const { return steps.size(); }
  bool clean() const { return steps.empty(); }
  /// "clean" or two-digit step codes joined by '-', e.g. "05-00-10".
  std::string code() const;
  static DegradationChain from_code(const std::string& code);

  friend bool operator==(const DegradationChain&, const DegradationChain&) = default;
  friend auto operator<=>(const DegradationChain& a, const DegradationChain& b) {
    return a.steps <=> b.steps;
  }
};

/// All sequences with repetition over `kinds` of length 1..max_len, shorter
/// chains first and lexicographic by step code within a length. Duplicate
/// kinds in the input are ignored.
std::vector<DegradationChain> enumerate_chains(const std::vector<DegradationKind>& kinds,
                                               int max_len = 3);

/// Number of chains enumerate_chains returns: sum_{j=1..max_len} l^j.
std::size_t chain_count(std::size_t num_kinds, int max_len = 3);

/// rho_k(down(... down(rho_1(G)))). Step j draws from seed.child(j).
Image apply_chain(const Image& img, const DegradationChain& chain, const SeedPath& seed,
                  const DegradationSettings& settings = {});

/// Bicubic resize to exactly (target_w, target_h).
Image resolution_match(const Image& img, int target_w, int target_h);

struct GallerySettings {
  std::vector<DegradationKind> kinds = all_degradation_kinds();
  int max_len = 3;
  bool include_clean = true;
  DegradationSettings degradation;

  /// Hypotheses generated per scale.
  std::size_t hypotheses_per_scale() const;
};

struct GalleryHypothesis {
  Image image;
  std::string subject;
  DegradationChain chain;
  ScaleTag scale;
  int matched_w = 0;
  int matched_h = 0;
};

/// Clean chain first (when enabled), then enumerate_chains order.
std::vector<DegradationChain> gallery_chains(const GallerySettings& settings);

/// The |scales| hypotheses of one chain. `chain_index` counts degraded chains
/// only (the clean chain ignores it); the chain's stream is
/// seed.child(fnv1a64(subject)).child(chain_index).
std::vector<GalleryHypothesis> render_chain_hypotheses(const Image& gallery,
                                                       const std::string& subject,
                                                       const DegradationChain& chain,
                                                       std::size_t chain_index,
                                                       const std::vector<ScaleTag>& scales,
                                                       const SeedPath& seed,
                                                       const DegradationSettings& settings = {});

/// Streams every (chain, scale) hypothesis of one gallery image to `sink`,
/// along with its position in the canonical order (clean hypotheses first,
/// then chains in enumeration order; scales vary fastest). With threads > 1
/// the sink is called concurrently for distinct indices.
///
/// The subject's stream is seed.child(fnv1a64(subject)); chain i and step j
/// then extend it with (i, j). Stochastic parameters of a chain are shared
/// by all of its scales.
void visit_gallery_hypotheses(const Image& gallery, const std::string& subject,
                              const GallerySettings& settings,
                              const std::vector<ScaleTag>& scales, const SeedPath& seed,
                              int threads,
                              const std::function<void(std::size_t, GalleryHypothesis&&)>& sink);

std::vector<GalleryHypothesis> generate_gallery_hypotheses(
    const Image& gallery, const std::string& subject, const GallerySettings& settings,
    const std::vector<ScaleTag>& scales, const SeedPath& seed, int threads = 1);

}  // namespace xres

#endif  // XRES_GALLERY_HPP_
