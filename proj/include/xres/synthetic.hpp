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

// Procedural stand-in for a face corpus. Each subject is a smooth random
// texture (coloured blobs over a base colour plus a few oriented waves) laid
// over a layout shared by all subjects;
// its gallery image is a clean render and each probe is a slightly shifted,
// re-lit render pushed through a random degradation chain and downsampled.

#ifndef XRES_SYNTHETIC_HPP_
#define XRES_SYNTHETIC_HPP_

#include <cstdint>
#include <filesystem>

#include "xres/degrade.hpp"
#include "xres/eval.hpp"

namespace xres {

struct SyntheticOptions {
  int num_subjects = 50;
  int probes_per_subject = 1;
  int gallery_size = 64;
  int probe_source_size = 192;
  int probe_size = 24;
  int chain_length = 2;
  double identity_strength = 0.2;  // subject layer amplitude relative to the shared one
  double probe_shift = 0.03;       // +- fraction of the image
  double probe_gain = 0.15;
  std::uint64_t seed = 0;
  DegradationSettings degradation;
};

/// Subject ids are "s000", "s001", ...; probe ids "p000_0" (subject, index).
/// Every probe carries camera "synthetic" and distance "d1".
Dataset make_synthetic_dataset(const SyntheticOptions& options);

/// Writes the corpus as PNGs plus manifest.json under `dir` and returns the
/// manifest (paths relative to `dir`).
DatasetManifest write_synthetic_dataset(const SyntheticOptions& options,
                                        const std::filesystem::path& dir);

}  // namespace xres

#endif  // XRES_SYNTHETIC_HPP_
