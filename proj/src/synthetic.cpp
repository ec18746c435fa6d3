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

#include "xres/synthetic.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "xres/gallery.hpp"
#include "xres/image_io.hpp"
#include "xres/rng.hpp"

namespace xres {

namespace {

constexpr std::uint64_t kSubjectStream = 0x53554a;
constexpr std::uint64_t kProbeStream = 0x50524f;
constexpr std::uint64_t kSharedStream = 0x534852;
constexpr int kBlobs = 6;
constexpr int kWaves = 2;

struct Blob {
  double cx, cy, radius;
  std::array<double, 3> color;
};

struct Wave {
  double freq, angle, phase, amplitude;
  std::array<double, 3> weight;
};

struct Texture {
  std::array<double, 3> base;
  std::vector<Blob> blobs;
  std::vector<Wave> waves;
};

Texture sample_texture(CounterRng& rng, double strength) {
  Texture t;
  for (double& c : t.base) c = rng.uniform(0.3, 0.7);
  for (int i = 0; i < kBlobs; ++i) {
    Blob b{rng.uniform(0.15, 0.85), rng.uniform(0.15, 0.85), rng.uniform(0.08, 0.25), {}};
    for (double& c : b.color) c = strength * rng.uniform(-0.4, 0.4);
    t.blobs.push_back(b);
  }
  for (int i = 0; i < kWaves; ++i) {
    Wave w{rng.uniform(1.0, 4.0), rng.uniform(0.0, std::numbers::pi),
           rng.uniform(0.0, 2.0 * std::numbers::pi), strength * rng.uniform(0.05, 0.15), {}};
    for (double& c : w.weight) c = rng.uniform(0.5, 1.0);
    t.waves.push_back(w);
  }
  return t;
}

// Common structure plus a weaker subject-specific layer, so identities
// differ in detail rather than in overall layout.
Texture subject_texture(const Texture& shared, CounterRng& rng, double identity) {
  Texture t = sample_texture(rng, identity);
  for (int c = 0; c < 3; ++c) t.base[c] = shared.base[c] + identity * (t.base[c] - 0.5);
  t.blobs.insert(t.blobs.begin(), shared.blobs.begin(), shared.blobs.end());
  t.waves.insert(t.waves.begin(), shared.waves.begin(), shared.waves.end());
  return t;
}

Image render(const Texture& t, int size, double dx, double dy, double gain) {
  std::vector<Image::Plane> planes(3, Image::Plane(size, size));
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double u = (x + 0.5) / size + dx;
      const double v = (y + 0.5) / size + dy;
      std::array<double, 3> px = t.base;
      for (const Blob& b : t.blobs) {
        const double r2 = ((u - b.cx) * (u - b.cx) + (v - b.cy) * (v - b.cy)) / (b.radius * b.radius);
        const double w = std::exp(-0.5 * r2);
        for (int c = 0; c < 3; ++c) px[c] += w * b.color[c];
      }
      for (const Wave& wv : t.waves) {
        const double s = std::sin(2.0 * std::numbers::pi * wv.freq *
                                      (u * std::cos(wv.angle) + v * std::sin(wv.angle)) +
                                  wv.phase);
        for (int c = 0; c < 3; ++c) px[c] += wv.amplitude * wv.weight[c] * s;
      }
      for (int c = 0; c < 3; ++c) planes[c](y, x) = static_cast<float>(gain * px[c]);
    }
  }
  return Image::from_planes(std::move(planes));
}

std::string subject_id(int k) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "s%03d", k);
  return buf;
}

std::string probe_id(int k, int j) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "p%03d_%d", k, j);
  return buf;
}

}  // namespace

Dataset make_synthetic_dataset(const SyntheticOptions& options) {
  if (options.num_subjects < 1 || options.probes_per_subject < 0) {
    throw std::invalid_argument("synthetic corpus needs at least one subject");
  }
  if (options.chain_length < 0 || options.probe_size < 1 || options.gallery_size < 8 ||
      options.probe_source_size < 8) {
    throw std::invalid_argument("invalid synthetic corpus dimensions");
  }
  const auto kinds = all_degradation_kinds();
  CounterRng shared_rng(SeedPath(options.seed, {kSharedStream}));
  const Texture shared = sample_texture(shared_rng, 1.0);
  Dataset data;
  for (int k = 0; k < options.num_subjects; ++k) {
    CounterRng rng(SeedPath(options.seed, {kSubjectStream, static_cast<std::uint64_t>(k)}));
    const Texture tex = subject_texture(shared, rng, options.identity_strength);
    data.gallery.push_back({subject_id(k), render(tex, options.gallery_size, 0.0, 0.0, 1.0)});
    for (int j = 0; j < options.probes_per_subject; ++j) {
      const SeedPath stream(options.seed, {kProbeStream, static_cast<std::uint64_t>(k),
                                           static_cast<std::uint64_t>(j)});
      CounterRng prng(stream.child(0));
      const double shift = options.probe_shift;
      const double dx = prng.uniform(-shift, shift);
      const double dy = prng.uniform(-shift, shift);
      const double gain = prng.uniform(1.0 - options.probe_gain, 1.0 + options.probe_gain);
      DegradationChain chain;
      for (int s = 0; s < options.chain_length; ++s) {
        chain.steps.push_back(kinds[prng.below(kinds.size())]);
      }
      Image src = render(tex, options.probe_source_size, dx, dy, gain);
      if (!chain.clean()) src = apply_chain(src, chain, stream.child(1), options.degradation);
      data.probes.push_back({probe_id(k, j), subject_id(k),
                             resize_bicubic(src, options.probe_size, options.probe_size),
                             "synthetic", "d1"});
    }
  }
  return data;
}

DatasetManifest write_synthetic_dataset(const SyntheticOptions& options,
                                        const std::filesystem::path& dir) {
  const Dataset data = make_synthetic_dataset(options);
  DatasetManifest m;
  for (const auto& g : data.gallery) {
    const std::filesystem::path rel = std::filesystem::path("gallery") / (g.subject + ".png");
    write_png(g.image, dir / rel);
    m.gallery.push_back({g.subject, rel});
  }
  for (const auto& p : data.probes) {
    const std::filesystem::path rel = std::filesystem::path("probes") / (p.id + ".png");
    write_png(p.image, dir / rel);
    m.probes.push_back({p.id, p.subject, rel, p.camera, p.distance});
  }
  m.save(dir / "manifest.json");
  return m;
}

}  // namespace xres
