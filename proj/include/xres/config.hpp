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

// Run configuration for the command-line tool.
//
// Schema (every key optional; unknown keys are rejected):
//
//   {
//     "manifest": "data/manifest.json",      // relative to the config file
//     "stage": "multiscale",
//     "scales": [2, 4, 8],
//     "nominal_base": 24,
//     "ladder_size": 16,
//     "degradations": {
//       "kinds": ["gauss_noise", ...],       // default: all eleven
//       "max_len": 3,
//       "include_clean": true,
//       "params": {"noise_variance": 0.02, "blur_sigma": 1.1, ...}
//     },
//     "fusion": "s_max_s_add",
//     "ablation_fusions": ["s_max", "s_add", "t_add", "t_concat", "s_max_s_add"],
//     "embedder":  {"type": "reference" | "external", "id": ..., "command": ...,
//                   "input_size": 112, "dimension": 0, "timeout_s": 600},
//     "upsampler": {"type": "bicubic" | "external", "id": ..., "command": ...,
//                   "factors": [2, 4, 8], "timeout_s": 600},
//     "seed": 0,
//     "out": "out",
//     "cache": "",                           // default: <out>/cache
//     "threads": 1,
//     "batch_size": 256,
//     "distance": "",                        // probe distance filter
//     "rrssv": {"subset_size": 0, "repeats": 10},   // 0 disables
//     "simulate": {"num_subjects": 100, "dim": 256, "num_scales": 3,
//                  "trials": 2000, "sigmas": [0, 0.2, 0.4, 0.6, 0.8, 1.0]}
//   }

#ifndef XRES_CONFIG_HPP_
#define XRES_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "xres/degrade.hpp"
#include "xres/eval.hpp"
#include "xres/hallucinate.hpp"
#include "xres/templates.hpp"

namespace xres {

struct BackendSpec {
  std::string type;
  std::string id;
  std::string command;
  int input_size = kEmbedderInputSize;
  int dimension = 0;
  std::vector<int> factors = {2, 4, 8};
  double timeout_s = 600.0;

  static BackendSpec builtin(const std::string& type) {
    BackendSpec b;
    b.type = type;
    b.id = type;
    return b;
  }

  friend bool operator==(const BackendSpec&, const BackendSpec&) = default;
};

struct RrssvSpec {
  int subset_size = 0;
  int repeats = 10;

  friend bool operator==(const RrssvSpec&, const RrssvSpec&) = default;
};

struct SimulateSpec {
  int num_subjects = 100;
  int dim = 256;
  int num_scales = 3;
  int trials = 2000;
  std::vector<double> sigmas = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};

  friend bool operator==(const SimulateSpec&, const SimulateSpec&) = default;
};

struct RunConfig {
  std::string manifest;
  std::string stage = "multiscale";
  std::vector<int> scales = {2, 4, 8};
  int nominal_base = kDefaultNominalBase;
  int ladder_size = kLadderSize;
  std::vector<std::string> kinds;
  int max_len = 3;
  bool include_clean = true;
  DegradationSettings degradation;
  std::string fusion = "s_max_s_add";
  std::vector<std::string> ablation_fusions = {"s_max", "s_add", "t_add", "t_concat",
                                               "s_max_s_add"};
  BackendSpec embedder = BackendSpec::builtin("reference");
  BackendSpec upsampler = BackendSpec::builtin("bicubic");
  std::uint64_t seed = 0;
  std::string out = "out";
  std::string cache;
  int threads = 1;
  int batch_size = 256;
  std::string distance;
  RrssvSpec rrssv;
  SimulateSpec simulate;

  /// Directory relative paths in the file are resolved against; not serialized.
  std::filesystem::path base_dir;

  RunConfig();

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;

  /// 16 hex digits of FNV-1a over the canonical JSON, leaving out the keys
  /// that cannot change results (threads, out, cache).
  std::string hash() const;

  std::filesystem::path manifest_path() const;
  std::filesystem::path out_dir() const;
  std::filesystem::path cache_dir() const;

  GallerySettings gallery_settings() const;
  AblationConfig ablation() const;
  std::vector<FusionStrategy> ablation_strategies() const;

  friend bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.to_json() == b.to_json();
  }
};

/// Backends named by a config. Unknown types and external commands that
/// cannot be found raise BackendError naming the backend id.
std::unique_ptr<UpsamplerBackend> make_upsampler(const BackendSpec& spec,
                                                 const std::filesystem::path& work_dir);
std::unique_ptr<EmbedderBackend> make_embedder(const BackendSpec& spec,
                                               const std::filesystem::path& work_dir);

}  // namespace xres

#endif  // XRES_CONFIG_HPP_
