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

#include "xres/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "xres/errors.hpp"
#include "xres/rng.hpp"

namespace xres {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const char* where) {
  if (!j.is_object()) throw std::invalid_argument(std::string(where) + " must be an object");
  const std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& [key, unused] : j.items()) {
    if (!known.count(key)) {
      throw std::invalid_argument("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json degradation_params_json(const DegradationSettings& d) {
  return {{"noise_variance", d.noise_variance},
          {"speckle_variance", d.speckle_variance},
          {"hue_shift", d.hue_shift},
          {"saturation_range", d.saturation_range},
          {"brightness_range", d.brightness_range},
          {"contrast_range", d.contrast_range},
          {"motion_window", d.motion_window},
          {"blur_sigma", d.blur_sigma},
          {"blur_window", d.blur_window},
          {"disk_radius", d.disk_radius},
          {"perspective_displacement", d.perspective_displacement},
          {"shear_range", d.shear_range},
          {"patch_size", d.patch_size}};
}

DegradationSettings degradation_params_from(const json& j) {
  reject_unknown(j,
                 {"noise_variance", "speckle_variance", "hue_shift", "saturation_range",
                  "brightness_range", "contrast_range", "motion_window", "blur_sigma",
                  "blur_window", "disk_radius", "perspective_displacement", "shear_range",
                  "patch_size"},
                 "degradations.params");
  DegradationSettings d;
  read(j, "noise_variance", d.noise_variance);
  read(j, "speckle_variance", d.speckle_variance);
  read(j, "hue_shift", d.hue_shift);
  read(j, "saturation_range", d.saturation_range);
  read(j, "brightness_range", d.brightness_range);
  read(j, "contrast_range", d.contrast_range);
  read(j, "motion_window", d.motion_window);
  read(j, "blur_sigma", d.blur_sigma);
  read(j, "blur_window", d.blur_window);
  read(j, "disk_radius", d.disk_radius);
  read(j, "perspective_displacement", d.perspective_displacement);
  read(j, "shear_range", d.shear_range);
  read(j, "patch_size", d.patch_size);
  return d;
}

json backend_json(const BackendSpec& b) {
  return {{"type", b.type},          {"id", b.id},           {"command", b.command},
          {"input_size", b.input_size}, {"dimension", b.dimension}, {"factors", b.factors},
          {"timeout_s", b.timeout_s}};
}

BackendSpec backend_from(const json& j, BackendSpec b, const char* where) {
  reject_unknown(j, {"type", "id", "command", "input_size", "dimension", "factors", "timeout_s"},
                 where);
  const std::string old_type = b.type;
  read(j, "type", b.type);
  if (b.type != old_type) b.id = b.type;
  read(j, "id", b.id);
  read(j, "command", b.command);
  read(j, "input_size", b.input_size);
  read(j, "dimension", b.dimension);
  read(j, "factors", b.factors);
  read(j, "timeout_s", b.timeout_s);
  return b;
}

}  // namespace

RunConfig::RunConfig() {
  for (auto k : all_degradation_kinds()) kinds.emplace_back(to_string(k));
}

RunConfig RunConfig::from_json(const json& j) {
  reject_unknown(j,
                 {"manifest", "stage", "scales", "nominal_base", "ladder_size", "degradations",
                  "fusion", "ablation_fusions", "embedder", "upsampler", "seed", "out", "cache",
                  "threads", "batch_size", "distance", "rrssv", "simulate"},
                 "config");
  RunConfig c;
  try {
    read(j, "manifest", c.manifest);
    read(j, "stage", c.stage);
    read(j, "scales", c.scales);
    read(j, "nominal_base", c.nominal_base);
    read(j, "ladder_size", c.ladder_size);
    if (j.contains("degradations")) {
      const json& d = j.at("degradations");
      reject_unknown(d, {"kinds", "max_len", "include_clean", "params"}, "degradations");
      read(d, "kinds", c.kinds);
      read(d, "max_len", c.max_len);
      read(d, "include_clean", c.include_clean);
      if (d.contains("params")) c.degradation = degradation_params_from(d.at("params"));
    }
    read(j, "fusion", c.fusion);
    read(j, "ablation_fusions", c.ablation_fusions);
    if (j.contains("embedder")) c.embedder = backend_from(j.at("embedder"), c.embedder, "embedder");
    if (j.contains("upsampler")) {
      c.upsampler = backend_from(j.at("upsampler"), c.upsampler, "upsampler");
    }
    read(j, "seed", c.seed);
    read(j, "out", c.out);
    read(j, "cache", c.cache);
    read(j, "threads", c.threads);
    read(j, "batch_size", c.batch_size);
    read(j, "distance", c.distance);
    if (j.contains("rrssv")) {
      const json& r = j.at("rrssv");
      reject_unknown(r, {"subset_size", "repeats"}, "rrssv");
      read(r, "subset_size", c.rrssv.subset_size);
      read(r, "repeats", c.rrssv.repeats);
    }
    if (j.contains("simulate")) {
      const json& s = j.at("simulate");
      reject_unknown(s, {"num_subjects", "dim", "num_scales", "trials", "sigmas"}, "simulate");
      read(s, "num_subjects", c.simulate.num_subjects);
      read(s, "dim", c.simulate.dim);
      read(s, "num_scales", c.simulate.num_scales);
      read(s, "trials", c.simulate.trials);
      read(s, "sigmas", c.simulate.sigmas);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  // Names are checked here so a bad config fails before any work starts.
  stage_from_string(c.stage);
  FusionStrategy::from_name(c.fusion);
  for (const auto& f : c.ablation_fusions) FusionStrategy::from_name(f);
  for (const auto& k : c.kinds) degradation_from_string(k);
  if (c.threads < 1) throw std::invalid_argument("threads must be >= 1");
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  RunConfig c = from_json(j);
  c.base_dir = path.parent_path();
  return c;
}

json RunConfig::to_json() const {
  return {{"manifest", manifest},
          {"stage", stage},
          {"scales", scales},
          {"nominal_base", nominal_base},
          {"ladder_size", ladder_size},
          {"degradations",
           {{"kinds", kinds},
            {"max_len", max_len},
            {"include_clean", include_clean},
            {"params", degradation_params_json(degradation)}}},
          {"fusion", fusion},
          {"ablation_fusions", ablation_fusions},
          {"embedder", backend_json(embedder)},
          {"upsampler", backend_json(upsampler)},
          {"seed", seed},
          {"out", out},
          {"cache", cache},
          {"threads", threads},
          {"batch_size", batch_size},
          {"distance", distance},
          {"rrssv", {{"subset_size", rrssv.subset_size}, {"repeats", rrssv.repeats}}},
          {"simulate",
           {{"num_subjects", simulate.num_subjects},
            {"dim", simulate.dim},
            {"num_scales", simulate.num_scales},
            {"trials", simulate.trials},
            {"sigmas", simulate.sigmas}}}};
}

void RunConfig::save(const fs::path& path) const {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out_file(path);
  if (!out_file) throw DataError("cannot write config " + path.string());
  out_file << to_json().dump(2) << '\n';
}

std::string RunConfig::hash() const {
  json j = to_json();
  j.erase("threads");
  j.erase("out");
  j.erase("cache");
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

fs::path RunConfig::manifest_path() const {
  if (manifest.empty()) throw std::invalid_argument("config names no manifest");
  const fs::path p(manifest);
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

fs::path RunConfig::out_dir() const { return fs::path(out); }

fs::path RunConfig::cache_dir() const {
  return cache.empty() ? out_dir() / "cache" : fs::path(cache);
}

GallerySettings RunConfig::gallery_settings() const {
  GallerySettings g;
  g.kinds.clear();
  for (const auto& k : kinds) g.kinds.push_back(degradation_from_string(k));
  g.max_len = max_len;
  g.include_clean = include_clean;
  g.degradation = degradation;
  return g;
}

AblationConfig RunConfig::ablation() const {
  AblationConfig a;
  a.stage = stage_from_string(stage);
  a.scale_factors = scales;
  a.nominal_base = nominal_base;
  a.ladder_size = ladder_size;
  a.gallery = gallery_settings();
  a.fusion = FusionStrategy::from_name(fusion);
  // Lower stages score with their fixed rule whatever the configured fusion.
  if (a.stage != Stage::kMultiscale) a.fusion = FusionStrategy::sequential();
  a.seed = seed;
  a.threads = threads;
  a.batch_size = batch_size;
  a.config_hash = hash();
  return a;
}

std::vector<FusionStrategy> RunConfig::ablation_strategies() const {
  std::vector<FusionStrategy> out;
  for (const auto& f : ablation_fusions) out.push_back(FusionStrategy::from_name(f));
  return out;
}

namespace {

bool command_available(const std::string& command) {
  std::istringstream in(command);
  std::string exe;
  in >> exe;
  if (exe.size() >= 2 && (exe.front() == '\'' || exe.front() == '"') && exe.back() == exe.front()) {
    exe = exe.substr(1, exe.size() - 2);
  }
  if (exe.empty()) return false;
  if (exe.find('/') != std::string::npos) return fs::exists(exe);
  const char* path = std::getenv("PATH");
  if (!path) return false;
  std::istringstream dirs(path);
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    if (!dir.empty() && fs::exists(fs::path(dir) / exe)) return true;
  }
  return false;
}

void check_external(const BackendSpec& spec, const char* role) {
  if (spec.command.empty()) {
    throw BackendError(std::string(role) + " backend '" + spec.id + "' has no command");
  }
  if (!command_available(spec.command)) {
    throw BackendError(std::string(role) + " backend '" + spec.id + "': command '" +
                       spec.command + "' not found");
  }
}

std::chrono::milliseconds timeout_of(const BackendSpec& spec) {
  return std::chrono::milliseconds(static_cast<long long>(spec.timeout_s * 1000.0));
}

}  // namespace

std::unique_ptr<UpsamplerBackend> make_upsampler(const BackendSpec& spec,
                                                 const fs::path& work_dir) {
  if (spec.type == "bicubic") return std::make_unique<BicubicUpsampler>();
  if (spec.type == "external") {
    check_external(spec, "upsampler");
    return std::make_unique<ExternalUpsampler>(
        spec.id, spec.command, work_dir / ("upsampler-" + spec.id),
        std::set<int>(spec.factors.begin(), spec.factors.end()), timeout_of(spec));
  }
  throw BackendError("unknown upsampler backend '" + spec.id + "' (type '" + spec.type + "')");
}

std::unique_ptr<EmbedderBackend> make_embedder(const BackendSpec& spec, const fs::path& work_dir) {
  if (spec.type == "reference") return std::make_unique<ReferenceEmbedder>(spec.input_size);
  if (spec.type == "external") {
    check_external(spec, "embedder");
    return std::make_unique<ExternalEmbedder>(spec.id, spec.command,
                                              work_dir / ("embedder-" + spec.id), spec.input_size,
                                              spec.dimension, timeout_of(spec));
  }
  throw BackendError("unknown embedder backend '" + spec.id + "' (type '" + spec.type + "')");
}

}  // namespace xres
