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

#ifndef XRES_EVAL_HPP_
#define XRES_EVAL_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "xres/fusion.hpp"
#include "xres/gallery.hpp"
#include "xres/hallucinate.hpp"
#include "xres/templates.hpp"

namespace xres {

// ---------------------------------------------------------------------------
// Datasets

struct GalleryEntry {
  std::string subject;
  std::filesystem::path image;
};

struct ProbeEntry {
  std::string id;
  std::string subject;
  std::filesystem::path image;
  std::string camera;
  std::string distance;
};

/// One gallery image per subject; every probe subject must be enrolled.
/// Image paths are relative to the manifest's directory unless absolute.
struct DatasetManifest {
  std::vector<GalleryEntry> gallery;
  std::vector<ProbeEntry> probes;

  static DatasetManifest load(const std::filesystem::path& path);
  static DatasetManifest from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;
  /// Throws std::invalid_argument on duplicate or missing subjects.
  void validate() const;
};

struct GalleryImage {
  std::string subject;
  Image image;
};

struct ProbeImage {
  std::string id;
  std::string subject;
  Image image;
  std::string camera;
  std::string distance;
};

/// Decoded images; gallery sorted by subject id.
struct Dataset {
  std::vector<GalleryImage> gallery;
  std::vector<ProbeImage> probes;
};

struct LoadIssue {
  std::string item;
  std::string message;
};

/// Reads every image. Unreadable items are skipped and reported in `issues`,
/// as are probes whose subject has no readable gallery image. Probes are kept
/// only if `distance` is empty or matches.
Dataset load_dataset(const DatasetManifest& manifest, const std::filesystem::path& base_dir,
                     std::vector<LoadIssue>* issues = nullptr, const std::string& distance = "");

// ---------------------------------------------------------------------------
// Identification and metrics

/// Subjects by descending score, ties broken by ascending subject id.
std::vector<std::string> rank_subjects(const std::vector<std::string>& subjects,
                                       const std::vector<double>& scores);

/// Nearest-neighbour identification of one probe against per-subject
/// hypothesis template sets.
std::vector<std::string> identify(
    const std::vector<Template>& probe_templates,
    const std::vector<std::pair<std::string, std::vector<Template>>>& gallery_sets,
    const FusionStrategy& strategy);

/// 1-based position of `truth`.
int rank_of_correct(const std::vector<std::string>& ranked, const std::string& truth);

struct CmcResult {
  std::vector<double> cmc;               // cmc[k-1] = rate of rank <= k
  std::map<int, double> rank_k_ir;       // k in {1, 5, 10} (when <= num_subjects)
};

CmcResult compute_cmc(const std::vector<int>& per_probe_ranks, int num_subjects);

// ---------------------------------------------------------------------------
// Ablation stages

enum class Stage {
  kBaseline,
  kSingleSr,
  kMultiSr,
  kResolutionMatch,
  kGalleryDegradation,
  kMultiscale,
};

std::string_view to_string(Stage stage);
/// Accepts "baseline", "single_sr", "multi_sr", "rm", "gallery_deg",
/// "multiscale" and the "+"-prefixed forms.
Stage stage_from_string(std::string_view name);
std::vector<Stage> all_stages();

struct AblationConfig {
  Stage stage = Stage::kMultiscale;
  std::vector<int> scale_factors = {2, 4, 8};
  int nominal_base = kDefaultNominalBase;
  int ladder_size = kLadderSize;
  GallerySettings gallery;
  FusionStrategy fusion = FusionStrategy::sequential();
  std::uint64_t seed = 0;
  int threads = 1;
  int batch_size = 256;
  std::string config_hash;  // filled by the caller; derived from to_json() if empty

  /// Throws std::invalid_argument for inconsistent stage/scale/fusion choices.
  void validate() const;
  /// The fusion rule the stage actually scores with.
  FusionStrategy effective_fusion() const;
  nlohmann::json to_json() const;
};

struct EvalBackends {
  UpsamplerBackend& upsampler;
  EmbedderBackend& embedder;
};

/// probes x subjects matrix of fused pair similarities for one configuration.
struct ScoreTable {
  std::vector<std::string> subjects;          // ascending
  std::vector<std::string> probe_ids;
  std::vector<std::string> probe_subjects;
  Eigen::MatrixXd scores;
  std::vector<std::optional<std::size_t>> best_hypothesis;
  std::size_t probe_hypotheses_per_probe = 0;
  std::size_t gallery_hypotheses_per_subject = 0;
};

ScoreTable compute_score_table(const Dataset& data, const AblationConfig& config,
                               EvalBackends backends);

/// Templates one stage produces for a probe / a gallery image.
std::vector<Template> stage_probe_templates(const Image& probe, const std::string& subject,
                                            const AblationConfig& config, EvalBackends backends);
std::vector<Template> stage_gallery_templates(const Image& gallery, const std::string& subject,
                                              const AblationConfig& config,
                                              EvalBackends backends);

struct ProbeOutcome {
  std::string probe_id;
  std::string subject;
  std::string predicted;
  int rank = 0;
  std::optional<std::size_t> best_hypothesis;
};

struct RrssvResult {
  int subset_size = 0;
  int repeats = 0;
  std::vector<double> rank1_per_split;
  std::vector<std::vector<std::string>> subsets;
  double mean_rank1 = 0.0;
};

struct EvalReport {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string stage;
  std::vector<int> scale_factors;
  std::string fusion;
  std::size_t num_subjects = 0;
  std::size_t num_probes = 0;
  std::size_t probe_hypotheses_per_probe = 0;
  std::size_t gallery_hypotheses_per_subject = 0;
  std::map<int, double> rank_k_ir;
  std::vector<double> cmc;
  std::vector<ProbeOutcome> per_probe;
  std::optional<RrssvResult> rrssv;

  double rank1() const;
  nlohmann::ordered_json to_json() const;
};

/// Evaluates a score table, optionally restricted to a subject subset
/// (probes of other subjects are dropped).
EvalReport evaluate_table(const ScoreTable& table,
                          const std::vector<std::string>* subset = nullptr);

EvalReport run_ablation(const AblationConfig& config, const Dataset& data, EvalBackends backends);

/// Repeated random sub-sampling: `repeats` subsets of `subset_size` subjects
/// drawn without replacement from the seed, each evaluated on its own.
RrssvResult rrssv(const ScoreTable& table, int subset_size, int repeats, std::uint64_t seed);
RrssvResult rrssv(const Dataset& data, const AblationConfig& config, EvalBackends backends,
                  int subset_size = 80, int repeats = 10);

/// One row of the ablation ladder: stage, probe scale label, rank-1 IR.
struct LadderRow {
  std::string stage;
  std::string scale;
  std::string fusion;
  double rank1 = 0.0;
};

/// baseline, then single_sr / multi_sr / rm / gallery_deg per scale factor,
/// then multiscale with each requested fusion strategy.
std::vector<LadderRow> run_ablation_ladder(const AblationConfig& config, const Dataset& data,
                                           EvalBackends backends,
                                           const std::vector<FusionStrategy>& multiscale_fusions);

std::string ladder_csv(const std::vector<LadderRow>& rows);

// ---------------------------------------------------------------------------
// Template noise model

struct NoiseModelParams {
  int num_subjects = 100;
  int dim = 256;
  double noise_sigma = 0.6;
  int num_scales = 3;
  int trials = 2000;
  std::uint64_t seed = 0;
};

struct NoiseModelResult {
  double single_scale_accuracy = 0.0;
  double accumulated_accuracy = 0.0;
};

/// Monte Carlo over templates I_x + eps_s with isotropic Gaussian eps:
/// nearest-neighbour accuracy (correlation against the identity vectors) of
/// one scale's template versus the sum over num_scales scale templates.
///
/// Stream layout (see rng.hpp): identity k is dim normals from
/// SeedPath(seed, {0, k}) scaled to unit norm; trial t reads
/// SeedPath(seed, {1, t}): subject = below(num_subjects), then num_scales
/// blocks of dim normals times sigma. Ties go to the lowest subject index.
NoiseModelResult simulate_noise_model(const NoiseModelParams& params);

}  // namespace xres

#endif  // XRES_EVAL_HPP_
