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

#include "xres/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "xres/errors.hpp"
#include "xres/image_io.hpp"
#include "xres/parallel.hpp"
#include "xres/rng.hpp"

namespace xres {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Manifests

DatasetManifest DatasetManifest::from_json(const json& j) {
  if (!j.is_object() || !j.contains("gallery") || !j.contains("probes")) {
    throw std::invalid_argument("manifest needs 'gallery' and 'probes' arrays");
  }
  DatasetManifest m;
  for (const auto& g : j.at("gallery")) {
    m.gallery.push_back({g.at("subject").get<std::string>(), g.at("image").get<std::string>()});
  }
  for (const auto& p : j.at("probes")) {
    ProbeEntry e;
    e.subject = p.at("subject").get<std::string>();
    e.image = p.at("image").get<std::string>();
    e.id = p.value("id", e.image.stem().string());
    e.camera = p.value("camera", "");
    e.distance = p.value("distance", "");
    m.probes.push_back(std::move(e));
  }
  m.validate();
  return m;
}

DatasetManifest DatasetManifest::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("manifest " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

json DatasetManifest::to_json() const {
  json g = json::array();
  for (const auto& e : gallery) g.push_back({{"subject", e.subject}, {"image", e.image.string()}});
  json p = json::array();
  for (const auto& e : probes) {
    p.push_back({{"id", e.id},
                 {"subject", e.subject},
                 {"image", e.image.string()},
                 {"camera", e.camera},
                 {"distance", e.distance}});
  }
  return {{"gallery", g}, {"probes", p}};
}

void DatasetManifest::save(const fs::path& path) const {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest " + path.string());
  out << to_json().dump(2) << '\n';
}

void DatasetManifest::validate() const {
  std::set<std::string> subjects;
  for (const auto& g : gallery) {
    if (!subjects.insert(g.subject).second) {
      throw std::invalid_argument("subject '" + g.subject + "' has more than one gallery image");
    }
  }
  std::set<std::string> ids;
  for (const auto& p : probes) {
    if (!subjects.count(p.subject)) {
      throw std::invalid_argument("probe subject '" + p.subject + "' is not in the gallery");
    }
    if (!ids.insert(p.id).second) throw std::invalid_argument("duplicate probe id '" + p.id + "'");
  }
}

Dataset load_dataset(const DatasetManifest& manifest, const fs::path& base_dir,
                     std::vector<LoadIssue>* issues, const std::string& distance) {
  manifest.validate();
  auto resolve = [&](const fs::path& p) { return p.is_absolute() ? p : base_dir / p; };
  auto report = [&](const std::string& item, const std::string& msg) {
    if (issues) issues->push_back({item, msg});
  };
  Dataset data;
  for (const auto& g : manifest.gallery) {
    try {
      data.gallery.push_back({g.subject, read_png(resolve(g.image))});
    } catch (const DataError& e) {
      report(g.subject, e.what());
    }
  }
  std::sort(data.gallery.begin(), data.gallery.end(),
            [](const auto& a, const auto& b) { return a.subject < b.subject; });
  std::set<std::string> enrolled;
  for (const auto& g : data.gallery) enrolled.insert(g.subject);
  for (const auto& p : manifest.probes) {
    if (!distance.empty() && p.distance != distance) continue;
    if (!enrolled.count(p.subject)) {
      report(p.id, "subject '" + p.subject + "' has no readable gallery image");
      continue;
    }
    try {
      data.probes.push_back({p.id, p.subject, read_png(resolve(p.image)), p.camera, p.distance});
    } catch (const DataError& e) {
      report(p.id, e.what());
    }
  }
  return data;
}

// ---------------------------------------------------------------------------
// Identification and metrics

namespace {

std::vector<std::size_t> ranked_indices(const std::vector<std::string>& subjects,
                                        const std::vector<double>& scores) {
  std::vector<std::size_t> order(subjects.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return subjects[a] < subjects[b];
  });
  return order;
}

}  // namespace

std::vector<std::string> rank_subjects(const std::vector<std::string>& subjects,
                                       const std::vector<double>& scores) {
  if (subjects.size() != scores.size()) {
    throw std::invalid_argument("one score per subject is required");
  }
  std::vector<std::string> out;
  out.reserve(subjects.size());
  for (std::size_t i : ranked_indices(subjects, scores)) out.push_back(subjects[i]);
  return out;
}

std::vector<std::string> identify(
    const std::vector<Template>& probe_templates,
    const std::vector<std::pair<std::string, std::vector<Template>>>& gallery_sets,
    const FusionStrategy& strategy) {
  if (gallery_sets.empty()) throw std::invalid_argument("identification needs a non-empty gallery");
  const auto probe = prepare_templates<double>(probe_templates);
  std::vector<std::string> subjects;
  std::vector<double> scores;
  for (const auto& [subject, ts] : gallery_sets) {
    subjects.push_back(subject);
    scores.push_back(pair_similarity(probe, prepare_templates<double>(ts), strategy));
  }
  return rank_subjects(subjects, scores);
}

int rank_of_correct(const std::vector<std::string>& ranked, const std::string& truth) {
  const auto it = std::find(ranked.begin(), ranked.end(), truth);
  if (it == ranked.end()) throw std::invalid_argument("subject '" + truth + "' is not ranked");
  return static_cast<int>(it - ranked.begin()) + 1;
}

CmcResult compute_cmc(const std::vector<int>& per_probe_ranks, int num_subjects) {
  if (num_subjects < 1) throw std::invalid_argument("CMC needs at least one subject");
  if (per_probe_ranks.empty()) throw std::invalid_argument("CMC needs at least one probe");
  std::vector<std::size_t> hist(static_cast<std::size_t>(num_subjects), 0);
  for (int r : per_probe_ranks) {
    if (r < 1 || r > num_subjects) {
      throw std::invalid_argument("rank " + std::to_string(r) + " outside [1, " +
                                  std::to_string(num_subjects) + "]");
    }
    ++hist[static_cast<std::size_t>(r - 1)];
  }
  CmcResult out;
  out.cmc.resize(hist.size());
  std::size_t acc = 0;
  const double n = static_cast<double>(per_probe_ranks.size());
  for (std::size_t k = 0; k < hist.size(); ++k) {
    acc += hist[k];
    out.cmc[k] = static_cast<double>(acc) / n;
  }
  for (int k : {1, 5, 10}) {
    if (k <= num_subjects) out.rank_k_ir[k] = out.cmc[static_cast<std::size_t>(k - 1)];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stages

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kBaseline: return "baseline";
    case Stage::kSingleSr: return "single_sr";
    case Stage::kMultiSr: return "multi_sr";
    case Stage::kResolutionMatch: return "rm";
    case Stage::kGalleryDegradation: return "gallery_deg";
    case Stage::kMultiscale: return "multiscale";
  }
  return "?";
}

Stage stage_from_string(std::string_view name) {
  if (!name.empty() && name.front() == '+') name.remove_prefix(1);
  for (Stage s : all_stages()) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown stage '" + std::string(name) + "'");
}

std::vector<Stage> all_stages() {
  return {Stage::kBaseline,        Stage::kSingleSr,           Stage::kMultiSr,
          Stage::kResolutionMatch, Stage::kGalleryDegradation, Stage::kMultiscale};
}

void AblationConfig::validate() const {
  if (stage != Stage::kBaseline) {
    if (scale_factors.empty()) throw std::invalid_argument("stage needs at least one scale");
    std::set<int> unique(scale_factors.begin(), scale_factors.end());
    if (unique.size() != scale_factors.size()) throw std::invalid_argument("duplicate scales");
    scales_for_factors(scale_factors, nominal_base);  // validates factors
    if (stage != Stage::kMultiscale && scale_factors.size() != 1) {
      throw std::invalid_argument("stage '" + std::string(to_string(stage)) +
                                  "' runs at exactly one scale");
    }
  }
  if (stage != Stage::kMultiscale &&
      (fusion.concat || fusion.probe != TemplateRule::kNone ||
       fusion.gallery != TemplateRule::kNone)) {
    throw std::invalid_argument("template fusion '" + fusion.describe() +
                                "' is only available in the multiscale stage");
  }
  if (ladder_size < 2) throw std::invalid_argument("ladder size must be at least 2");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (stage >= Stage::kGalleryDegradation && gallery.kinds.empty()) {
    throw std::invalid_argument("gallery degradation needs at least one kind");
  }
}

FusionStrategy AblationConfig::effective_fusion() const {
  return stage == Stage::kMultiscale ? fusion : FusionStrategy::max_rule();
}

json AblationConfig::to_json() const {
  json kinds = json::array();
  for (auto k : gallery.kinds) kinds.push_back(std::string(xres::to_string(k)));
  return {{"stage", std::string(xres::to_string(stage))},
          {"scales", scale_factors},
          {"nominal_base", nominal_base},
          {"ladder_size", ladder_size},
          {"kinds", kinds},
          {"max_len", gallery.max_len},
          {"include_clean", gallery.include_clean},
          {"fusion", effective_fusion().describe()},
          {"seed", seed}};
}

namespace {

std::vector<ScaleTag> stage_scales(const AblationConfig& config) {
  if (config.stage == Stage::kBaseline) return {};
  return scales_for_factors(config.scale_factors, config.nominal_base);
}

std::vector<Template> embed_tagged(const std::vector<Image>& imgs,
                                   const std::vector<std::optional<ScaleTag>>& tags,
                                   EmbedderBackend& embedder) {
  auto ts = embed_batch(imgs, embedder);
  for (std::size_t i = 0; i < ts.size(); ++i) ts[i].scale = tags[i];
  return ts;
}

}  // namespace

std::vector<Template> stage_probe_templates(const Image& probe, const std::string& subject,
                                            const AblationConfig& config, EvalBackends backends) {
  const auto scales = stage_scales(config);
  switch (config.stage) {
    case Stage::kBaseline:
      return embed_tagged({probe}, {std::nullopt}, backends.embedder);
    case Stage::kSingleSr:
      return embed_tagged({upsample(probe, scales.front().factor, backends.upsampler)},
                          {scales.front()}, backends.embedder);
    default: {
      auto hyps =
          generate_probe_hypotheses(probe, subject, scales, backends.upsampler, config.ladder_size);
      std::vector<Image> imgs;
      std::vector<std::optional<ScaleTag>> tags;
      for (auto& h : hyps) {
        imgs.push_back(std::move(h.image));
        tags.push_back(h.scale);
      }
      return embed_tagged(imgs, tags, backends.embedder);
    }
  }
}

std::vector<Template> stage_gallery_templates(const Image& gallery, const std::string& subject,
                                              const AblationConfig& config,
                                              EvalBackends backends) {
  const auto scales = stage_scales(config);
  if (config.stage <= Stage::kMultiSr) {
    return embed_tagged({gallery}, {std::nullopt}, backends.embedder);
  }
  if (config.stage == Stage::kResolutionMatch) {
    const ScaleTag tag = scales.front();
    return embed_tagged({resolution_match(gallery, tag.nominal_size, tag.nominal_size)}, {tag},
                        backends.embedder);
  }
  // Chains are rendered and embedded in bounded batches: a subject's full
  // hypothesis set at x8 would not fit in memory as images.
  const auto chains = gallery_chains(config.gallery);
  const std::size_t offset = config.gallery.include_clean ? 1 : 0;
  const SeedPath seed(config.seed);
  std::vector<Template> out;
  out.reserve(chains.size() * scales.size());
  std::vector<Image> imgs;
  std::vector<std::optional<ScaleTag>> tags;
  auto flush = [&] {
    if (imgs.empty()) return;
    for (auto& t : embed_tagged(imgs, tags, backends.embedder)) out.push_back(std::move(t));
    imgs.clear();
    tags.clear();
  };
  for (std::size_t u = 0; u < chains.size(); ++u) {
    auto hyps = render_chain_hypotheses(gallery, subject, chains[u], u < offset ? 0 : u - offset,
                                        scales, seed, config.gallery.degradation);
    for (auto& h : hyps) {
      imgs.push_back(std::move(h.image));
      tags.push_back(h.scale);
    }
    if (imgs.size() >= static_cast<std::size_t>(config.batch_size)) flush();
  }
  flush();
  return out;
}

ScoreTable compute_score_table(const Dataset& data, const AblationConfig& config,
                               EvalBackends backends) {
  config.validate();
  if (data.gallery.empty()) throw DataError("the gallery is empty");
  if (data.probes.empty()) throw DataError("there are no probes to evaluate");
  const FusionStrategy strategy = config.effective_fusion();
  using Matrix = PreparedTemplates::Matrix;

  std::vector<std::size_t> order(data.gallery.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return data.gallery[a].subject < data.gallery[b].subject;
  });

  ScoreTable table;
  for (std::size_t g : order) table.subjects.push_back(data.gallery[g].subject);
  for (std::size_t i = 1; i < table.subjects.size(); ++i) {
    if (table.subjects[i] == table.subjects[i - 1]) {
      throw std::invalid_argument("subject '" + table.subjects[i] + "' enrolled twice");
    }
  }
  for (const auto& p : data.probes) {
    table.probe_ids.push_back(p.id);
    table.probe_subjects.push_back(p.subject);
  }

  const std::size_t num_probes = data.probes.size();
  std::vector<PreparedTemplates> probes(num_probes);
  parallel_for(num_probes, config.threads, [&](std::size_t i) {
    const auto& p = data.probes[i];
    probes[i] = prepare_templates<float>(stage_probe_templates(p.image, p.subject, config, backends));
  });
  table.probe_hypotheses_per_probe = static_cast<std::size_t>(probes.front().count());

  // Every probe's fused rows stacked, so one product per gallery subject
  // scores all probes at once.
  std::vector<Eigen::Index> offsets(num_probes + 1, 0);
  for (std::size_t i = 0; i < num_probes; ++i) {
    offsets[i + 1] = offsets[i] + fusion_operand(probes[i], strategy, true).rows();
  }
  const Eigen::Index dim = fusion_operand(probes.front(), strategy, true).cols();
  Matrix left(offsets.back(), dim);
  for (std::size_t i = 0; i < num_probes; ++i) {
    const Matrix& op = fusion_operand(probes[i], strategy, true);
    if (op.cols() != dim) throw ProtocolError("probe template dimensions differ");
    if (strategy.concat && probes[i].concat_scales != probes.front().concat_scales) {
      throw std::invalid_argument("probes cover different scales");
    }
    left.middleRows(offsets[i], op.rows()) = op;
  }
  const bool track_best = !strategy.concat && strategy.probe == TemplateRule::kNone;

  const std::size_t num_subjects = order.size();
  table.scores.resize(static_cast<Eigen::Index>(num_probes),
                      static_cast<Eigen::Index>(num_subjects));
  std::vector<std::vector<std::size_t>> argmax(num_subjects);
  std::vector<std::size_t> gallery_counts(num_subjects, 0);
  parallel_for(num_subjects, config.threads, [&](std::size_t s) {
    const auto& g = data.gallery[order[s]];
    const auto prepared =
        prepare_templates<float>(stage_gallery_templates(g.image, g.subject, config, backends));
    gallery_counts[s] = static_cast<std::size_t>(prepared.count());
    const Matrix& right = fusion_operand(prepared, strategy, false);
    if (right.cols() != dim) throw ProtocolError("gallery template dimension differs from probes");
    if (strategy.concat && prepared.concat_scales != probes.front().concat_scales) {
      throw std::invalid_argument("probe and gallery templates cover different scales");
    }
    const Matrix m = (left * right.transpose()).cwiseMax(-1.0f).cwiseMin(1.0f);
    argmax[s].resize(num_probes, 0);
    for (std::size_t i = 0; i < num_probes; ++i) {
      const auto block = m.middleRows(offsets[i], offsets[i + 1] - offsets[i]);
      table.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) =
          fuse_scores(block, strategy);
      if (track_best) {
        const Eigen::VectorXd rows = score_fuse_rows(block, ScoreRule::kMax);
        Eigen::Index best = 0;
        for (Eigen::Index r = 1; r < rows.size(); ++r) {
          if (rows(r) > rows(best)) best = r;
        }
        argmax[s][i] = static_cast<std::size_t>(best);
      }
    }
  });
  table.gallery_hypotheses_per_subject = gallery_counts.front();

  table.best_hypothesis.assign(num_probes, std::nullopt);
  if (track_best) {
    for (std::size_t i = 0; i < num_probes; ++i) {
      std::vector<double> row(num_subjects);
      for (std::size_t s = 0; s < num_subjects; ++s) {
        row[s] = table.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s));
      }
      table.best_hypothesis[i] = argmax[ranked_indices(table.subjects, row).front()][i];
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Reports

double EvalReport::rank1() const {
  const auto it = rank_k_ir.find(1);
  return it == rank_k_ir.end() ? 0.0 : it->second;
}

ordered_json EvalReport::to_json() const {
  ordered_json j;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["stage"] = stage;
  j["scales"] = scale_factors;
  j["fusion"] = fusion;
  j["num_subjects"] = num_subjects;
  j["num_probes"] = num_probes;
  j["probe_hypotheses_per_probe"] = probe_hypotheses_per_probe;
  j["gallery_hypotheses_per_subject"] = gallery_hypotheses_per_subject;
  ordered_json rk = ordered_json::object();
  for (const auto& [k, v] : rank_k_ir) rk[std::to_string(k)] = v;
  j["rank_k_ir"] = rk;
  j["cmc"] = cmc;
  ordered_json probes = ordered_json::array();
  for (const auto& p : per_probe) {
    ordered_json e;
    e["probe_id"] = p.probe_id;
    e["subject"] = p.subject;
    e["predicted"] = p.predicted;
    e["rank"] = p.rank;
    e["best_hypothesis"] = p.best_hypothesis ? ordered_json(*p.best_hypothesis) : ordered_json();
    probes.push_back(std::move(e));
  }
  j["per_probe"] = probes;
  if (rrssv) {
    ordered_json r;
    r["subset_size"] = rrssv->subset_size;
    r["repeats"] = rrssv->repeats;
    r["rank1_per_split"] = rrssv->rank1_per_split;
    r["mean_rank1"] = rrssv->mean_rank1;
    r["subsets"] = rrssv->subsets;
    j["rrssv"] = r;
  }
  return j;
}

EvalReport evaluate_table(const ScoreTable& table, const std::vector<std::string>* subset) {
  std::vector<std::size_t> cols;
  if (subset) {
    for (const auto& s : *subset) {
      const auto it = std::lower_bound(table.subjects.begin(), table.subjects.end(), s);
      if (it == table.subjects.end() || *it != s) {
        throw std::invalid_argument("subset subject '" + s + "' is not in the gallery");
      }
      cols.push_back(static_cast<std::size_t>(it - table.subjects.begin()));
    }
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  } else {
    cols.resize(table.subjects.size());
    std::iota(cols.begin(), cols.end(), std::size_t{0});
  }
  std::vector<std::string> subjects;
  for (std::size_t c : cols) subjects.push_back(table.subjects[c]);
  const std::set<std::string> members(subjects.begin(), subjects.end());

  EvalReport report;
  report.num_subjects = subjects.size();
  report.probe_hypotheses_per_probe = table.probe_hypotheses_per_probe;
  report.gallery_hypotheses_per_subject = table.gallery_hypotheses_per_subject;
  std::vector<int> ranks;
  for (std::size_t i = 0; i < table.probe_ids.size(); ++i) {
    if (!members.count(table.probe_subjects[i])) continue;
    std::vector<double> scores;
    for (std::size_t c : cols) {
      scores.push_back(table.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
    }
    const auto ranked = rank_subjects(subjects, scores);
    ProbeOutcome o;
    o.probe_id = table.probe_ids[i];
    o.subject = table.probe_subjects[i];
    o.predicted = ranked.front();
    o.rank = rank_of_correct(ranked, o.subject);
    if (!subset && i < table.best_hypothesis.size()) o.best_hypothesis = table.best_hypothesis[i];
    ranks.push_back(o.rank);
    report.per_probe.push_back(std::move(o));
  }
  if (ranks.empty()) throw DataError("no probes belong to the evaluated subjects");
  std::sort(report.per_probe.begin(), report.per_probe.end(),
            [](const auto& a, const auto& b) { return a.probe_id < b.probe_id; });
  report.num_probes = ranks.size();
  auto cmc = compute_cmc(ranks, static_cast<int>(subjects.size()));
  report.cmc = std::move(cmc.cmc);
  report.rank_k_ir = std::move(cmc.rank_k_ir);
  return report;
}

namespace {

std::string hash_hex(const std::string& text) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
  return buf;
}

void fill_metadata(EvalReport& report, const AblationConfig& config) {
  report.config_hash =
      config.config_hash.empty() ? hash_hex(config.to_json().dump()) : config.config_hash;
  report.seed = config.seed;
  report.stage = std::string(to_string(config.stage));
  if (config.stage != Stage::kBaseline) report.scale_factors = config.scale_factors;
  report.fusion = config.effective_fusion().describe();
}

}  // namespace

EvalReport run_ablation(const AblationConfig& config, const Dataset& data, EvalBackends backends) {
  EvalReport report = evaluate_table(compute_score_table(data, config, backends));
  fill_metadata(report, config);
  return report;
}

namespace {
constexpr std::uint64_t kRrssvStream = 0x5255;
}  // namespace

RrssvResult rrssv(const ScoreTable& table, int subset_size, int repeats, std::uint64_t seed) {
  if (repeats < 1) throw std::invalid_argument("RRSSV needs at least one repeat");
  if (subset_size < 1 || static_cast<std::size_t>(subset_size) > table.subjects.size()) {
    throw std::invalid_argument("RRSSV subset of " + std::to_string(subset_size) +
                                " subjects from a gallery of " +
                                std::to_string(table.subjects.size()));
  }
  RrssvResult out;
  out.subset_size = subset_size;
  out.repeats = repeats;
  // Split rank-1 values are hit ratios; summing them as a reduced fraction
  // gives the correctly rounded mean, so identical splits reproduce the
  // full-set value exactly. Falls back to a double sum on overflow.
  std::int64_t num = 0, den = 1;
  bool exact = true;
  double total = 0.0;
  for (int r = 0; r < repeats; ++r) {
    CounterRng rng(SeedPath(seed, {kRrssvStream, static_cast<std::uint64_t>(r)}));
    std::vector<std::string> pool = table.subjects;
    rng.shuffle(pool.begin(), pool.end());
    pool.resize(static_cast<std::size_t>(subset_size));
    std::sort(pool.begin(), pool.end());
    const EvalReport report = evaluate_table(table, &pool);
    const double r1 = report.rank1();
    const auto hits = static_cast<std::int64_t>(std::count_if(
        report.per_probe.begin(), report.per_probe.end(), [](const auto& p) { return p.rank == 1; }));
    const auto n = static_cast<std::int64_t>(std::max<std::size_t>(report.per_probe.size(), 1));
    std::int64_t a = 0, b = 0, d = 0;
    if (exact && !__builtin_mul_overflow(num, n, &a) && !__builtin_mul_overflow(hits, den, &b) &&
        !__builtin_add_overflow(a, b, &a) && !__builtin_mul_overflow(den, n, &d)) {
      const std::int64_t g = std::gcd(a, d);
      num = a / g;
      den = d / g;
    } else {
      exact = false;
    }
    out.rank1_per_split.push_back(r1);
    out.subsets.push_back(std::move(pool));
    total += r1;
  }
  std::int64_t scaled_den = 0;
  if (exact && !__builtin_mul_overflow(den, static_cast<std::int64_t>(repeats), &scaled_den)) {
    const std::int64_t g = std::gcd(num, scaled_den);
    out.mean_rank1 = static_cast<double>(num / g) / static_cast<double>(scaled_den / g);
  } else {
    out.mean_rank1 = total / repeats;
  }
  return out;
}

RrssvResult rrssv(const Dataset& data, const AblationConfig& config, EvalBackends backends,
                  int subset_size, int repeats) {
  return rrssv(compute_score_table(data, config, backends), subset_size, repeats, config.seed);
}

std::vector<LadderRow> run_ablation_ladder(const AblationConfig& config, const Dataset& data,
                                           EvalBackends backends,
                                           const std::vector<FusionStrategy>& multiscale_fusions) {
  std::vector<LadderRow> rows;
  auto run = [&](AblationConfig c, const std::string& scale) {
    const EvalReport r = run_ablation(c, data, backends);
    rows.push_back({r.stage, scale, r.fusion, r.rank1()});
  };
  AblationConfig base = config;
  base.fusion = FusionStrategy::sequential();
  base.stage = Stage::kBaseline;
  run(base, "-");
  for (Stage s : {Stage::kSingleSr, Stage::kMultiSr, Stage::kResolutionMatch,
                  Stage::kGalleryDegradation}) {
    for (int f : config.scale_factors) {
      AblationConfig c = base;
      c.stage = s;
      c.scale_factors = {f};
      run(c, "x" + std::to_string(f));
    }
  }
  std::string all;
  for (int f : config.scale_factors) all += (all.empty() ? "x" : "+x") + std::to_string(f);
  for (const auto& fusion : multiscale_fusions) {
    AblationConfig c = config;
    c.stage = Stage::kMultiscale;
    c.fusion = fusion;
    run(c, all);
  }
  return rows;
}

std::string ladder_csv(const std::vector<LadderRow>& rows) {
  std::ostringstream out;
  out << "stage,scale,fusion,rank1_ir\n";
  char buf[32];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.6f", r.rank1);
    out << r.stage << ',' << r.scale << ',' << csv_field(r.fusion) << ',' << buf << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Noise model

NoiseModelResult simulate_noise_model(const NoiseModelParams& params) {
  if (params.num_subjects < 1 || params.dim < 2 || params.num_scales < 1 || params.trials < 1) {
    throw std::invalid_argument("noise model needs positive counts and dimension >= 2");
  }
  if (params.noise_sigma < 0.0) throw std::invalid_argument("noise sigma must be non-negative");
  const int n = params.num_subjects;
  const int d = params.dim;
  // Identities, centred and unit-norm so correlation reduces to a dot product.
  Eigen::MatrixXd ids(n, d);
  {
    for (int k = 0; k < n; ++k) {
      CounterRng rng(SeedPath(params.seed, {0, static_cast<std::uint64_t>(k)}));
      for (int j = 0; j < d; ++j) ids(k, j) = rng.normal();
      ids.row(k) /= ids.row(k).norm();
    }
  }
  Eigen::MatrixXd centred = ids;
  for (int k = 0; k < n; ++k) {
    centred.row(k) = detail::normalized_centered(ids.row(k).transpose()).transpose();
  }
  auto nearest = [&](const Eigen::VectorXd& t) {
    const Eigen::VectorXd c = detail::normalized_centered(t);
    const Eigen::VectorXd scores = centred * c;
    int best = 0;
    for (int k = 1; k < n; ++k) {
      if (scores(k) > scores(best)) best = k;
    }
    return best;
  };
  int single = 0;
  int accumulated = 0;
  Eigen::VectorXd first(d), sum(d);
  for (int t = 0; t < params.trials; ++t) {
    CounterRng rng(SeedPath(params.seed, {1, static_cast<std::uint64_t>(t)}));
    const int subject = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    sum.setZero();
    for (int s = 0; s < params.num_scales; ++s) {
      Eigen::VectorXd tmpl = ids.row(subject).transpose();
      for (int j = 0; j < d; ++j) tmpl(j) += params.noise_sigma * rng.normal();
      if (s == 0) first = tmpl;
      sum += tmpl;
    }
    single += nearest(first) == subject ? 1 : 0;
    accumulated += nearest(sum) == subject ? 1 : 0;
  }
  return {static_cast<double>(single) / params.trials,
          static_cast<double>(accumulated) / params.trials};
}

}  // namespace xres
