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

#include "xres/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "xres/errors.hpp"
#include "xres/image_io.hpp"
#include "xres/synthetic.hpp"

namespace xres {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const BackendError*>(&e) || dynamic_cast<const UnsupportedError*>(&e)) {
    return kExitBackend;
  }
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e)) {
    return kExitData;
  }
  return kExitUsage;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

template <typename J>
void write_json(const fs::path& path, const J& j) {
  write_text(path, j.dump(2) + "\n");
}

ordered_json run_summary(const std::string& command, const RunConfig& config) {
  ordered_json j;
  j["command"] = command;
  j["config_hash"] = config.hash();
  j["seed"] = config.seed;
  return j;
}

ordered_json issues_json(const std::vector<LoadIssue>& issues) {
  ordered_json a = ordered_json::array();
  for (const auto& i : issues) a.push_back({{"item", i.item}, {"error", i.message}});
  return a;
}

ordered_json finish(ordered_json summary, const RunConfig& config) {
  write_json(config.out_dir() / "run.json", summary);
  return summary;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

ordered_json cmd_degrade(const RunConfig& config, std::ostream& log) {
  const DatasetManifest manifest = DatasetManifest::load(config.manifest_path());
  if (manifest.gallery.empty()) throw DataError("the gallery is empty");
  const fs::path base = config.manifest_path().parent_path();
  const GallerySettings settings = config.gallery_settings();
  const auto scales = scales_for_factors(config.scales, config.nominal_base);
  const std::string hash = config.hash();
  const fs::path cache = config.cache_dir();

  json previous;
  if (std::ifstream in(cache / "index.json"); in) {
    try {
      in >> previous;
    } catch (const json::exception&) {
      previous = json();
    }
  }
  const bool same_config = previous.is_object() && previous.value("config_hash", "") == hash;

  ordered_json index;
  index["config_hash"] = hash;
  index["seed"] = config.seed;
  index["scales"] = config.scales;
  ordered_json subjects = ordered_json::object();
  std::vector<LoadIssue> issues;
  std::size_t written = 0, reused = 0;
  for (const auto& g : manifest.gallery) {
    if (same_config && previous["subjects"].contains(g.subject)) {
      const json& files = previous["subjects"][g.subject];
      bool complete = true;
      for (const auto& f : files) complete = complete && fs::exists(cache / f.get<std::string>());
      if (complete) {
        subjects[g.subject] = files;
        reused += files.size();
        continue;
      }
    }
    Image img;
    try {
      img = read_png(g.image.is_absolute() ? g.image : base / g.image);
    } catch (const DataError& e) {
      issues.push_back({g.subject, e.what()});
      continue;
    }
    std::vector<std::string> files(settings.hypotheses_per_scale() * scales.size());
    try {
      visit_gallery_hypotheses(img, g.subject, settings, scales, SeedPath(config.seed),
                               config.threads, [&](std::size_t i, GalleryHypothesis&& h) {
                                 const std::string rel = g.subject + "/" + h.chain.code() + "_x" +
                                                         std::to_string(h.scale.factor) + ".png";
                                 write_png(h.image, cache / rel);
                                 files[i] = rel;
                               });
    } catch (const std::invalid_argument& e) {
      issues.push_back({g.subject, e.what()});
      continue;
    }
    written += files.size();
    subjects[g.subject] = files;
    log << "degrade: " << g.subject << " -> " << files.size() << " hypotheses\n";
  }
  index["subjects"] = subjects;
  write_json(cache / "index.json", index);

  ordered_json summary = run_summary("degrade", config);
  summary["cache"] = cache.string();
  summary["hypotheses_per_subject"] = settings.hypotheses_per_scale() * scales.size();
  summary["written"] = written;
  summary["reused"] = reused;
  summary["errors"] = issues_json(issues);
  return finish(std::move(summary), config);
}

ordered_json cmd_hallucinate(const RunConfig& config, std::ostream& log) {
  const DatasetManifest manifest = DatasetManifest::load(config.manifest_path());
  const fs::path base = config.manifest_path().parent_path();
  const auto upsampler = make_upsampler(config.upsampler, config.out_dir() / "exchange");
  const auto scales = scales_for_factors(config.scales, config.nominal_base);
  std::vector<LoadIssue> issues;
  ordered_json probes = ordered_json::object();
  std::size_t written = 0;
  for (const auto& p : manifest.probes) {
    if (!config.distance.empty() && p.distance != config.distance) continue;
    Image img;
    try {
      img = read_png(p.image.is_absolute() ? p.image : base / p.image);
    } catch (const DataError& e) {
      issues.push_back({p.id, e.what()});
      continue;
    }
    ordered_json files = ordered_json::array();
    for (const auto& h :
         generate_probe_hypotheses(img, p.subject, scales, *upsampler, config.ladder_size)) {
      char name[32];
      std::snprintf(name, sizeof(name), "x%d_%02d.png", h.scale.factor, h.ladder_index);
      const std::string rel = p.id + "/" + name;
      write_png(h.image, config.out_dir() / "hallucinations" / rel);
      files.push_back(rel);
      ++written;
    }
    probes[p.id] = files;
    log << "hallucinate: " << p.id << " -> " << files.size() << " hypotheses\n";
  }
  ordered_json index;
  index["config_hash"] = config.hash();
  index["seed"] = config.seed;
  index["upsampler"] = upsampler->id();
  index["probes"] = probes;
  write_json(config.out_dir() / "hallucinations" / "index.json", index);

  ordered_json summary = run_summary("hallucinate", config);
  summary["upsampler"] = upsampler->id();
  summary["written"] = written;
  summary["errors"] = issues_json(issues);
  return finish(std::move(summary), config);
}

namespace {

struct LoadedData {
  Dataset data;
  std::vector<LoadIssue> issues;
};

LoadedData load_for(const RunConfig& config) {
  LoadedData out;
  const DatasetManifest manifest = DatasetManifest::load(config.manifest_path());
  out.data = load_dataset(manifest, config.manifest_path().parent_path(), &out.issues,
                          config.distance);
  if (out.data.gallery.empty()) throw DataError("the gallery is empty");
  if (out.data.probes.empty()) throw DataError("no probes to evaluate");
  return out;
}

}  // namespace

ordered_json cmd_evaluate(const RunConfig& config, std::ostream& log) {
  const AblationConfig ablation = config.ablation();
  ablation.validate();
  const auto upsampler = make_upsampler(config.upsampler, config.out_dir() / "exchange");
  const auto embedder = make_embedder(config.embedder, config.out_dir() / "exchange");
  LoadedData loaded = load_for(config);
  log << "evaluate: " << loaded.data.probes.size() << " probes, " << loaded.data.gallery.size()
      << " subjects, stage " << config.stage << "\n";

  const EvalBackends backends{*upsampler, *embedder};
  const ScoreTable table = compute_score_table(loaded.data, ablation, backends);
  EvalReport report = evaluate_table(table);
  report.config_hash = ablation.config_hash;
  report.seed = ablation.seed;
  report.stage = std::string(to_string(ablation.stage));
  if (ablation.stage != Stage::kBaseline) report.scale_factors = ablation.scale_factors;
  report.fusion = ablation.effective_fusion().describe();
  if (config.rrssv.subset_size > 0) {
    report.rrssv = rrssv(table, config.rrssv.subset_size, config.rrssv.repeats, config.seed);
  }
  ordered_json j = report.to_json();
  j["embedder"] = embedder->id();
  j["upsampler"] = upsampler->id();
  write_json(config.out_dir() / "report.json", j);

  std::string scale;
  for (int f : report.scale_factors) scale += (scale.empty() ? "x" : "+x") + std::to_string(f);
  std::string csv = "stage,scale,fusion,rank1_ir,rank5_ir,config_hash,seed\n";
  const auto r5 = report.rank_k_ir.count(5) ? fmt(report.rank_k_ir.at(5)) : std::string();
  csv += report.stage + "," + (scale.empty() ? "-" : scale) + "," + csv_field(report.fusion) + "," +
         fmt(report.rank1()) + "," + r5 + "," + report.config_hash + "," +
         std::to_string(report.seed) + "\n";
  write_text(config.out_dir() / "report.csv", csv);
  log << "evaluate: rank-1 IR " << fmt(report.rank1()) << "\n";

  ordered_json summary = run_summary("evaluate", config);
  summary["stage"] = report.stage;
  summary["rank1_ir"] = report.rank1();
  summary["num_probes"] = report.num_probes;
  summary["probe_hypotheses_per_probe"] = report.probe_hypotheses_per_probe;
  summary["gallery_hypotheses_per_subject"] = report.gallery_hypotheses_per_subject;
  summary["errors"] = issues_json(loaded.issues);
  return finish(std::move(summary), config);
}

ordered_json cmd_ablate(const RunConfig& config, std::ostream& log) {
  AblationConfig ablation = config.ablation();
  ablation.stage = Stage::kMultiscale;
  ablation.fusion = FusionStrategy::from_name(config.fusion);
  ablation.validate();
  const auto upsampler = make_upsampler(config.upsampler, config.out_dir() / "exchange");
  const auto embedder = make_embedder(config.embedder, config.out_dir() / "exchange");
  LoadedData loaded = load_for(config);
  const auto rows = run_ablation_ladder(ablation, loaded.data, {*upsampler, *embedder},
                                        config.ablation_strategies());
  write_text(config.out_dir() / "ablation.csv", ladder_csv(rows));
  ordered_json table = ordered_json::array();
  for (const auto& r : rows) {
    table.push_back({{"stage", r.stage}, {"scale", r.scale}, {"fusion", r.fusion},
                     {"rank1_ir", r.rank1}});
    log << "ablate: " << r.stage << " " << r.scale << " " << r.fusion << " " << fmt(r.rank1)
        << "\n";
  }
  ordered_json j;
  j["config_hash"] = config.hash();
  j["seed"] = config.seed;
  j["rows"] = table;
  write_json(config.out_dir() / "ablation.json", j);

  ordered_json summary = run_summary("ablate", config);
  summary["rows"] = rows.size();
  summary["errors"] = issues_json(loaded.issues);
  return finish(std::move(summary), config);
}

ordered_json cmd_simulate(const RunConfig& config, std::ostream& log) {
  const SimulateSpec& s = config.simulate;
  if (s.sigmas.empty()) throw std::invalid_argument("simulate needs at least one sigma");
  std::string csv = "sigma,single_scale_acc,accumulated_acc,config_hash,seed\n";
  ordered_json rows = ordered_json::array();
  for (double sigma : s.sigmas) {
    NoiseModelParams p{s.num_subjects, s.dim, sigma, s.num_scales, s.trials, config.seed};
    const NoiseModelResult r = simulate_noise_model(p);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%g,%.6f,%.6f,", sigma, r.single_scale_accuracy,
                  r.accumulated_accuracy);
    csv += buf + config.hash() + "," + std::to_string(config.seed) + "\n";
    rows.push_back({{"sigma", sigma},
                    {"single_scale_acc", r.single_scale_accuracy},
                    {"accumulated_acc", r.accumulated_accuracy}});
    log << "simulate: sigma " << sigma << " single " << fmt(r.single_scale_accuracy)
        << " accumulated " << fmt(r.accumulated_accuracy) << "\n";
  }
  write_text(config.out_dir() / "simulate.csv", csv);
  ordered_json summary = run_summary("simulate", config);
  summary["rows"] = rows;
  return finish(std::move(summary), config);
}

ordered_json cmd_inspect_config(const RunConfig& config) {
  ordered_json j;
  j["config_hash"] = config.hash();
  j["config"] = config.to_json();
  return j;
}

ordered_json cmd_synthesize(const RunConfig& config, int num_subjects, int probes_per_subject,
                            std::ostream& log) {
  SyntheticOptions opts;
  opts.num_subjects = num_subjects;
  opts.probes_per_subject = probes_per_subject;
  opts.seed = config.seed;
  opts.degradation = config.degradation;
  const DatasetManifest m = write_synthetic_dataset(opts, config.out_dir());
  log << "synthesize: " << m.gallery.size() << " subjects, " << m.probes.size() << " probes\n";
  ordered_json summary = run_summary("synthesize", config);
  summary["manifest"] = (config.out_dir() / "manifest.json").string();
  summary["subjects"] = m.gallery.size();
  summary["probes"] = m.probes.size();
  return finish(std::move(summary), config);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-resolution face identification toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> stage;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  int subjects = 50;
  int probes_per_subject = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration (JSON)");
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--stage", stage, "Ablation stage");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    return sub;
  };
  auto* degrade = add_common(app.add_subcommand("degrade", "Write gallery hypotheses to the cache"));
  auto* hallucinate =
      add_common(app.add_subcommand("hallucinate", "Write probe hypotheses"));
  auto* evaluate = add_common(app.add_subcommand("evaluate", "Run one configuration"));
  auto* ablate = add_common(app.add_subcommand("ablate", "Run the stage ladder"));
  auto* simulate = add_common(app.add_subcommand("simulate", "Template noise-model sweep"));
  auto* inspect = add_common(app.add_subcommand("inspect-config", "Print the resolved config"));
  auto* synth = add_common(app.add_subcommand("synthesize", "Generate a procedural corpus"));
  synth->add_option("--subjects", subjects, "Number of subjects")->check(CLI::PositiveNumber);
  synth->add_option("--probes-per-subject", probes_per_subject, "Probes per subject")
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig() : RunConfig::load(config_path);
    if (seed) config.seed = *seed;
    if (stage) {
      stage_from_string(*stage);
      config.stage = *stage;
    }
    if (out_dir) config.out = *out_dir;
    if (threads) config.threads = *threads;

    ordered_json result;
    if (degrade->parsed()) {
      result = cmd_degrade(config, err);
    } else if (hallucinate->parsed()) {
      result = cmd_hallucinate(config, err);
    } else if (evaluate->parsed()) {
      result = cmd_evaluate(config, err);
    } else if (ablate->parsed()) {
      result = cmd_ablate(config, err);
    } else if (simulate->parsed()) {
      result = cmd_simulate(config, err);
    } else if (inspect->parsed()) {
      result = cmd_inspect_config(config);
    } else if (synth->parsed()) {
      result = cmd_synthesize(config, subjects, probes_per_subject, err);
    }
    out << result.dump(2) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace xres
