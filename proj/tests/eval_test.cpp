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

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "test_util.hpp"
#include "xres/errors.hpp"
#include "xres/image_io.hpp"
#include "xres/synthetic.hpp"

namespace {

using ::xres::AblationConfig;
using ::xres::FusionStrategy;
using ::xres::Stage;
using ::xres::Template;
using ::xres::testing::random_templates;

xres::Dataset small_corpus(int subjects, std::uint64_t seed) {
  xres::SyntheticOptions o;
  o.num_subjects = subjects;
  o.seed = seed;
  return xres::make_synthetic_dataset(o);
}

AblationConfig light_config(Stage stage, std::vector<int> scales) {
  AblationConfig c;
  c.stage = stage;
  c.scale_factors = std::move(scales);
  c.ladder_size = 4;
  c.gallery.kinds = {xres::DegradationKind::kGaussianBlur, xres::DegradationKind::kDownUp};
  c.gallery.max_len = 2;
  c.seed = 3;
  return c;
}

TEST(RankTest, DescendingWithIdTieBreak) {
  EXPECT_EQ(xres::rank_subjects({"b", "a", "c", "d"}, {0.5, 0.5, 0.9, -1.0}),
            (std::vector<std::string>{"c", "a", "b", "d"}));
  EXPECT_THROW(xres::rank_subjects({"a"}, {}), std::invalid_argument);
  EXPECT_EQ(xres::rank_of_correct({"c", "a", "b"}, "b"), 3);
  EXPECT_THROW(xres::rank_of_correct({"c"}, "z"), std::invalid_argument);
}

// Straight counting definition of the CMC curve.
TEST(CmcTest, MatchesCountingDefinition) {
  xres::CounterRng rng(xres::SeedPath(1));
  for (int t = 0; t < 30; ++t) {
    const int n = 1 + static_cast<int>(rng.below(15));
    std::vector<int> ranks(1 + rng.below(40));
    for (int& r : ranks) r = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    const auto cmc = xres::compute_cmc(ranks, n);
    ASSERT_EQ(cmc.cmc.size(), static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) {
      int hits = 0;
      for (int r : ranks) hits += r <= k ? 1 : 0;
      EXPECT_DOUBLE_EQ(cmc.cmc[static_cast<std::size_t>(k - 1)],
                       static_cast<double>(hits) / static_cast<double>(ranks.size()));
    }
    EXPECT_DOUBLE_EQ(cmc.cmc.back(), 1.0);
    EXPECT_EQ(cmc.rank_k_ir.count(5), n >= 5 ? 1u : 0u);
  }
  EXPECT_THROW(xres::compute_cmc({}, 3), std::invalid_argument);
  EXPECT_THROW(xres::compute_cmc({4}, 3), std::invalid_argument);
}

TEST(IdentifyTest, SharedAffineTransformKeepsOrder) {
  xres::CounterRng rng(xres::SeedPath(2));
  std::vector<std::pair<std::string, std::vector<Template>>> gallery;
  for (int s = 0; s < 6; ++s) gallery.emplace_back("s" + std::to_string(s), random_templates(3, 16, rng));
  const auto probe = random_templates(4, 16, rng);
  for (const char* n : {"s_max", "s_add", "t_add", "s_max_s_add"}) {
    const auto strategy = FusionStrategy::from_name(n);
    const auto base = xres::identify(probe, gallery, strategy);
    auto shifted = gallery;
    for (auto& [id, ts] : shifted) {
      for (auto& t : ts) t.values = 2.5 * t.values.array() - 0.7;
    }
    auto probe2 = probe;
    for (auto& t : probe2) t.values = 0.3 * t.values.array() + 4.0;
    EXPECT_EQ(xres::identify(probe2, shifted, strategy), base) << n;
  }
  EXPECT_THROW(xres::identify(probe, {}, FusionStrategy::max_rule()), std::invalid_argument);
}

TEST(StageTest, Names) {
  for (auto s : xres::all_stages()) EXPECT_EQ(xres::stage_from_string(xres::to_string(s)), s);
  EXPECT_EQ(xres::stage_from_string("+rm"), Stage::kResolutionMatch);
  EXPECT_THROW(xres::stage_from_string("sr"), std::invalid_argument);
}

TEST(AblationConfigTest, Validation) {
  AblationConfig c;
  EXPECT_NO_THROW(c.validate());
  c.stage = Stage::kMultiSr;
  EXPECT_THROW(c.validate(), std::invalid_argument);  // three scales
  c.scale_factors = {4};
  EXPECT_NO_THROW(c.validate());
  c.fusion = FusionStrategy::template_addition();
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.fusion = FusionStrategy::sum_rule();
  EXPECT_EQ(c.effective_fusion(), FusionStrategy::max_rule());
  c.scale_factors = {3};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.stage = Stage::kMultiscale;
  c.scale_factors = {2, 2};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.stage = Stage::kBaseline;
  c.scale_factors = {};
  EXPECT_NO_THROW(c.validate());
}

TEST(ManifestTest, JsonRoundTripAndValidation) {
  const auto j = nlohmann::json::parse(R"({
    "gallery": [{"subject": "a", "image": "g/a.png"}, {"subject": "b", "image": "g/b.png"}],
    "probes": [{"subject": "a", "image": "p/x1.png", "camera": "c1", "distance": "d2"},
               {"id": "q", "subject": "b", "image": "p/x2.png"}]})");
  const auto m = xres::DatasetManifest::from_json(j);
  EXPECT_EQ(m.probes[0].id, "x1");
  EXPECT_EQ(m.probes[0].distance, "d2");
  EXPECT_EQ(xres::DatasetManifest::from_json(m.to_json()).to_json(), m.to_json());

  auto bad = j;
  bad["probes"][1]["subject"] = "zz";
  EXPECT_THROW(xres::DatasetManifest::from_json(bad), std::invalid_argument);
  bad = j;
  bad["gallery"][1]["subject"] = "a";
  EXPECT_THROW(xres::DatasetManifest::from_json(bad), std::invalid_argument);
  bad = j;
  bad["probes"][1]["id"] = "x1";
  EXPECT_THROW(xres::DatasetManifest::from_json(bad), std::invalid_argument);
  EXPECT_THROW(xres::DatasetManifest::load("/nonexistent/m.json"), xres::DataError);
}

TEST(LoadDatasetTest, SkipsUnreadableItems) {
  const auto dir = xres::testing::scratch_dir("eval_load");
  xres::write_png(xres::testing::random_image(8, 8, 1), dir / "b.png");
  xres::write_png(xres::testing::random_image(8, 8, 2), dir / "p1.png");
  xres::write_png(xres::testing::random_image(8, 8, 3), dir / "p2.png");
  xres::DatasetManifest m;
  m.gallery = {{"b", "b.png"}, {"a", "missing.png"}};
  m.probes = {{"p1", "b", "p1.png", "", "d1"}, {"p2", "a", "p2.png", "", "d1"},
              {"p3", "b", "nope.png", "", "d1"}, {"p4", "b", "p1.png", "", "d2"}};
  std::vector<xres::LoadIssue> issues;
  const auto data = xres::load_dataset(m, dir, &issues, "d1");
  ASSERT_EQ(data.gallery.size(), 1u);
  ASSERT_EQ(data.probes.size(), 1u);
  EXPECT_EQ(data.probes[0].id, "p1");
  EXPECT_EQ(issues.size(), 3u);
}

TEST(ScoreTableTest, HypothesisCountsPerStage) {
  const auto data = small_corpus(3, 1);
  xres::BicubicUpsampler up;
  xres::ReferenceEmbedder emb;
  const xres::EvalBackends b{up, emb};
  struct Case {
    Stage stage;
    std::vector<int> scales;
    std::size_t probe_h, gallery_h;
  };
  for (const Case& c : {Case{Stage::kBaseline, {}, 1, 1}, Case{Stage::kSingleSr, {4}, 1, 1},
                        Case{Stage::kMultiSr, {4}, 4, 1}, Case{Stage::kResolutionMatch, {4}, 4, 1},
                        Case{Stage::kGalleryDegradation, {4}, 4, 7},
                        Case{Stage::kMultiscale, {2, 4}, 8, 14}}) {
    const auto t = xres::compute_score_table(data, light_config(c.stage, c.scales), b);
    EXPECT_EQ(t.probe_hypotheses_per_probe, c.probe_h) << xres::to_string(c.stage);
    EXPECT_EQ(t.gallery_hypotheses_per_subject, c.gallery_h) << xres::to_string(c.stage);
    EXPECT_EQ(t.scores.rows(), 3);
    EXPECT_EQ(t.scores.cols(), 3);
  }
}

TEST(ScoreTableTest, MatchesDoublePrecisionPairSimilarity) {
  const auto data = small_corpus(3, 2);
  xres::BicubicUpsampler up;
  xres::ReferenceEmbedder emb;
  const xres::EvalBackends b{up, emb};
  for (const char* fusion : {"s_max_s_add", "t_add", "t_concat", "s_add"}) {
    auto config = light_config(Stage::kMultiscale, {2, 4});
    config.fusion = FusionStrategy::from_name(fusion);
    const auto table = xres::compute_score_table(data, config, b);
    for (std::size_t i = 0; i < data.probes.size(); ++i) {
      const auto pt = xres::stage_probe_templates(data.probes[i].image, data.probes[i].subject,
                                                  config, b);
      for (std::size_t s = 0; s < data.gallery.size(); ++s) {
        const auto gt = xres::stage_gallery_templates(data.gallery[s].image,
                                                      data.gallery[s].subject, config, b);
        const double expect = xres::pair_similarity(pt, gt, config.fusion);
        EXPECT_NEAR(table.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)),
                    expect, 1e-3 * std::max(1.0, std::abs(expect)))
            << fusion;
      }
    }
  }
}

TEST(ScoreTableTest, ThreadsAndBatchSizeDoNotChangeScores) {
  const auto data = small_corpus(4, 3);
  xres::BicubicUpsampler up;
  xres::ReferenceEmbedder emb;
  auto config = light_config(Stage::kMultiscale, {2, 4});
  const auto a = xres::compute_score_table(data, config, {up, emb});
  config.threads = 3;
  config.batch_size = 5;
  const auto b = xres::compute_score_table(data, config, {up, emb});
  EXPECT_EQ(a.scores, b.scores);
  EXPECT_EQ(a.best_hypothesis, b.best_hypothesis);
}

TEST(ReportTest, EvaluateTableAndSubsets) {
  xres::ScoreTable t;
  t.subjects = {"a", "b", "c"};
  t.probe_ids = {"p2", "p1", "p3"};
  t.probe_subjects = {"b", "a", "c"};
  t.scores.resize(3, 3);
  t.scores << 0.9, 0.8, 0.1,   // b ranked 2nd
      0.7, 0.2, 0.3,           // a ranked 1st
      0.1, 0.2, 0.3;           // c ranked 1st
  t.best_hypothesis = {1, 0, std::nullopt};
  const auto r = xres::evaluate_table(t);
  EXPECT_NEAR(r.rank1(), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(r.per_probe[0].probe_id, "p1");
  EXPECT_EQ(r.per_probe[1].rank, 2);
  EXPECT_EQ(r.per_probe[1].predicted, "a");
  EXPECT_EQ(r.per_probe[1].best_hypothesis, 1u);
  const std::vector<std::string> sub{"b", "c"};
  const auto rs = xres::evaluate_table(t, &sub);
  EXPECT_EQ(rs.num_probes, 2u);
  EXPECT_DOUBLE_EQ(rs.rank1(), 1.0);
  const std::vector<std::string> bad{"z"};
  EXPECT_THROW(xres::evaluate_table(t, &bad), std::invalid_argument);
}

TEST(RrssvTest, FullSubsetEqualsFullEvaluation) {
  const auto data = small_corpus(6, 4);
  xres::BicubicUpsampler up;
  xres::ReferenceEmbedder emb;
  const auto table =
      xres::compute_score_table(data, light_config(Stage::kBaseline, {}), {up, emb});
  const auto full = xres::rrssv(table, 6, 4, 9);
  EXPECT_DOUBLE_EQ(full.mean_rank1, xres::evaluate_table(table).rank1());
  const auto a = xres::rrssv(table, 4, 5, 9);
  const auto b = xres::rrssv(table, 4, 5, 9);
  EXPECT_EQ(a.subsets, b.subsets);
  EXPECT_EQ(a.rank1_per_split, b.rank1_per_split);
  for (const auto& s : a.subsets) {
    EXPECT_EQ(s.size(), 4u);
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  }
  EXPECT_NE(a.subsets, xres::rrssv(table, 4, 5, 10).subsets);
  EXPECT_THROW(xres::rrssv(table, 7, 1, 0), std::invalid_argument);
  EXPECT_THROW(xres::rrssv(table, 3, 0, 0), std::invalid_argument);
}

TEST(RrssvTest, MeanIsExactForNonDyadicRates) {
  // 50 subjects, one probe each, four misidentified: rank-1 of 0.92.
  xres::ScoreTable table;
  const int n = 50;
  table.scores = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    char id[8];
    std::snprintf(id, sizeof(id), "s%02d", i);
    table.subjects.push_back(id);
    table.probe_ids.push_back(std::string("p") + id);
    table.probe_subjects.push_back(id);
    table.best_hypothesis.push_back(std::nullopt);
    table.scores(i, i) = 1.0;
    if (i % 12 == 5) table.scores(i, (i + 1) % n) = 2.0;
  }
  const double full = xres::evaluate_table(table).rank1();
  EXPECT_EQ(full, 46.0 / 50.0);
  EXPECT_EQ(xres::rrssv(table, n, 10, 3).mean_rank1, full);
  const auto sub = xres::rrssv(table, 40, 7, 3);
  double sum = 0.0;
  for (double r : sub.rank1_per_split) sum += r;
  EXPECT_NEAR(sub.mean_rank1, sum / 7, 1e-12);
}

TEST(LadderTest, RowsAndCsv) {
  const auto data = small_corpus(3, 5);
  xres::BicubicUpsampler up;
  xres::ReferenceEmbedder emb;
  const auto rows =
      xres::run_ablation_ladder(light_config(Stage::kMultiscale, {2, 4}), data, {up, emb},
                                {FusionStrategy::sequential(), FusionStrategy::max_rule()});
  ASSERT_EQ(rows.size(), 1u + 4u * 2u + 2u);
  EXPECT_EQ(rows[0].stage, "baseline");
  EXPECT_EQ(rows[1].scale, "x2");
  EXPECT_EQ(rows.back().scale, "x2+x4");
  const auto csv = xres::ladder_csv(rows);
  EXPECT_EQ(csv.rfind("stage,scale,fusion,rank1_ir\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 12);
  for (int n : xres::testing::csv_field_counts(csv)) EXPECT_EQ(n, 4);
  EXPECT_NE(csv.find("\nsingle_sr,x2,\"none/none|s_max,s_max\","), std::string::npos);
}

TEST(NoiseModelTest, NoNoiseIsPerfect) {
  xres::NoiseModelParams p;
  p.noise_sigma = 0.0;
  p.trials = 200;
  const auto r = xres::simulate_noise_model(p);
  EXPECT_EQ(r.single_scale_accuracy, 1.0);
  EXPECT_EQ(r.accumulated_accuracy, 1.0);
}

TEST(NoiseModelTest, MatchesFrozenOracleSweep) {
  std::ifstream in(std::string(XRES_GOLDEN_DIR) + "/noise_model.json");
  ASSERT_TRUE(in);
  const auto golden = nlohmann::json::parse(in);
  for (const auto& row : golden.at("sweep_seed0")) {
    xres::NoiseModelParams p;
    p.noise_sigma = row.at("sigma").get<double>();
    const auto r = xres::simulate_noise_model(p);
    EXPECT_NEAR(r.single_scale_accuracy, row.at("single_scale_accuracy").get<double>(), 1e-3);
    EXPECT_NEAR(r.accumulated_accuracy, row.at("accumulated_accuracy").get<double>(), 1e-3);
  }
}

TEST(NoiseModelTest, RejectsBadParameters) {
  xres::NoiseModelParams p;
  p.dim = 1;
  EXPECT_THROW(xres::simulate_noise_model(p), std::invalid_argument);
  p = {};
  p.noise_sigma = -1;
  EXPECT_THROW(xres::simulate_noise_model(p), std::invalid_argument);
}

}  // namespace
