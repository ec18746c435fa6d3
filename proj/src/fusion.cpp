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

#include "xres/fusion.hpp"

#include <cstdio>
#include <ostream>

namespace xres {

Template template_add(const std::vector<Template>& ts) {
  if (ts.empty()) throw std::invalid_argument("template_add needs at least one template");
  Template out = ts.front();
  out.source.clear();
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (ts[i].dim() != out.dim()) {
      throw std::invalid_argument("template_add over mismatched dimensions");
    }
    out.values += ts[i].values;
    if (out.scale != ts[i].scale) out.scale.reset();
  }
  return out;
}

Template template_concat(const std::vector<Template>& per_scale) {
  if (per_scale.empty()) throw std::invalid_argument("template_concat needs at least one template");
  Eigen::Index total = 0;
  for (const auto& t : per_scale) total += t.dim();
  Template out{Eigen::VectorXd(total), std::nullopt, {}};
  Eigen::Index at = 0;
  for (const auto& t : per_scale) {
    out.values.segment(at, t.dim()) = t.values;
    at += t.dim();
  }
  if (per_scale.size() == 1) out.scale = per_scale.front().scale;
  return out;
}

Template accumulate_per_scale(const std::vector<Template>& ts) {
  if (ts.empty()) throw std::invalid_argument("no templates to accumulate");
  std::map<ScaleTag, std::vector<Template>> groups;
  for (const auto& t : ts) {
    if (!t.scale) throw std::invalid_argument("per-scale accumulation needs scale-tagged templates");
    groups[*t.scale].push_back(t);
  }
  std::vector<Template> per_scale;
  per_scale.reserve(groups.size());
  for (const auto& [tag, group] : groups) per_scale.push_back(template_add(group));
  return template_concat(per_scale);
}

std::string_view to_string(TemplateRule rule) {
  return rule == TemplateRule::kAdd ? "t_add" : "none";
}

std::string_view to_string(ScoreRule rule) { return rule == ScoreRule::kMax ? "s_max" : "s_add"; }

TemplateRule template_rule_from_string(std::string_view name) {
  if (name == "none") return TemplateRule::kNone;
  if (name == "t_add") return TemplateRule::kAdd;
  throw std::invalid_argument("unknown template rule '" + std::string(name) + "'");
}

ScoreRule score_rule_from_string(std::string_view name) {
  if (name == "s_max") return ScoreRule::kMax;
  if (name == "s_add") return ScoreRule::kAdd;
  throw std::invalid_argument("unknown score rule '" + std::string(name) + "'");
}

FusionStrategy FusionStrategy::from_name(std::string_view name) {
  if (name == "s_max") return max_rule();
  if (name == "s_add") return sum_rule();
  if (name == "t_add") return template_addition();
  if (name == "t_concat") return template_concatenation();
  if (name == "s_max_s_add" || name == "sequential") return sequential();
  throw std::invalid_argument("unknown fusion strategy '" + std::string(name) + "'");
}

std::string FusionStrategy::describe() const {
  std::string s = concat ? "t_concat" : std::string(to_string(probe)) + "/" +
                                            std::string(to_string(gallery));
  return s + "|" + std::string(to_string(row_rule)) + "," + std::string(to_string(vector_rule));
}

double pair_similarity(const std::vector<Template>& probe_ts,
                       const std::vector<Template>& gallery_ts, const FusionStrategy& strategy) {
  return pair_similarity(prepare_templates<double>(probe_ts), prepare_templates<double>(gallery_ts),
                         strategy);
}

Eigen::MatrixXd similarity_matrix(const std::vector<Template>& probe_ts,
                                  const std::vector<Template>& gallery_ts) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(probe_ts.size()),
                    static_cast<Eigen::Index>(gallery_ts.size()));
  for (std::size_t i = 0; i < probe_ts.size(); ++i) {
    for (std::size_t j = 0; j < gallery_ts.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          correlation(probe_ts[i], gallery_ts[j]);
    }
  }
  return m;
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void write_similarity_csv(std::ostream& out, const Eigen::MatrixXd& m,
                          const std::vector<std::string>& probe_ids,
                          const std::vector<std::string>& gallery_ids) {
  if (static_cast<Eigen::Index>(probe_ids.size()) != m.rows() ||
      static_cast<Eigen::Index>(gallery_ids.size()) != m.cols()) {
    throw std::invalid_argument("id lists do not match the similarity matrix shape");
  }
  out << "probe_id,gallery_id,score\n";
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      out << csv_field(probe_ids[static_cast<std::size_t>(i)]) << ','
          << csv_field(gallery_ids[static_cast<std::size_t>(j)]) << ',' << buf << '\n';
    }
  }
}

}  // namespace xres
