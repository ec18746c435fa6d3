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

// Scoring algebra over face templates: correlation similarity, template
// addition and per-scale concatenation, max/sum score fusion and the
// sequential max-then-sum rule.

#ifndef XRES_FUSION_HPP_
#define XRES_FUSION_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xres/templates.hpp"

namespace xres {

inline constexpr double kDegenerateNorm = 1e-12;

/// Pearson correlation of two vectors: each is centred on its own component
/// mean. Returns 0 when either centred vector has norm below 1e-12.
template <typename DerivedA, typename DerivedB>
double correlation(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("correlation of vectors with dimensions " +
                                std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  if (a.size() < 2) throw std::invalid_argument("correlation needs dimension >= 2");
  const Eigen::VectorXd ca = a.template cast<double>().array() - a.template cast<double>().mean();
  const Eigen::VectorXd cb = b.template cast<double>().array() - b.template cast<double>().mean();
  const double na = ca.norm();
  const double nb = cb.norm();
  if (na < kDegenerateNorm || nb < kDegenerateNorm) return 0.0;
  return std::clamp(ca.dot(cb) / (na * nb), -1.0, 1.0);
}

inline double correlation(const Template& a, const Template& b) {
  return correlation(a.values, b.values);
}

/// Component-wise sum in list order, no renormalization.
Template template_add(const std::vector<Template>& ts);

/// Concatenation in the given order; output dimension is the sum of inputs.
Template template_concat(const std::vector<Template>& per_scale);

/// template_add within each scale, then template_concat in ascending factor
/// order. Every template must carry a scale tag.
Template accumulate_per_scale(const std::vector<Template>& ts);

enum class TemplateRule { kNone, kAdd };
enum class ScoreRule { kMax, kAdd };

std::string_view to_string(TemplateRule rule);
std::string_view to_string(ScoreRule rule);
TemplateRule template_rule_from_string(std::string_view name);
ScoreRule score_rule_from_string(std::string_view name);

/// Per-row max or sum (index order) of a similarity matrix.
template <typename Derived>
Eigen::VectorXd score_fuse_rows(const Eigen::MatrixBase<Derived>& m, ScoreRule rule) {
  if (m.rows() < 1 || m.cols() < 1) throw std::invalid_argument("empty similarity matrix");
  Eigen::VectorXd out(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double acc = static_cast<double>(m(i, 0));
    for (Eigen::Index j = 1; j < m.cols(); ++j) {
      const double v = static_cast<double>(m(i, j));
      acc = rule == ScoreRule::kMax ? std::max(acc, v) : acc + v;
    }
    out(i) = acc;
  }
  return out;
}

template <typename Derived>
double score_fuse_vector(const Eigen::MatrixBase<Derived>& v, ScoreRule rule) {
  if (v.size() < 1) throw std::invalid_argument("cannot fuse an empty score vector");
  double acc = static_cast<double>(v(0));
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    const double x = static_cast<double>(v(i));
    acc = rule == ScoreRule::kMax ? std::max(acc, x) : acc + x;
  }
  return acc;
}

/// One cell of the combination space: optional template fusion on each side
/// (addition, or per-scale concatenation applied to both), then a row rule
/// over gallery hypotheses and a vector rule over probe hypotheses.
struct FusionStrategy {
  TemplateRule probe = TemplateRule::kNone;
  TemplateRule gallery = TemplateRule::kNone;
  bool concat = false;
  ScoreRule row_rule = ScoreRule::kMax;
  ScoreRule vector_rule = ScoreRule::kAdd;

  /// S_max per probe row, then S_add over rows, no template fusion.
  static FusionStrategy sequential() { return {}; }
  static FusionStrategy max_rule() {
    return {TemplateRule::kNone, TemplateRule::kNone, false, ScoreRule::kMax, ScoreRule::kMax};
  }
  static FusionStrategy sum_rule() {
    return {TemplateRule::kNone, TemplateRule::kNone, false, ScoreRule::kAdd, ScoreRule::kAdd};
  }
  static FusionStrategy template_addition() {
    return {TemplateRule::kAdd, TemplateRule::kAdd, false, ScoreRule::kMax, ScoreRule::kAdd};
  }
  static FusionStrategy template_concatenation() {
    return {TemplateRule::kNone, TemplateRule::kNone, true, ScoreRule::kMax, ScoreRule::kAdd};
  }

  /// Shorthands "s_max", "s_add", "t_add", "t_concat", "s_max_s_add".
  static FusionStrategy from_name(std::string_view name);
  std::string describe() const;

  friend bool operator==(const FusionStrategy&, const FusionStrategy&) = default;
};

/// Templates of one image's hypotheses, normalized once for repeated scoring:
/// each row is centred and scaled to unit norm (zero for degenerate rows), so
/// correlation reduces to a dot product.
template <typename Scalar>
struct PreparedTemplatesT {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Matrix rows;
  Matrix sum;     // 1 x D, normalized template_add of all rows
  Matrix concat;  // 1 x D|s|, normalized accumulate_per_scale; empty if untagged
  std::vector<ScaleTag> concat_scales;

  Eigen::Index count() const { return rows.rows(); }
  Eigen::Index dim() const { return rows.cols(); }
};

using PreparedTemplates = PreparedTemplatesT<float>;

namespace detail {

inline Eigen::VectorXd normalized_centered(const Eigen::VectorXd& v) {
  Eigen::VectorXd c = v.array() - v.mean();
  const double n = c.norm();
  if (n < kDegenerateNorm) return Eigen::VectorXd::Zero(v.size());
  return c / n;
}

}  // namespace detail

template <typename Scalar = float>
PreparedTemplatesT<Scalar> prepare_templates(const std::vector<Template>& ts) {
  if (ts.empty()) throw std::invalid_argument("no templates to prepare");
  const Eigen::Index d = ts.front().dim();
  PreparedTemplatesT<Scalar> out;
  out.rows.resize(static_cast<Eigen::Index>(ts.size()), d);
  bool tagged = true;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i].dim() != d) throw std::invalid_argument("template dimension mismatch");
    out.rows.row(static_cast<Eigen::Index>(i)) =
        detail::normalized_centered(ts[i].values).transpose().template cast<Scalar>();
    tagged = tagged && ts[i].scale.has_value();
  }
  out.sum = detail::normalized_centered(template_add(ts).values).transpose().template cast<Scalar>();
  if (tagged) {
    std::map<ScaleTag, int> seen;
    for (const auto& t : ts) seen[*t.scale] = 1;
    for (const auto& [tag, unused] : seen) out.concat_scales.push_back(tag);
    out.concat = detail::normalized_centered(accumulate_per_scale(ts).values)
                     .transpose()
                     .template cast<Scalar>();
  }
  return out;
}

/// The rows one side contributes under a strategy: all hypotheses, their sum,
/// or the per-scale concatenation.
template <typename Scalar>
const typename PreparedTemplatesT<Scalar>::Matrix& fusion_operand(
    const PreparedTemplatesT<Scalar>& side, const FusionStrategy& strategy, bool probe_side) {
  if (strategy.concat) {
    if (side.concat.size() == 0) {
      throw std::invalid_argument("template concatenation needs scale-tagged templates");
    }
    return side.concat;
  }
  const TemplateRule rule = probe_side ? strategy.probe : strategy.gallery;
  return rule == TemplateRule::kAdd ? side.sum : side.rows;
}

/// The matrix the score rules see after template fusion: m x n, 1 x n, m x 1
/// or 1 x 1 depending on the strategy. Entries are clamped to [-1, 1].
template <typename Scalar>
typename PreparedTemplatesT<Scalar>::Matrix fused_similarity_matrix(
    const PreparedTemplatesT<Scalar>& probe, const PreparedTemplatesT<Scalar>& gallery,
    const FusionStrategy& strategy) {
  using Matrix = typename PreparedTemplatesT<Scalar>::Matrix;
  const Matrix* left = &fusion_operand(probe, strategy, true);
  const Matrix* right = &fusion_operand(gallery, strategy, false);
  if (strategy.concat && probe.concat_scales != gallery.concat_scales) {
    throw std::invalid_argument("probe and gallery templates cover different scales");
  }
  if (left->cols() != right->cols()) {
    throw std::invalid_argument("probe and gallery template dimensions differ");
  }
  Matrix m = (*left) * right->transpose();
  return m.cwiseMax(Scalar(-1)).cwiseMin(Scalar(1));
}

template <typename Derived>
double fuse_scores(const Eigen::MatrixBase<Derived>& m, const FusionStrategy& strategy) {
  return score_fuse_vector(score_fuse_rows(m, strategy.row_rule), strategy.vector_rule);
}

template <typename Scalar>
double pair_similarity(const PreparedTemplatesT<Scalar>& probe,
                       const PreparedTemplatesT<Scalar>& gallery, const FusionStrategy& strategy) {
  return fuse_scores(fused_similarity_matrix(probe, gallery, strategy), strategy);
}

/// Similarity of one probe image and one gallery image from their hypothesis
/// templates, evaluated in double precision.
double pair_similarity(const std::vector<Template>& probe_ts,
                       const std::vector<Template>& gallery_ts, const FusionStrategy& strategy);

/// Entry (i, j) = correlation(probe_ts[i], gallery_ts[j]).
Eigen::MatrixXd similarity_matrix(const std::vector<Template>& probe_ts,
                                  const std::vector<Template>& gallery_ts);

/// RFC 4180 field: quoted (with doubled quotes) when it holds a comma, quote
/// or line break; otherwise unchanged. Fusion names contain commas.
std::string csv_field(std::string_view value);

/// `probe_id,gallery_id,score` triples, one per matrix cell, with a header.
void write_similarity_csv(std::ostream& out, const Eigen::MatrixXd& m,
                          const std::vector<std::string>& probe_ids,
                          const std::vector<std::string>& gallery_ids);

}  // namespace xres

#endif  // XRES_FUSION_HPP_
