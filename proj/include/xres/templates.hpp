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

#ifndef XRES_TEMPLATES_HPP_
#define XRES_TEMPLATES_HPP_

#include <Eigen/Dense>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "xres/exchange.hpp"
#include "xres/gallery.hpp"
#include "xres/image.hpp"

namespace xres {

inline constexpr int kEmbedderInputSize = 112;
inline constexpr int kReferenceGrid = 16;
inline constexpr int kReferenceDim = kReferenceGrid * kReferenceGrid;

/// A face template: one embedding vector, tagged with the probe scale of the
/// hypothesis it came from (if any).
struct Template {
  Eigen::VectorXd values;
  std::optional<ScaleTag> scale;
  std::string source;

  Eigen::Index dim() const { return values.size(); }
};

/// Square bicubic resize to the embedder input size, up or down.
Image prepare_input(const Image& img, int input_size = kEmbedderInputSize);

/// Deterministic stand-in for a face network: grayscale, 16x16 bicubic,
/// flatten, subtract the mean, scale to unit norm. Constant images map to
/// the zero vector.
Template reference_embed(const Image& img);

class EmbedderBackend {
 public:
  virtual ~EmbedderBackend() = default;
  virtual std::string id() const = 0;
  virtual int input_size() const = 0;
  /// Template dimension; 0 when only known after the first response.
  virtual int dimension() const = 0;
  /// True when embed() may be called concurrently from several threads.
  virtual bool concurrent() const { return false; }
  /// Embeds images already passed through prepare_input().
  virtual std::vector<Eigen::VectorXd> embed(const std::vector<Image>& prepared) = 0;
};

class ReferenceEmbedder final : public EmbedderBackend {
 public:
  explicit ReferenceEmbedder(int input_size = kEmbedderInputSize) : input_size_(input_size) {}
  std::string id() const override { return "reference"; }
  int input_size() const override { return input_size_; }
  int dimension() const override { return kReferenceDim; }
  bool concurrent() const override { return true; }
  std::vector<Eigen::VectorXd> embed(const std::vector<Image>& prepared) override;

 private:
  int input_size_;
};

class ExternalEmbedder final : public EmbedderBackend {
 public:
  ExternalEmbedder(std::string id, std::string command, std::filesystem::path work_dir,
                   int input_size = kEmbedderInputSize, int dimension = 0,
                   std::chrono::milliseconds timeout = std::chrono::minutes(10));
  std::string id() const override { return id_; }
  int input_size() const override { return input_size_; }
  int dimension() const override { return dimension_; }
  std::vector<Eigen::VectorXd> embed(const std::vector<Image>& prepared) override;

 private:
  std::string id_;
  exchange::Client client_;
  int input_size_;
  int dimension_;
};

/// Order-preserving: prepare_input() then the backend. Throws ProtocolError
/// if the backend's dimension drifts.
std::vector<Template> embed_batch(const std::vector<Image>& imgs, EmbedderBackend& backend);

}  // namespace xres

#endif  // XRES_TEMPLATES_HPP_
