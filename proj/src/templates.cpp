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

#include "xres/templates.hpp"

#include "xres/errors.hpp"

namespace xres {

Image prepare_input(const Image& img, int input_size) {
  return resize_bicubic(img, input_size, input_size);
}

Template reference_embed(const Image& img) {
  const Image small = resize_bicubic(to_grayscale(img), kReferenceGrid, kReferenceGrid);
  Eigen::VectorXd v(kReferenceDim);
  const auto& p = small.plane(0);
  for (int y = 0; y < kReferenceGrid; ++y) {
    for (int x = 0; x < kReferenceGrid; ++x) v(y * kReferenceGrid + x) = p(y, x);
  }
  v.array() -= v.mean();
  const double norm = v.norm();
  if (norm < 1e-12) {
    v.setZero();
  } else {
    v /= norm;
  }
  return Template{std::move(v), std::nullopt, {}};
}

std::vector<Eigen::VectorXd> ReferenceEmbedder::embed(const std::vector<Image>& prepared) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(prepared.size());
  for (const auto& img : prepared) out.push_back(reference_embed(img).values);
  return out;
}

ExternalEmbedder::ExternalEmbedder(std::string id, std::string command,
                                   std::filesystem::path work_dir, int input_size, int dimension,
                                   std::chrono::milliseconds timeout)
    : id_(std::move(id)),
      client_(std::move(command), std::move(work_dir), timeout),
      input_size_(input_size),
      dimension_(dimension) {}

std::vector<Eigen::VectorXd> ExternalEmbedder::embed(const std::vector<Image>& prepared) {
  std::vector<Eigen::VectorXd> out;
  try {
    out = client_.embed(prepared);
  } catch (const ProtocolError& e) {
    throw ProtocolError("embedder '" + id_ + "': " + e.what());
  } catch (const BackendError& e) {
    throw BackendError("embedder '" + id_ + "': " + e.what());
  }
  for (const auto& v : out) {
    if (dimension_ == 0) dimension_ = static_cast<int>(v.size());
    if (v.size() != dimension_) {
      throw ProtocolError("embedder '" + id_ + "' returned dimension " +
                          std::to_string(v.size()) + ", expected " + std::to_string(dimension_));
    }
    if (!v.allFinite()) throw ProtocolError("embedder '" + id_ + "' returned non-finite values");
  }
  return out;
}

std::vector<Template> embed_batch(const std::vector<Image>& imgs, EmbedderBackend& backend) {
  if (imgs.empty()) throw std::invalid_argument("embed_batch needs at least one image");
  std::vector<Image> prepared;
  prepared.reserve(imgs.size());
  for (const auto& img : imgs) prepared.push_back(prepare_input(img, backend.input_size()));
  auto vectors = backend.embed(prepared);
  if (vectors.size() != imgs.size()) {
    throw ProtocolError("embedder '" + backend.id() + "' returned " +
                        std::to_string(vectors.size()) + " templates for " +
                        std::to_string(imgs.size()) + " images");
  }
  std::vector<Template> out;
  out.reserve(vectors.size());
  for (auto& v : vectors) {
    if (!out.empty() && v.size() != out.front().dim()) {
      throw ProtocolError("template dimension drift within a batch");
    }
    out.push_back(Template{std::move(v), std::nullopt, {}});
  }
  return out;
}

}  // namespace xres
