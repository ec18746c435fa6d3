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

// File-exchange protocol for out-of-process models (super-resolution
// networks, face recognition networks).
//
// For every batch the client creates a fresh request directory containing
//
//   manifest.json   [{"id": "...", "file": "<id>.png", "op": "upsample"|"embed",
//                     "factor": k}, ...]          ("factor" only for upsample)
//   <id>.png        8-bit RGB inputs
//
// and runs `<command> <request_dir>` through /bin/sh. Exit code 0 means
// success. The external process answers with
//
//   response.json   [{"id": "...", "file": "out.png"}, ...]          (upsample)
//                   [{"id": "...", "vector_file": "vectors.txt"}, ...] (embed)
//
// Vector files hold one record per line, `id,dim,v1,...,vdim`, as decimal
// text. Paths in response.json are relative to the request directory.

#ifndef XRES_EXCHANGE_HPP_
#define XRES_EXCHANGE_HPP_

#include <Eigen/Dense>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xres/image.hpp"

namespace xres::exchange {

struct RequestItem {
  std::string id;
  std::string file;
  std::string op;
  std::optional<int> factor;
};

struct ResponseItem {
  std::string id;
  std::optional<std::string> file;
  std::optional<std::string> vector_file;
};

struct VectorRecord {
  std::string id;
  Eigen::VectorXd values;
};

void write_manifest(const std::filesystem::path& dir, const std::vector<RequestItem>& items);
std::vector<RequestItem> read_manifest(const std::filesystem::path& dir);
void write_response(const std::filesystem::path& dir, const std::vector<ResponseItem>& items);
std::vector<ResponseItem> read_response(const std::filesystem::path& dir);

/// Values are written with 17 significant digits, so doubles round-trip.
std::string format_vector_record(const VectorRecord& record);
VectorRecord parse_vector_record(const std::string& line);
void write_vector_file(const std::filesystem::path& path, const std::vector<VectorRecord>& records);
std::vector<VectorRecord> read_vector_file(const std::filesystem::path& path);

/// Runs `command request_dir` under /bin/sh. Throws BackendError on spawn
/// failure, non-zero exit or timeout (the child is killed).
void run_command(const std::string& command, const std::filesystem::path& request_dir,
                 std::chrono::milliseconds timeout);

/// One external process endpoint. Calls are serialized: at most one request
/// directory is in flight per client.
class Client {
 public:
  Client(std::string command, std::filesystem::path work_dir,
         std::chrono::milliseconds timeout = std::chrono::minutes(10));

  std::vector<Image> upsample(const std::vector<Image>& inputs, int factor);
  std::vector<Eigen::VectorXd> embed(const std::vector<Image>& inputs);

  const std::string& command() const { return command_; }

 private:
  std::filesystem::path next_request_dir();
  std::vector<ResponseItem> roundtrip(const std::vector<Image>& inputs, const std::string& op,
                                      std::optional<int> factor, std::filesystem::path& dir);

  std::string command_;
  std::filesystem::path work_dir_;
  std::chrono::milliseconds timeout_;
  std::mutex mu_;
  std::uint64_t batches_ = 0;
};

}  // namespace xres::exchange

#endif  // XRES_EXCHANGE_HPP_
