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

#include "xres/exchange.hpp"

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "xres/errors.hpp"
#include "xres/image_io.hpp"

namespace xres::exchange {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ProtocolError("missing " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ProtocolError("malformed " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw BackendError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string item_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "item-%06zu", i);
  return buf;
}

}  // namespace

void write_manifest(const fs::path& dir, const std::vector<RequestItem>& items) {
  json arr = json::array();
  for (const auto& it : items) {
    json j = {{"id", it.id}, {"file", it.file}, {"op", it.op}};
    if (it.factor) j["factor"] = *it.factor;
    arr.push_back(std::move(j));
  }
  write_json(dir / "manifest.json", arr);
}

std::vector<RequestItem> read_manifest(const fs::path& dir) {
  const json arr = read_json(dir / "manifest.json");
  std::vector<RequestItem> items;
  try {
    for (const auto& j : arr) {
      RequestItem it{j.at("id").get<std::string>(), j.at("file").get<std::string>(),
                     j.at("op").get<std::string>(), std::nullopt};
      if (j.contains("factor")) it.factor = j.at("factor").get<int>();
      items.push_back(std::move(it));
    }
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed manifest: ") + e.what());
  }
  return items;
}

void write_response(const fs::path& dir, const std::vector<ResponseItem>& items) {
  json arr = json::array();
  for (const auto& it : items) {
    json j = {{"id", it.id}};
    if (it.file) j["file"] = *it.file;
    if (it.vector_file) j["vector_file"] = *it.vector_file;
    arr.push_back(std::move(j));
  }
  write_json(dir / "response.json", arr);
}

std::vector<ResponseItem> read_response(const fs::path& dir) {
  const json arr = read_json(dir / "response.json");
  if (!arr.is_array()) throw ProtocolError("response.json must be an array");
  std::vector<ResponseItem> items;
  try {
    for (const auto& j : arr) {
      ResponseItem it{j.at("id").get<std::string>(), std::nullopt, std::nullopt};
      if (j.contains("file")) it.file = j.at("file").get<std::string>();
      if (j.contains("vector_file")) it.vector_file = j.at("vector_file").get<std::string>();
      items.push_back(std::move(it));
    }
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed response: ") + e.what());
  }
  return items;
}

std::string format_vector_record(const VectorRecord& record) {
  std::string line = record.id + "," + std::to_string(record.values.size());
  char buf[40];
  for (Eigen::Index i = 0; i < record.values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), ",%.17g", record.values(i));
    line += buf;
  }
  return line;
}

VectorRecord parse_vector_record(const std::string& line) {
  std::stringstream ss(line);
  std::string field;
  VectorRecord rec;
  if (!std::getline(ss, rec.id, ',') || rec.id.empty()) {
    throw ProtocolError("vector record without id");
  }
  if (!std::getline(ss, field, ',')) throw ProtocolError("vector record without dim: " + rec.id);
  long dim = 0;
  try {
    dim = std::stol(field);
  } catch (const std::exception&) {
    throw ProtocolError("bad dim in vector record " + rec.id);
  }
  if (dim < 1) throw ProtocolError("bad dim in vector record " + rec.id);
  rec.values.resize(dim);
  for (long i = 0; i < dim; ++i) {
    if (!std::getline(ss, field, ',')) {
      throw ProtocolError("vector record " + rec.id + " shorter than its dim");
    }
    errno = 0;
    char* end = nullptr;
    rec.values(i) = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || errno == ERANGE) {
      throw ProtocolError("bad value in vector record " + rec.id);
    }
  }
  if (std::getline(ss, field, ',')) {
    throw ProtocolError("vector record " + rec.id + " longer than its dim");
  }
  return rec;
}

void write_vector_file(const fs::path& path, const std::vector<VectorRecord>& records) {
  std::ofstream out(path);
  if (!out) throw BackendError("cannot write " + path.string());
  for (const auto& r : records) out << format_vector_record(r) << '\n';
}

std::vector<VectorRecord> read_vector_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ProtocolError("missing vector file " + path.string());
  std::vector<VectorRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(parse_vector_record(line));
  }
  return out;
}

void run_command(const std::string& command, const fs::path& request_dir,
                 std::chrono::milliseconds timeout) {
  const std::string full = command + " '" + request_dir.string() + "'";
  const pid_t pid = fork();
  if (pid < 0) throw BackendError("cannot spawn backend '" + command + "'");
  if (pid == 0) {
    setpgid(0, 0);  // so a timeout can kill the command's children too
    execl("/bin/sh", "sh", "-c", full.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  auto poll = std::chrono::milliseconds(1);
  for (;;) {
    int status = 0;
    const pid_t r = waitpid(pid, &status, WNOHANG);
    if (r == pid) {
      if (WIFEXITED(status) && WEXITSTATUS(status) == 0) return;
      const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
      throw BackendError("backend '" + command + "' failed with exit code " +
                         std::to_string(code) + " on " + request_dir.string());
    }
    if (r < 0 && errno != EINTR) throw BackendError("waitpid failed for backend '" + command + "'");
    if (std::chrono::steady_clock::now() > deadline) {
      kill(-pid, SIGKILL);
      kill(pid, SIGKILL);
      waitpid(pid, &status, 0);
      throw BackendError("backend '" + command + "' timed out on " + request_dir.string());
    }
    std::this_thread::sleep_for(poll);
    if (poll < std::chrono::milliseconds(50)) poll *= 2;
  }
}

Client::Client(std::string command, fs::path work_dir, std::chrono::milliseconds timeout)
    : command_(std::move(command)), work_dir_(std::move(work_dir)), timeout_(timeout) {}

fs::path Client::next_request_dir() {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "request-%06llu", static_cast<unsigned long long>(batches_++));
  fs::path dir = work_dir_ / buf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<ResponseItem> Client::roundtrip(const std::vector<Image>& inputs,
                                            const std::string& op, std::optional<int> factor,
                                            fs::path& dir) {
  dir = next_request_dir();
  std::vector<RequestItem> items;
  items.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::string id = item_id(i);
    write_png(inputs[i], dir / (id + ".png"));
    items.push_back(RequestItem{id, id + ".png", op, factor});
  }
  write_manifest(dir, items);
  run_command(command_, dir, timeout_);
  std::vector<ResponseItem> response = read_response(dir);
  std::map<std::string, ResponseItem> by_id;
  for (auto& r : response) by_id.emplace(r.id, std::move(r));
  std::vector<ResponseItem> ordered;
  ordered.reserve(items.size());
  for (const auto& it : items) {
    auto found = by_id.find(it.id);
    if (found == by_id.end()) throw ProtocolError("backend response lacks item " + it.id);
    ordered.push_back(found->second);
  }
  return ordered;
}

std::vector<Image> Client::upsample(const std::vector<Image>& inputs, int factor) {
  std::lock_guard<std::mutex> lock(mu_);
  if (inputs.empty()) return {};
  fs::path dir;
  const auto response = roundtrip(inputs, "upsample", factor, dir);
  std::vector<Image> out;
  out.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!response[i].file) throw ProtocolError("upsample response without file for " + response[i].id);
    Image img = read_png(dir / *response[i].file);
    if (img.width() != inputs[i].width() * factor || img.height() != inputs[i].height() * factor) {
      throw ProtocolError("backend returned " + std::to_string(img.width()) + "x" +
                          std::to_string(img.height()) + " for a x" + std::to_string(factor) +
                          " upsample of " + std::to_string(inputs[i].width()) + "x" +
                          std::to_string(inputs[i].height()));
    }
    out.push_back(std::move(img));
  }
  return out;
}

std::vector<Eigen::VectorXd> Client::embed(const std::vector<Image>& inputs) {
  std::lock_guard<std::mutex> lock(mu_);
  if (inputs.empty()) return {};
  fs::path dir;
  const auto response = roundtrip(inputs, "embed", std::nullopt, dir);
  std::map<std::string, std::map<std::string, Eigen::VectorXd>> files;
  std::vector<Eigen::VectorXd> out;
  out.reserve(inputs.size());
  for (const auto& r : response) {
    if (!r.vector_file) throw ProtocolError("embed response without vector_file for " + r.id);
    auto it = files.find(*r.vector_file);
    if (it == files.end()) {
      std::map<std::string, Eigen::VectorXd> recs;
      for (auto& rec : read_vector_file(dir / *r.vector_file)) {
        recs[rec.id] = std::move(rec.values);
      }
      it = files.emplace(*r.vector_file, std::move(recs)).first;
    }
    auto rec = it->second.find(r.id);
    if (rec == it->second.end()) {
      throw ProtocolError("vector file " + *r.vector_file + " lacks record " + r.id);
    }
    if (!out.empty() && rec->second.size() != out.front().size()) {
      throw ProtocolError("template dimension drift within a batch: " +
                          std::to_string(out.front().size()) + " vs " +
                          std::to_string(rec->second.size()));
    }
    out.push_back(rec->second);
  }
  return out;
}

}  // namespace xres::exchange
