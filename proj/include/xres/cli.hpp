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

#ifndef XRES_CLI_HPP_
#define XRES_CLI_HPP_

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "xres/config.hpp"

namespace xres {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitBackend = 3,
};

/// Maps an exception escaping a command to its exit code.
int exit_code_for(const std::exception& e);

// Each command writes its artifacts plus run.json under config.out_dir() and
// returns the run.json contents. `log` receives progress lines.

/// Gallery hypotheses as <cache>/<subject>/<chain>_x<factor>.png plus
/// index.json. Subjects already present with the same config hash are skipped.
nlohmann::ordered_json cmd_degrade(const RunConfig& config, std::ostream& log);

/// Probe hypotheses as <out>/hallucinations/<probe>/x<factor>_<ladder>.png.
nlohmann::ordered_json cmd_hallucinate(const RunConfig& config, std::ostream& log);

/// report.json (full) and report.csv (one rank-1 row).
nlohmann::ordered_json cmd_evaluate(const RunConfig& config, std::ostream& log);

/// ablation.csv / ablation.json over the whole stage ladder.
nlohmann::ordered_json cmd_ablate(const RunConfig& config, std::ostream& log);

/// simulate.csv: sigma, single-scale and accumulated accuracy.
nlohmann::ordered_json cmd_simulate(const RunConfig& config, std::ostream& log);

/// Canonical config and its hash.
nlohmann::ordered_json cmd_inspect_config(const RunConfig& config);

/// Procedural corpus under <out>/ with manifest.json.
nlohmann::ordered_json cmd_synthesize(const RunConfig& config, int num_subjects,
                                      int probes_per_subject, std::ostream& log);

/// Full command line: parses, runs and maps failures to exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace xres

#endif  // XRES_CLI_HPP_
