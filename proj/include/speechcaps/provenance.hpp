// Copyright 2026 The speechcaps-forge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPEECHCAPS_PROVENANCE_HPP_
#define SPEECHCAPS_PROVENANCE_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "speechcaps/jsonl.hpp"

namespace speechcaps {

// A stage input or output. A single file is recorded by path and hash; a
// group (e.g. the rendered clip WAVs) by a digest over its members.
struct Artifact {
  std::string group;  // empty for a single file
  std::vector<std::filesystem::path> files;

  static Artifact file(std::filesystem::path p) { return {{}, {std::move(p)}}; }
  static Artifact group_of(std::string name, std::vector<std::filesystem::path> files) {
    return {std::move(name), std::move(files)};
  }
};

struct ProvenanceEntry {
  std::string path;  // relative to the record's directory; group name for groups
  bool is_group = false;
  std::vector<std::string> members;  // group members, relative like `path`
  std::string sha256;

  bool operator==(const ProvenanceEntry&) const = default;
};

struct ProvenanceRecord {
  std::string stage;
  std::string tool_version;
  std::string config_hash;
  std::uint64_t seed = 0;
  Json params;
  std::vector<ProvenanceEntry> inputs;
  std::vector<ProvenanceEntry> outputs;
};

/// "<file>.prov.json" next to a stage's primary output.
std::filesystem::path provenance_path(const std::filesystem::path& primary_output);

Json to_json(const ProvenanceRecord& r);
ProvenanceRecord provenance_from_json(const Json& j);
std::optional<ProvenanceRecord> read_provenance(const std::filesystem::path& record_path);

/// Memoizing file hasher; hashing is the dominant cost of provenance checks.
class HashCache {
 public:
  const std::string& file(const std::filesystem::path& p);
  std::string digest(const Artifact& a);

 private:
  std::map<std::string, std::string> cache_;
};

/// Verifies that `input` exists (else kMissingUpstream) and, when it was
/// produced by a stage, that it and everything that stage consumed still
/// hash to the recorded values (else kStaleUpstream). Recurses upstream.
void check_upstream(const std::filesystem::path& input, HashCache& hashes);

struct StageSpec {
  std::string stage;
  std::uint64_t seed = 0;
  Json params;  // everything besides inputs that influences the outputs
  std::vector<Artifact> inputs;
  std::vector<Artifact> outputs;  // outputs[0] is the primary output file
  // Outputs only known once the body ran (e.g. rendered audio).
  std::function<std::vector<Artifact>()> late_outputs;
};

enum class StageOutcome { kRan, kUpToDate };

/// Checks upstream provenance, skips the body when the recorded config and
/// every input and output hash still match (unless `force`), otherwise runs
/// the body and writes the record.
StageOutcome run_stage(const StageSpec& spec, bool force, const std::function<void()>& body);

}  // namespace speechcaps

#endif  // SPEECHCAPS_PROVENANCE_HPP_
