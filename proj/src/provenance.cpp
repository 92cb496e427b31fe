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

#include "speechcaps/provenance.hpp"

#include <set>

#include <spdlog/spdlog.h>

#include "speechcaps/config.hpp"
#include "speechcaps/error.hpp"
#include "speechcaps/hashing.hpp"

namespace speechcaps {

namespace fs = std::filesystem;

namespace {

std::string relative_to(const fs::path& p, const fs::path& dir) {
  const fs::path rel = fs::absolute(p).lexically_normal().lexically_relative(fs::absolute(dir).lexically_normal());
  return rel.empty() ? fs::absolute(p).lexically_normal().generic_string() : rel.generic_string();
}

fs::path resolve(const std::string& stored, const fs::path& dir) {
  const fs::path p(stored);
  return (p.is_absolute() ? p : dir / p).lexically_normal();
}

Json entry_json(const ProvenanceEntry& e) {
  Json j;
  if (e.is_group) {
    j["group"] = e.path;
    j["files"] = e.members;
  } else {
    j["path"] = e.path;
  }
  j["sha256"] = e.sha256;
  return j;
}

ProvenanceEntry entry_from_json(const Json& j) {
  ProvenanceEntry e;
  if (j.contains("group")) {
    e.is_group = true;
    e.path = j.at("group").get<std::string>();
    e.members = j.at("files").get<std::vector<std::string>>();
  } else {
    e.path = j.at("path").get<std::string>();
  }
  e.sha256 = j.at("sha256").get<std::string>();
  return e;
}

std::string group_digest(const std::vector<std::string>& names, const std::vector<fs::path>& files,
                         HashCache& hashes) {
  Sha256 h;
  for (std::size_t i = 0; i < files.size(); ++i) {
    h.update(names[i] + "\t" + hashes.file(files[i]) + "\n");
  }
  return h.hex_digest();
}

ProvenanceEntry describe(const Artifact& a, const fs::path& dir, HashCache& hashes) {
  ProvenanceEntry e;
  if (a.group.empty()) {
    if (a.files.size() != 1) throw Error(ErrorCode::kInvalidArgument, "a file artifact names one file");
    e.path = relative_to(a.files.front(), dir);
    e.sha256 = hashes.file(a.files.front());
    return e;
  }
  e.is_group = true;
  e.path = a.group;
  for (const auto& f : a.files) e.members.push_back(relative_to(f, dir));
  e.sha256 = group_digest(e.members, a.files, hashes);
  return e;
}

// Recomputes a recorded entry from disk. Missing files yield nullopt.
std::optional<std::string> rehash(const ProvenanceEntry& e, const fs::path& dir, HashCache& hashes) {
  if (!e.is_group) {
    const fs::path p = resolve(e.path, dir);
    if (!fs::exists(p)) return std::nullopt;
    return hashes.file(p);
  }
  std::vector<fs::path> files;
  for (const auto& m : e.members) {
    files.push_back(resolve(m, dir));
    if (!fs::exists(files.back())) return std::nullopt;
  }
  return group_digest(e.members, files, hashes);
}

void check_upstream_impl(const fs::path& input, HashCache& hashes, std::set<std::string>& visited) {
  const fs::path path = fs::absolute(input).lexically_normal();
  if (!visited.insert(path.string()).second) return;
  if (!fs::exists(path)) {
    throw Error(ErrorCode::kMissingUpstream, "required input '" + input.string() + "' does not exist");
  }
  const auto record = read_provenance(provenance_path(path));
  if (!record) return;  // produced outside the pipeline
  const fs::path dir = path.parent_path();
  for (const auto& out : record->outputs) {
    auto now = rehash(out, dir, hashes);
    if (!now) {
      throw Error(ErrorCode::kMissingUpstream,
                  "output '" + out.path + "' of stage '" + record->stage + "' is missing");
    }
    if (*now != out.sha256) {
      throw Error(ErrorCode::kStaleUpstream, "'" + out.path + "' changed after stage '" + record->stage +
                                                 "' wrote it; re-run that stage");
    }
  }
  for (const auto& in : record->inputs) {
    auto now = rehash(in, dir, hashes);
    if (!now) {
      throw Error(ErrorCode::kMissingUpstream,
                  "input '" + in.path + "' of stage '" + record->stage + "' is missing");
    }
    if (*now != in.sha256) {
      throw Error(ErrorCode::kStaleUpstream, "input '" + in.path + "' changed since stage '" +
                                                 record->stage + "' ran; re-run that stage");
    }
    if (!in.is_group) check_upstream_impl(resolve(in.path, dir), hashes, visited);
  }
}

}  // namespace

fs::path provenance_path(const fs::path& primary_output) {
  fs::path p = primary_output;
  p += ".prov.json";
  return p;
}

Json to_json(const ProvenanceRecord& r) {
  Json j;
  j["stage"] = r.stage;
  j["tool_version"] = r.tool_version;
  j["config_hash"] = r.config_hash;
  j["seed"] = r.seed;
  j["params"] = r.params;
  Json in = Json::array(), out = Json::array();
  for (const auto& e : r.inputs) in.push_back(entry_json(e));
  for (const auto& e : r.outputs) out.push_back(entry_json(e));
  j["inputs"] = std::move(in);
  j["outputs"] = std::move(out);
  return j;
}

ProvenanceRecord provenance_from_json(const Json& j) {
  try {
    ProvenanceRecord r;
    r.stage = j.at("stage").get<std::string>();
    r.tool_version = j.at("tool_version").get<std::string>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.params = j.at("params");
    for (const auto& e : j.at("inputs")) r.inputs.push_back(entry_from_json(e));
    for (const auto& e : j.at("outputs")) r.outputs.push_back(entry_from_json(e));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("provenance record: ") + e.what());
  }
}

std::optional<ProvenanceRecord> read_provenance(const fs::path& record_path) {
  if (!fs::exists(record_path)) return std::nullopt;
  try {
    return provenance_from_json(Json::parse(read_text(record_path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kSchema, record_path.string() + ": " + e.what());
  }
}

const std::string& HashCache::file(const fs::path& p) {
  const std::string key = fs::absolute(p).lexically_normal().string();
  auto it = cache_.find(key);
  if (it == cache_.end()) it = cache_.emplace(key, sha256_file(p)).first;
  return it->second;
}

std::string HashCache::digest(const Artifact& a) {
  if (a.group.empty() && a.files.size() == 1) return file(a.files.front());
  std::vector<std::string> names;
  for (const auto& f : a.files) names.push_back(f.filename().generic_string());
  return group_digest(names, a.files, *this);
}

void check_upstream(const fs::path& input, HashCache& hashes) {
  std::set<std::string> visited;
  check_upstream_impl(input, hashes, visited);
}

StageOutcome run_stage(const StageSpec& spec, bool force, const std::function<void()>& body) {
  if (spec.outputs.empty() || !spec.outputs.front().group.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "a stage needs a primary output file");
  }
  const fs::path primary = spec.outputs.front().files.front();
  const fs::path record_path = provenance_path(primary);
  const fs::path dir = fs::absolute(primary).parent_path();

  HashCache hashes;
  for (const auto& in : spec.inputs) {
    for (const auto& f : in.files) {
      if (in.group.empty()) {
        check_upstream(f, hashes);
      } else if (!fs::exists(f)) {
        throw Error(ErrorCode::kMissingUpstream, "required input '" + f.string() + "' does not exist");
      }
    }
  }

  ProvenanceRecord record;
  record.stage = spec.stage;
  record.tool_version = kToolVersion;
  record.seed = spec.seed;
  record.params = spec.params;
  record.config_hash = sha256_hex(spec.params.dump());
  for (const auto& in : spec.inputs) record.inputs.push_back(describe(in, dir, hashes));

  if (!force) {
    if (auto old = read_provenance(record_path); old && old->stage == record.stage &&
                                                 old->tool_version == record.tool_version &&
                                                 old->config_hash == record.config_hash &&
                                                 old->seed == record.seed && old->inputs == record.inputs) {
      bool outputs_match = true;
      for (const auto& out : old->outputs) {
        auto now = rehash(out, dir, hashes);
        if (!now || *now != out.sha256) {
          outputs_match = false;
          break;
        }
      }
      if (outputs_match) {
        spdlog::info("{}: outputs are up to date, nothing to do (use --force to re-run)", spec.stage);
        return StageOutcome::kUpToDate;
      }
    }
  }

  body();

  // Outputs were just rewritten, so cached hashes of them are stale.
  HashCache fresh;
  for (const auto& out : spec.outputs) record.outputs.push_back(describe(out, dir, fresh));
  if (spec.late_outputs) {
    for (const auto& out : spec.late_outputs()) record.outputs.push_back(describe(out, dir, fresh));
  }
  write_text(record_path, to_json(record).dump(2) + "\n");
  return StageOutcome::kRan;
}

}  // namespace speechcaps
