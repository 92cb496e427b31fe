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

#include "speechcaps/chat_client.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "speechcaps/error.hpp"
#include "speechcaps/jsonl.hpp"

namespace speechcaps {

ChatClient::ChatClient(ChatClientConfig config) : config_(std::move(config)) {
  const std::string& url = config_.endpoint;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint '" + url + "' has no scheme");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  base_url_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (config_.max_attempts < 1) config_.max_attempts = 1;
}

void ChatClient::audit(const std::string& request, int status, const std::string& response) const {
  if (!config_.audit_path) return;
  Json row;
  row["request"] = Json::parse(request);
  row["status"] = status;
  row["response"] = response;
  std::lock_guard lock(audit_mutex_);
  std::ofstream out(*config_.audit_path, std::ios::app);
  out << row.dump() << '\n';
}

std::string ChatClient::complete(const std::string& system_prompt,
                                 const std::string& user_prompt) const {
  Json body;
  body["model"] = config_.model;
  body["temperature"] = 0;
  body["max_tokens"] = config_.max_tokens;
  body["messages"] = Json::array({Json{{"role", "system"}, {"content", system_prompt}},
                                   Json{{"role", "user"}, {"content", user_prompt}}});
  const std::string request = body.dump();

  httplib::Client client(base_url_);
  const auto timeout = std::chrono::duration<double>(config_.timeout_s);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
    if (attempt > 0) {
      const double wait = config_.initial_backoff_s * std::pow(2.0, attempt - 1);
      std::this_thread::sleep_for(std::chrono::duration<double>(wait));
    }
    auto res = client.Post(path_, headers, request, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      audit(request, 0, last_error);
      continue;
    }
    audit(request, res->status, res->body);
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      spdlog::debug("judge endpoint returned {}, backing off", res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kBackendUnavailable,
                  "HTTP " + std::to_string(res->status) + " from " + config_.endpoint);
    }
    try {
      const Json reply = Json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kUnparseableReply, std::string("malformed completion body: ") + e.what());
    }
  }
  throw Error(ErrorCode::kBackendUnavailable,
              config_.endpoint + " unavailable after " + std::to_string(config_.max_attempts) +
                  " attempts (" + last_error + ")");
}

}  // namespace speechcaps
