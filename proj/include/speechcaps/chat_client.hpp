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

#ifndef SPEECHCAPS_CHAT_CLIENT_HPP_
#define SPEECHCAPS_CHAT_CLIENT_HPP_

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace speechcaps {

inline constexpr const char* kApiKeyEnv = "SPEECHCAPS_API_KEY";

struct ChatClientConfig {
  // Full URL of a chat-completion endpoint, e.g.
  // https://api.example.com/v1/chat/completions
  std::string endpoint;
  std::string model;
  std::string api_key;  // never read from or written to config files
  int max_attempts = 5;
  double initial_backoff_s = 1.0;
  double timeout_s = 60.0;
  int max_tokens = 4;
  std::optional<std::filesystem::path> audit_path;
};

/// Minimal chat-completion client. Retries with exponential backoff on
/// connection errors, HTTP 429 and 5xx; other failures and exhausted retries
/// raise Error(kBackendUnavailable). Safe to call from several threads.
class ChatClient {
 public:
  explicit ChatClient(ChatClientConfig config);

  /// Returns choices[0].message.content.
  std::string complete(const std::string& system_prompt, const std::string& user_prompt) const;

  const ChatClientConfig& config() const { return config_; }

 private:
  void audit(const std::string& request, int status, const std::string& response) const;

  ChatClientConfig config_;
  std::string base_url_;
  std::string path_;
  mutable std::mutex audit_mutex_;
};

}  // namespace speechcaps

#endif  // SPEECHCAPS_CHAT_CLIENT_HPP_
