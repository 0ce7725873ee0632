#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "arc/error.hpp"

namespace arc {

enum class Role { system, user, assistant };

const char* role_name(Role role);

struct ChatMessage {
  Role role;
  std::string content;
};

struct CompletionParams {
  std::string model_name = "gpt-4";
  double temperature = 0.0;
  int max_tokens = 2048;
  int sample_count = 1;
};

// Boundary to the language model. Implementations must be safe for
// concurrent complete() calls.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;

  // Returns exactly params.sample_count completions or throws backend_error.
  virtual std::vector<std::string> complete(const std::vector<ChatMessage>& messages,
                                            const CompletionParams& params) = 0;
};

// Stable 64-bit digest (hex) of a message sequence, used to key recorded
// transcripts.
std::string message_digest(const std::vector<ChatMessage>& messages);

// Replays recorded transcripts from a directory of <digest>.json files:
//   {"digest": "...", "messages": [...], "completions": ["...", ...]}
// Unknown digests are an error; a scripted run never fabricates output.
class ScriptedBackend : public LlmBackend {
 public:
  explicit ScriptedBackend(std::filesystem::path directory);

  std::vector<std::string> complete(const std::vector<ChatMessage>& messages,
                                    const CompletionParams& params) override;

  // Writes one transcript file; returns its digest.
  static std::string record(const std::filesystem::path& directory,
                            const std::vector<ChatMessage>& messages,
                            const std::vector<std::string>& completions);

 private:
  std::filesystem::path directory_;
};

struct HttpBackendConfig {
  std::string base_url = "https://api.openai.com";
  std::string completions_path = "/v1/chat/completions";
  std::string api_key_env = "ARC_LLM_API_KEY";
  int timeout_sec = 60;
  int max_retries = 3;
  int initial_backoff_ms = 500;  // doubles per retry on 429/5xx/transport errors
};

// Chat-completions HTTP client. Request: {model, messages, temperature, n,
// max_tokens}; completions read from choices[i].message.content.
class HttpBackend : public LlmBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  std::vector<std::string> complete(const std::vector<ChatMessage>& messages,
                                    const CompletionParams& params) override;

 private:
  HttpBackendConfig config_;
  std::string api_key_;
};

}  // namespace arc
