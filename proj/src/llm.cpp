#include "arc/llm.hpp"

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"

namespace arc {

namespace {

using nlohmann::json;

std::uint64_t fnv1a64(std::uint64_t h, std::string_view bytes) {
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

const char* role_name(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

std::string message_digest(const std::vector<ChatMessage>& messages) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const ChatMessage& m : messages) {
    h = fnv1a64(h, role_name(m.role));
    h = fnv1a64(h, "\x1f");
    h = fnv1a64(h, m.content);
    h = fnv1a64(h, "\x1e");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ScriptedBackend::ScriptedBackend(std::filesystem::path directory)
    : directory_(std::move(directory)) {
  if (!std::filesystem::is_directory(directory_)) {
    fail(errc::backend_error, "scripted transcript directory " + directory_.string() +
                                  " does not exist");
  }
}

std::vector<std::string> ScriptedBackend::complete(const std::vector<ChatMessage>& messages,
                                                   const CompletionParams& params) {
  if (params.sample_count < 1) {
    fail(errc::precondition, "sample_count must be at least 1");
  }
  const std::string digest = message_digest(messages);
  const std::filesystem::path file = directory_ / (digest + ".json");
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    std::string tail = messages.empty() ? std::string("<no messages>") : messages.back().content;
    if (tail.size() > 120) tail = tail.substr(0, 120) + "...";
    fail(errc::backend_error, "no scripted transcript for digest " + digest +
                                  " (last message starts: " + tail + ")");
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    fail(errc::backend_error, "transcript file " + file.string() + " is not valid JSON: " +
                                  e.what());
  }
  if (!doc.contains("completions") || !doc["completions"].is_array()) {
    fail(errc::backend_error, "transcript file " + file.string() + " has no completions array");
  }
  std::vector<std::string> completions;
  for (const json& c : doc["completions"]) {
    completions.push_back(c.get<std::string>());
  }
  if (completions.size() < static_cast<std::size_t>(params.sample_count)) {
    fail(errc::backend_error, "transcript " + digest + " has " +
                                  std::to_string(completions.size()) + " completions, " +
                                  std::to_string(params.sample_count) + " requested");
  }
  completions.resize(static_cast<std::size_t>(params.sample_count));
  return completions;
}

std::string ScriptedBackend::record(const std::filesystem::path& directory,
                                    const std::vector<ChatMessage>& messages,
                                    const std::vector<std::string>& completions) {
  std::filesystem::create_directories(directory);
  const std::string digest = message_digest(messages);
  json doc;
  doc["digest"] = digest;
  json msgs = json::array();
  for (const ChatMessage& m : messages) {
    msgs.push_back({{"role", role_name(m.role)}, {"content", m.content}});
  }
  doc["messages"] = std::move(msgs);
  doc["completions"] = completions;
  std::ofstream out(directory / (digest + ".json"), std::ios::binary);
  if (!out) {
    fail(errc::io_error, "cannot write transcript file in " + directory.string());
  }
  out << doc.dump(2) << "\n";
  return digest;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  if (const char* key = std::getenv(config_.api_key_env.c_str())) {
    api_key_ = key;
  }
}

std::vector<std::string> HttpBackend::complete(const std::vector<ChatMessage>& messages,
                                               const CompletionParams& params) {
  if (params.sample_count < 1) {
    fail(errc::precondition, "sample_count must be at least 1");
  }
  json body;
  body["model"] = params.model_name;
  json msgs = json::array();
  for (const ChatMessage& m : messages) {
    msgs.push_back({{"role", role_name(m.role)}, {"content", m.content}});
  }
  body["messages"] = std::move(msgs);
  body["temperature"] = params.temperature;
  body["n"] = params.sample_count;
  body["max_tokens"] = params.max_tokens;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!api_key_.empty()) {
    headers.emplace("Authorization", "Bearer " + api_key_);
  }

  std::string last_failure = "no attempt made";
  int backoff_ms = config_.initial_backoff_ms;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
      backoff_ms *= 2;
    }
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.timeout_sec, 0);
    client.set_read_timeout(config_.timeout_sec, 0);
    client.set_write_timeout(config_.timeout_sec, 0);

    httplib::Result res =
        client.Post(config_.completions_path, headers, payload, "application/json");
    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status);
      continue;  // retryable
    }
    if (res->status != 200) {
      fail(errc::backend_error, "chat completion request failed with HTTP " +
                                    std::to_string(res->status) + ": " + res->body);
    }
    json doc = json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("choices") || !doc["choices"].is_array()) {
      fail(errc::backend_error, "chat completion response is not the expected JSON shape");
    }
    std::vector<std::string> completions;
    for (const json& choice : doc["choices"]) {
      completions.push_back(choice.at("message").at("content").get<std::string>());
    }
    if (completions.size() < static_cast<std::size_t>(params.sample_count)) {
      fail(errc::backend_error, "response carried " + std::to_string(completions.size()) +
                                    " choices, " + std::to_string(params.sample_count) +
                                    " requested");
    }
    completions.resize(static_cast<std::size_t>(params.sample_count));
    return completions;
  }
  fail(errc::backend_error, "chat completion failed after " +
                                std::to_string(config_.max_retries + 1) + " attempts (" +
                                last_failure + ")");
}

}  // namespace arc
