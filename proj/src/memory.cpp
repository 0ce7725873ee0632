#include "arc/memory.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
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

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void l2_normalize(std::vector<double>& v) {
  double norm_sq = 0.0;
  for (double x : v) norm_sq += x * x;
  if (norm_sq <= 0.0) {
    std::fill(v.begin(), v.end(), 0.0);
    if (!v.empty()) v[0] = 1.0;
    return;
  }
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& x : v) x *= inv;
}

std::uint64_t fnv1a64_token(std::string_view token) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char b : token) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

const char* memory_kind_name(MemoryKind kind) {
  return kind == MemoryKind::broad ? "broad" : "detailed";
}

HashedBagEmbedder::HashedBagEmbedder(int dimension) : dimension_(dimension) {
  if (dimension_ < 1) {
    fail(errc::precondition, "embedder dimension must be positive");
  }
}

std::vector<double> HashedBagEmbedder::embed(const std::string& text) {
  std::vector<double> v(static_cast<std::size_t>(dimension_), 0.0);
  auto is_token_char = [](unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
  };
  std::string token;
  auto flush = [&]() {
    if (token.empty()) return;
    const std::uint64_t h = fnv1a64_token(token);
    const auto bucket = static_cast<std::size_t>(h % static_cast<std::uint64_t>(dimension_));
    v[bucket] += (h >> 63) ? -1.0 : 1.0;
    token.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_token_char(c)) {
      token.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : text[i]);
    } else {
      flush();
    }
  }
  flush();
  l2_normalize(v);
  return v;
}

HttpEmbedder::HttpEmbedder(HttpEmbedderConfig config) : config_(std::move(config)) {
  if (const char* key = std::getenv(config_.api_key_env.c_str())) {
    api_key_ = key;
  }
}

std::vector<double> HttpEmbedder::embed(const std::string& text) {
  httplib::Headers headers;
  if (!api_key_.empty()) {
    headers.emplace("Authorization", "Bearer " + api_key_);
  }
  const std::string payload = json{{"input", text}}.dump();

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
    httplib::Result res = client.Post(config_.path, headers, payload, "application/json");
    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      fail(errc::backend_error,
           "embedding request failed with HTTP " + std::to_string(res->status));
    }
    json doc = json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("embedding") || !doc["embedding"].is_array()) {
      fail(errc::backend_error, "embedding response missing \"embedding\" array");
    }
    std::vector<double> v = doc["embedding"].get<std::vector<double>>();
    if (v.size() != static_cast<std::size_t>(config_.dimension)) {
      fail(errc::dimension_mismatch, "embedding endpoint returned dimension " +
                                         std::to_string(v.size()) + ", expected " +
                                         std::to_string(config_.dimension));
    }
    l2_normalize(v);
    return v;
  }
  fail(errc::backend_error, "embedding request failed after " +
                                std::to_string(config_.max_retries + 1) + " attempts (" +
                                last_failure + ")");
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    fail(errc::dimension_mismatch, "cosine over vectors of size " + std::to_string(a.size()) +
                                       " and " + std::to_string(b.size()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return std::clamp(dot, -1.0, 1.0);
}

MemoryStore::MemoryStore(std::filesystem::path directory, int dimension)
    : directory_(std::move(directory)), dimension_(dimension) {
  std::filesystem::create_directories(directory_);
  load_file(MemoryKind::broad);
  load_file(MemoryKind::detailed);
}

std::filesystem::path MemoryStore::file_for(MemoryKind kind) const {
  return directory_ / (kind == MemoryKind::broad ? "broad_instruct.jsonl"
                                                 : "detailed_instruct.jsonl");
}

void MemoryStore::load_file(MemoryKind kind) {
  std::ifstream in(file_for(kind), std::ios::binary);
  if (!in) return;  // nothing persisted yet
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded()) {
      fail(errc::io_error, file_for(kind).string() + ":" + std::to_string(line_no) +
                               ": not valid JSON");
    }
    MemoryEntry entry;
    entry.id = doc.at("id").get<std::string>();
    entry.kind = kind;
    entry.text = doc.at("text").get<std::string>();
    entry.embedding = doc.at("embedding").get<std::vector<double>>();
    entry.source_task = doc.value("source_task", "");
    entry.created_at = doc.value("created_at", "");
    if (entry.embedding.size() != static_cast<std::size_t>(dimension_)) {
      fail(errc::dimension_mismatch, file_for(kind).string() + ":" + std::to_string(line_no) +
                                         ": embedding dimension " +
                                         std::to_string(entry.embedding.size()) +
                                         ", store expects " + std::to_string(dimension_));
    }
    entries_.push_back(std::move(entry));
  }
}

void MemoryStore::insert(const MemoryEntry& entry) {
  if (entry.text.empty()) {
    fail(errc::precondition, "memory entry text must be non-empty");
  }
  if (entry.embedding.size() != static_cast<std::size_t>(dimension_)) {
    fail(errc::dimension_mismatch, "entry dimension " + std::to_string(entry.embedding.size()) +
                                       ", store expects " + std::to_string(dimension_));
  }
  double norm_sq = 0.0;
  for (double x : entry.embedding) norm_sq += x * x;
  if (std::abs(std::sqrt(norm_sq) - 1.0) > 1e-6) {
    fail(errc::precondition, "entry embedding is not unit-normalized");
  }

  std::unique_lock lock(mutex_);
  for (const MemoryEntry& existing : entries_) {
    if (existing.id == entry.id) {
      fail(errc::duplicate_id, "memory already contains id \"" + entry.id + "\"");
    }
  }

  json doc;
  doc["id"] = entry.id;
  doc["kind"] = memory_kind_name(entry.kind);
  doc["text"] = entry.text;
  doc["embedding"] = entry.embedding;
  doc["source_task"] = entry.source_task;
  doc["created_at"] = entry.created_at;
  std::ofstream out(file_for(entry.kind), std::ios::binary | std::ios::app);
  if (!out) {
    fail(errc::io_error, "cannot append to " + file_for(entry.kind).string());
  }
  out << doc.dump() << "\n";
  out.flush();
  entries_.push_back(entry);
}

bool MemoryStore::contains(const std::string& id) const {
  std::shared_lock lock(mutex_);
  return std::any_of(entries_.begin(), entries_.end(),
                     [&id](const MemoryEntry& e) { return e.id == id; });
}

std::vector<std::pair<MemoryEntry, double>> MemoryStore::top_k(std::span<const double> query,
                                                               MemoryKind kind, int k) const {
  if (query.size() != static_cast<std::size_t>(dimension_)) {
    fail(errc::dimension_mismatch, "query dimension " + std::to_string(query.size()) +
                                       ", store expects " + std::to_string(dimension_));
  }
  if (k < 1) {
    fail(errc::precondition, "k must be at least 1");
  }
  std::shared_lock lock(mutex_);
  std::vector<std::pair<MemoryEntry, double>> scored;
  for (const MemoryEntry& entry : entries_) {
    if (entry.kind != kind) continue;
    scored.emplace_back(entry, cosine_similarity(query, entry.embedding));
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first.id < b.first.id;
  });
  if (scored.size() > static_cast<std::size_t>(k)) {
    scored.resize(static_cast<std::size_t>(k));
  }
  return scored;
}

std::size_t MemoryStore::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::size_t MemoryStore::size(MemoryKind kind) const {
  std::shared_lock lock(mutex_);
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(),
                    [kind](const MemoryEntry& e) { return e.kind == kind; }));
}

RefineResult refine_with_memory(const Task& task, LlmBackend& backend,
                                EmbeddingBackend& embedder, const MemoryStore& store,
                                MemoryKind kind, const RetrievalConfig& config,
                                const CompletionParams& params,
                                const std::optional<std::string>& context) {
  if (embedder.dimension() != store.dimension()) {
    fail(errc::dimension_mismatch, "embedder dimension " + std::to_string(embedder.dimension()) +
                                       " does not match store dimension " +
                                       std::to_string(store.dimension()));
  }
  CompletionParams single = params;
  single.sample_count = 1;

  RefineResult result;
  std::string current =
      backend
          .complete({{Role::user, prompts::build_refine_opening_prompt(task, kind, context)}},
                    single)
          .front();
  result.iterations = 1;
  result.trace.push_back({current, -1.0, {}});

  if (store.size(kind) == 0) {
    result.text = current;
    result.empty_store_fallback = true;
    return result;
  }

  std::vector<double> current_embedding = embedder.embed(current);
  while (result.iterations < config.max_refine_iters) {
    const auto neighbours = store.top_k(current_embedding, kind, config.k);
    std::vector<std::string> texts;
    std::vector<std::string> ids;
    for (const auto& [entry, similarity] : neighbours) {
      texts.push_back(entry.text);
      ids.push_back(entry.id);
    }
    const std::string next =
        backend
            .complete({{Role::user, prompts::build_refine_iteration_prompt(
                                        task, kind, current, texts, context)}},
                      single)
            .front();
    std::vector<double> next_embedding = embedder.embed(next);
    const double similarity = cosine_similarity(current_embedding, next_embedding);
    ++result.iterations;
    result.trace.push_back({next, similarity, std::move(ids)});
    current = next;
    current_embedding = std::move(next_embedding);
    if (similarity >= config.convergence_threshold) {
      result.converged = true;
      break;
    }
  }
  result.text = current;
  return result;
}

void record_solution(const Task& task, const std::string& broad, const std::string& detailed,
                     EmbeddingBackend& embedder, MemoryStore& store) {
  const std::string stamp = now_iso8601();
  std::vector<double> broad_embedding = embedder.embed(broad);
  std::vector<double> detailed_embedding = embedder.embed(detailed);
  MemoryEntry broad_entry{task.id + "/broad", MemoryKind::broad, broad,
                          std::move(broad_embedding), task.id, stamp};
  MemoryEntry detailed_entry{task.id + "/detailed", MemoryKind::detailed, detailed,
                             std::move(detailed_embedding), task.id, stamp};
  store.insert(broad_entry);
  store.insert(detailed_entry);
}

}  // namespace arc
