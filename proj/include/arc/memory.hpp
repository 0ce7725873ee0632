#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "arc/llm.hpp"
#include "arc/prompts.hpp"
#include "arc/task.hpp"

namespace arc {

const char* memory_kind_name(MemoryKind kind);

struct MemoryEntry {
  std::string id;
  MemoryKind kind = MemoryKind::broad;
  std::string text;
  std::vector<double> embedding;  // unit L2 norm
  std::string source_task;
  std::string created_at;  // ISO-8601 UTC
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::vector<double> embed(const std::string& text) = 0;
  virtual int dimension() const = 0;
};

// Deterministic local embedder: signed hashed bag of lowercased alphanumeric
// tokens, L2-normalized. Token-free text maps to the first basis vector.
class HashedBagEmbedder : public EmbeddingBackend {
 public:
  explicit HashedBagEmbedder(int dimension = 256);
  std::vector<double> embed(const std::string& text) override;
  int dimension() const override { return dimension_; }

 private:
  int dimension_;
};

struct HttpEmbedderConfig {
  std::string base_url;
  std::string path = "/embed";
  std::string api_key_env = "ARC_EMBED_API_KEY";
  int dimension = 256;
  int timeout_sec = 30;
  int max_retries = 3;
  int initial_backoff_ms = 500;
};

// Remote endpoint: POST {"input": text} -> {"embedding": [...]}. Replies are
// L2-normalized locally.
class HttpEmbedder : public EmbeddingBackend {
 public:
  explicit HttpEmbedder(HttpEmbedderConfig config);
  std::vector<double> embed(const std::string& text) override;
  int dimension() const override { return config_.dimension; }

 private:
  HttpEmbedderConfig config_;
  std::string api_key_;
};

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Persistent instruction memory, one append-only JSON-lines file per kind
// (broad_instruct.jsonl / detailed_instruct.jsonl) under one directory.
// Single writer, concurrent readers. Retrieval is an exact linear scan.
class MemoryStore {
 public:
  MemoryStore(std::filesystem::path directory, int dimension);

  void insert(const MemoryEntry& entry);
  bool contains(const std::string& id) const;

  // Entries of the kind, sorted by descending cosine similarity, ties by
  // ascending id; at most k results.
  std::vector<std::pair<MemoryEntry, double>> top_k(std::span<const double> query,
                                                    MemoryKind kind, int k) const;

  std::size_t size() const;
  std::size_t size(MemoryKind kind) const;
  int dimension() const { return dimension_; }
  const std::filesystem::path& directory() const { return directory_; }

 private:
  std::filesystem::path file_for(MemoryKind kind) const;
  void load_file(MemoryKind kind);

  std::filesystem::path directory_;
  int dimension_;
  std::vector<MemoryEntry> entries_;
  mutable std::shared_mutex mutex_;
};

struct RetrievalConfig {
  int k = 5;
  int max_refine_iters = 3;
  double convergence_threshold = 0.98;
};

struct RefineIteration {
  std::string text;
  double similarity_to_previous = -1.0;  // -1 on the first generation
  std::vector<std::string> retrieved_ids;
};

struct RefineResult {
  std::string text;
  int iterations = 0;
  bool converged = false;
  bool empty_store_fallback = false;
  std::vector<RefineIteration> trace;
};

// Generate -> embed -> retrieve top-k -> regenerate, until successive
// descriptions' embeddings reach the convergence threshold or the iteration
// cap. An empty store returns the unconditioned description after one
// generation.
RefineResult refine_with_memory(const Task& task, LlmBackend& backend,
                                EmbeddingBackend& embedder, const MemoryStore& store,
                                MemoryKind kind, const RetrievalConfig& config,
                                const CompletionParams& params,
                                const std::optional<std::string>& context = {});

// Writes one broad and one detailed entry for a solved task, ids derived
// from the task id so a second call is rejected as a duplicate.
void record_solution(const Task& task, const std::string& broad, const std::string& detailed,
                     EmbeddingBackend& embedder, MemoryStore& store);

}  // namespace arc
