#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arc/candidates.hpp"
#include "arc/memory.hpp"
#include "arc/pipeline.hpp"

namespace arc {

struct BackendSettings {
  std::string base_url = "https://api.openai.com";
  std::string model = "gpt-4";
  std::optional<double> temperature;  // unset: 0.0 single-sample, 1.0 multi-sample
  int sample_count = 1;
  int timeout_sec = 60;
  int retries = 3;
};

struct RunConfig {
  std::filesystem::path dataset_dir;
  std::vector<std::string> task_filter;  // empty: every task in the dataset
  Flow flow = Flow::naive;
  int attempts = 1;
  BackendSettings backend;
  int concurrency = 1;
  std::filesystem::path mock_dir;    // non-empty: replay scripted transcripts
  std::filesystem::path memory_dir;  // pooled-memory store location
  std::string embedding_url;         // empty: local deterministic embedder
  std::filesystem::path output_dir = "runs";
  std::uint64_t seed = 0;
  SegmentationConfig segmentation;
  RetrievalConfig retrieval;
  int pool_sample_count = 3;  // samples per view for the candidate pool
};

// Parses the JSON form of RunConfig (the C API / CLI exchange format).
RunConfig parse_run_config_json(const std::string& json_text);
std::string run_config_to_json(const RunConfig& config);

struct TaskResult {
  std::string id;
  bool solved = false;
  int attempts_used = 0;
  std::optional<Grid> prediction;  // first test pair's scored prediction
  std::string transcript_path;
  std::int64_t wall_time_ms = 0;
  int request_count = 0;
  std::string error;  // per-task failures never abort the run
};

struct RunReport {
  RunConfig config;
  std::vector<TaskResult> results;
  int solved_count = 0;
  std::vector<std::string> warnings;
  std::string started_at;
  std::string finished_at;
};

// True iff one of the first min(attempts, |predictions|) predictions matches.
bool score_prediction(std::span<const Grid> predictions, const Grid& truth, int attempts);

// Runs the configured flow over every selected task, scores by exact match,
// writes per-task transcripts plus report.json / report.md.
RunReport run_eval(const RunConfig& config);

// Same, with an injected backend (tests use instrumented ones).
RunReport run_eval_with_backend(const RunConfig& config, LlmBackend& backend);

void emit_report(const RunReport& report, const std::filesystem::path& output_dir);
std::string report_to_json(const RunReport& report);
std::string report_to_markdown(const RunReport& report);

}  // namespace arc
