#include <fstream>

#include "arc/eval.hpp"
#include "json.hpp"

namespace arc {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json grid_json(const Grid& grid) {
  ordered_json rows = ordered_json::array();
  for (int r = 0; r < grid.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < grid.cols(); ++c) row.push_back(int(grid.at(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json config_json(const RunConfig& config) {
  ordered_json doc;
  doc["dataset_dir"] = config.dataset_dir.string();
  doc["tasks"] = config.task_filter;
  doc["flow"] = flow_name(config.flow);
  doc["attempts"] = config.attempts;
  doc["backend"] = ordered_json{{"base_url", config.backend.base_url},
                                {"model", config.backend.model},
                                {"temperature", config.backend.temperature
                                                    ? ordered_json(*config.backend.temperature)
                                                    : ordered_json(nullptr)},
                                {"sample_count", config.backend.sample_count},
                                {"timeout_sec", config.backend.timeout_sec},
                                {"retries", config.backend.retries}};
  doc["concurrency"] = config.concurrency;
  doc["mock_dir"] = config.mock_dir.string();
  doc["memory_dir"] = config.memory_dir.string();
  doc["embedding_url"] = config.embedding_url;
  doc["output_dir"] = config.output_dir.string();
  doc["seed"] = config.seed;
  doc["pool_sample_count"] = config.pool_sample_count;
  doc["retrieval"] = ordered_json{{"k", config.retrieval.k},
                                  {"max_refine_iters", config.retrieval.max_refine_iters},
                                  {"convergence_threshold", config.retrieval.convergence_threshold}};
  return doc;
}

// ASCII diff: expected and got side by side, mismatched cells marked.
std::string render_failure_diff(const Grid& expected, const Grid& got) {
  std::string out;
  out += "expected:\n```\n" + render_grid_ascii(expected) + "\n```\n";
  out += "got:\n```\n" + render_grid_ascii(got) + "\n```\n";
  if (expected.rows() == got.rows() && expected.cols() == got.cols()) {
    out += "diff (x = mismatch):\n```\n";
    for (int r = 0; r < expected.rows(); ++r) {
      for (int c = 0; c < expected.cols(); ++c) {
        if (c > 0) out.push_back(' ');
        out.push_back(expected.at(r, c) == got.at(r, c) ? '.' : 'x');
      }
      out.push_back('\n');
    }
    out += "```\n";
  } else {
    out += "shape mismatch: expected " + std::to_string(expected.rows()) + "x" +
           std::to_string(expected.cols()) + ", got " + std::to_string(got.rows()) + "x" +
           std::to_string(got.cols()) + "\n";
  }
  return out;
}

std::optional<Grid> truth_for(const RunConfig& config, const TaskResult& result) {
  const std::filesystem::path path = config.dataset_dir / (result.id + ".json");
  if (!std::filesystem::is_regular_file(path)) return std::nullopt;
  try {
    const Task task = load_task_file(path);
    if (!task.test.empty() && task.test.front().output) return task.test.front().output;
  } catch (const error&) {
  }
  return std::nullopt;
}

}  // namespace

std::string report_to_json(const RunReport& report) {
  ordered_json doc;
  doc["config"] = config_json(report.config);
  doc["started_at"] = report.started_at;
  doc["finished_at"] = report.finished_at;
  doc["task_count"] = report.results.size();
  doc["solved_count"] = report.solved_count;
  doc["solve_rate"] =
      report.results.empty()
          ? 0.0
          : static_cast<double>(report.solved_count) / static_cast<double>(report.results.size());
  doc["warnings"] = report.warnings;
  ordered_json tasks = ordered_json::array();
  for (const TaskResult& result : report.results) {
    ordered_json entry;
    entry["id"] = result.id;
    entry["solved"] = result.solved;
    entry["attempts_used"] = result.attempts_used;
    entry["prediction"] = result.prediction ? grid_json(*result.prediction) : ordered_json(nullptr);
    entry["transcript"] = result.transcript_path;
    entry["request_count"] = result.request_count;
    entry["wall_time_ms"] = result.wall_time_ms;
    entry["error"] = result.error;
    tasks.push_back(std::move(entry));
  }
  doc["tasks"] = std::move(tasks);
  return doc.dump(2) + "\n";
}

std::string report_to_markdown(const RunReport& report) {
  std::string out = "# Evaluation report\n\n";
  out += "- flow: " + std::string(flow_name(report.config.flow)) + "\n";
  out += "- dataset: " + report.config.dataset_dir.string() + "\n";
  out += "- attempts per test pair: " + std::to_string(report.config.attempts) + "\n";
  out += "- started: " + report.started_at + "\n";
  out += "- finished: " + report.finished_at + "\n\n";
  out += "solved " + std::to_string(report.solved_count) + "/" +
         std::to_string(report.results.size()) + "\n\n";
  if (!report.warnings.empty()) {
    out += "## Warnings\n\n";
    for (const std::string& w : report.warnings) out += "- " + w + "\n";
    out += "\n";
  }
  out += "| task | solved | attempts | requests | error |\n";
  out += "|------|--------|----------|----------|-------|\n";
  for (const TaskResult& result : report.results) {
    out += "| " + result.id + " | " + (result.solved ? "yes" : "no") + " | " +
           std::to_string(result.attempts_used) + " | " + std::to_string(result.request_count) +
           " | " + (result.error.empty() ? "-" : result.error) + " |\n";
  }
  out += "\n";
  for (const TaskResult& result : report.results) {
    if (result.solved || !result.error.empty()) continue;
    out += "## Failure: " + result.id + "\n\n";
    const std::optional<Grid> truth = truth_for(report.config, result);
    if (truth && result.prediction) {
      out += render_failure_diff(*truth, *result.prediction);
    } else if (!result.prediction) {
      out += "no prediction produced\n";
    }
    out += "\n";
  }
  return out;
}

void emit_report(const RunReport& report, const std::filesystem::path& output_dir) {
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  const auto write = [&](const char* name, const std::string& text) {
    std::ofstream out(output_dir / name, std::ios::binary);
    if (!out) {
      fail(errc::io_error, "cannot write " + (output_dir / name).string());
    }
    out << text;
    if (!out) {
      fail(errc::io_error, "failed writing " + (output_dir / name).string());
    }
  };
  write("report.json", report_to_json(report));
  write("report.md", report_to_markdown(report));
}

RunConfig parse_run_config_json(const std::string& json_text) {
  nlohmann::json doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    fail(errc::malformed_json, "run config is not a JSON object");
  }
  RunConfig config;
  if (doc.contains("dataset_dir")) config.dataset_dir = doc["dataset_dir"].get<std::string>();
  if (doc.contains("tasks")) config.task_filter = doc["tasks"].get<std::vector<std::string>>();
  if (doc.contains("flow")) {
    const auto flow = parse_flow(doc["flow"].get<std::string>());
    if (!flow) {
      fail(errc::schema_violation, "unknown flow \"" + doc["flow"].get<std::string>() + "\"");
    }
    config.flow = *flow;
  }
  if (doc.contains("attempts")) config.attempts = doc["attempts"].get<int>();
  if (doc.contains("backend")) {
    const auto& b = doc["backend"];
    if (b.contains("base_url")) config.backend.base_url = b["base_url"].get<std::string>();
    if (b.contains("model")) config.backend.model = b["model"].get<std::string>();
    if (b.contains("temperature") && !b["temperature"].is_null()) {
      config.backend.temperature = b["temperature"].get<double>();
    }
    if (b.contains("sample_count")) config.backend.sample_count = b["sample_count"].get<int>();
    if (b.contains("timeout_sec")) config.backend.timeout_sec = b["timeout_sec"].get<int>();
    if (b.contains("retries")) config.backend.retries = b["retries"].get<int>();
  }
  if (doc.contains("concurrency")) config.concurrency = doc["concurrency"].get<int>();
  if (doc.contains("mock_dir")) config.mock_dir = doc["mock_dir"].get<std::string>();
  if (doc.contains("memory_dir")) config.memory_dir = doc["memory_dir"].get<std::string>();
  if (doc.contains("embedding_url")) config.embedding_url = doc["embedding_url"].get<std::string>();
  if (doc.contains("output_dir")) config.output_dir = doc["output_dir"].get<std::string>();
  if (doc.contains("seed")) config.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("pool_sample_count")) {
    config.pool_sample_count = doc["pool_sample_count"].get<int>();
  }
  if (doc.contains("retrieval")) {
    const auto& r = doc["retrieval"];
    if (r.contains("k")) config.retrieval.k = r["k"].get<int>();
    if (r.contains("max_refine_iters")) {
      config.retrieval.max_refine_iters = r["max_refine_iters"].get<int>();
    }
    if (r.contains("convergence_threshold")) {
      config.retrieval.convergence_threshold = r["convergence_threshold"].get<double>();
    }
  }
  if (config.attempts < 1 || config.concurrency < 1 || config.backend.sample_count < 1) {
    fail(errc::precondition, "attempts, concurrency and sample_count must be at least 1");
  }
  return config;
}

std::string run_config_to_json(const RunConfig& config) {
  return config_json(config).dump(2) + "\n";
}

}  // namespace arc
