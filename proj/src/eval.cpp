#include "arc/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <thread>

#include "json.hpp"

namespace arc {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Counts requests per task so reports stay deterministic under concurrency.
class CountingBackend : public LlmBackend {
 public:
  explicit CountingBackend(LlmBackend& inner) : inner_(inner) {}

  std::vector<std::string> complete(const std::vector<ChatMessage>& messages,
                                    const CompletionParams& params) override {
    ++count_;
    return inner_.complete(messages, params);
  }

  int count() const { return count_.load(); }

 private:
  LlmBackend& inner_;
  std::atomic<int> count_{0};
};

json grid_json(const Grid& grid) {
  json rows = json::array();
  for (int r = 0; r < grid.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < grid.cols(); ++c) row.push_back(int(grid.at(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

CompletionParams completion_params(const RunConfig& config, int sample_count) {
  CompletionParams params;
  params.model_name = config.backend.model;
  params.sample_count = sample_count;
  params.temperature = config.backend.temperature
                           ? *config.backend.temperature
                           : (sample_count > 1 ? 1.0 : 0.0);
  return params;
}

// A view of the task containing a single test pair: multi-test tasks are
// solved pair by pair, since the prompt has a single answer slot.
Task single_test_view(const Task& task, std::size_t test_index) {
  Task view;
  view.id = task.id;
  view.train = task.train;
  view.test = {task.test[test_index]};
  view.test_was_object = task.test_was_object;
  return view;
}

std::vector<Grid> dedup(std::vector<Grid> grids) {
  std::vector<Grid> unique;
  for (Grid& g : grids) {
    if (std::find(unique.begin(), unique.end(), g) == unique.end()) {
      unique.push_back(std::move(g));
    }
  }
  return unique;
}

std::vector<Grid> grids_from_completions(const std::vector<std::string>& completions) {
  std::vector<Grid> grids;
  for (const std::string& text : completions) {
    if (auto grid = extract_grid_from_completion(text)) {
      grids.push_back(std::move(*grid));
    }
  }
  return dedup(std::move(grids));
}

json transcript_entry(const SolveTranscript& transcript) {
  json entry;
  entry["flow"] = flow_name(transcript.flow);
  entry["broad_description"] = transcript.broad_description;
  entry["detailed_steps"] = transcript.detailed_steps;
  entry["predicted_output"] =
      transcript.predicted_output ? grid_json(*transcript.predicted_output) : json(nullptr);
  entry["raw_completions"] = transcript.raw_completions;
  entry["warnings"] = transcript.warnings;
  return entry;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(errc::io_error, "cannot write " + path.string());
  }
  out << text;
}

void append_jsonl(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (out) out << doc.dump() << "\n";
}

struct SharedMemoryState {
  std::unique_ptr<MemoryStore> store;
  std::unique_ptr<EmbeddingBackend> embedder;
};

// Per-test-pair prediction lists for one task, plus the transcript JSON that
// gets persisted alongside.
struct TaskRun {
  std::vector<std::vector<Grid>> predictions_per_test;
  json transcript = json::object();
};

TaskRun run_pooled_flow(const Task& task, LlmBackend& backend, const RunConfig& config,
                        SharedMemoryState* memory,
                        const std::filesystem::path& task_out_dir) {
  TaskRun run;
  run.transcript["flow"] =
      flow_name(memory != nullptr ? Flow::pooled_memory : Flow::pooled);

  std::string context;
  std::string refined_broad;
  std::string refined_detailed;
  if (memory != nullptr) {
    const RefineResult broad =
        refine_with_memory(task, backend, *memory->embedder, *memory->store, MemoryKind::broad,
                           config.retrieval, completion_params(config, 1));
    const RefineResult detailed =
        refine_with_memory(task, backend, *memory->embedder, *memory->store,
                           MemoryKind::detailed, config.retrieval,
                           completion_params(config, 1), broad.text);
    refined_broad = broad.text;
    refined_detailed = detailed.text;
    context = "Memory-refined broad description:\n" + broad.text +
              "\n\nMemory-refined detailed steps:\n" + detailed.text;
    json refine;
    refine["broad"] = {{"text", broad.text},
                       {"iterations", broad.iterations},
                       {"converged", broad.converged},
                       {"empty_store_fallback", broad.empty_store_fallback}};
    refine["detailed"] = {{"text", detailed.text},
                          {"iterations", detailed.iterations},
                          {"converged", detailed.converged},
                          {"empty_store_fallback", detailed.empty_store_fallback}};
    run.transcript["memory_refinement"] = std::move(refine);
  }

  const std::vector<View> views = {View::object, View::overall, View::segment};
  json per_test = json::array();
  for (std::size_t t = 0; t < task.test.size(); ++t) {
    const Task view_task = single_test_view(task, t);
    CandidatePool pool = generate_candidates(
        view_task, backend, completion_params(config, config.pool_sample_count), views, context);
    if (memory != nullptr) {
      // The refined pair competes in the pool like any other candidate.
      Candidate seeded;
      seeded.view = View::generic;
      seeded.broad_description = refined_broad;
      seeded.detailed_steps = refined_detailed;
      seeded.instruction = extract_instruction_from_text(refined_detailed);
      seeded.sample_index = -1;
      pool.candidates.push_back(std::move(seeded));
    }

    const std::vector<FilterOutcome> outcomes =
        filter_candidates(pool.candidates, task.train, &backend, config.segmentation,
                          completion_params(config, 1));

    for (const Candidate& candidate : pool.candidates) {
      json line;
      line["view"] = view_name(candidate.view);
      line["sample_index"] = candidate.sample_index;
      line["broad_description"] = candidate.broad_description;
      line["detailed_steps"] = candidate.detailed_steps;
      line["instruction"] =
          candidate.instruction ? json(print_instruction(*candidate.instruction)) : json(nullptr);
      append_jsonl(task_out_dir / "candidates.jsonl", line);
    }
    for (const FilterOutcome& outcome : outcomes) {
      json line;
      line["view"] = view_name(outcome.candidate.view);
      line["sample_index"] = outcome.candidate.sample_index;
      line["mode"] = filter_mode_name(outcome.mode);
      line["overall_pass"] = outcome.report.overall_pass;
      json pairs = json::array();
      for (const PairOutcome& po : outcome.report.pairs) {
        pairs.push_back(po.kind == PairOutcome::Kind::pass    ? "pass"
                        : po.kind == PairOutcome::Kind::fail  ? "fail"
                                                              : "error: " + po.reason);
      }
      line["pairs"] = std::move(pairs);
      append_jsonl(task_out_dir / "outcomes.jsonl", line);
    }

    json test_entry;
    std::vector<Grid> predictions;
    std::string wb_broad = refined_broad;
    std::string wb_detailed = refined_detailed;
    try {
      const FilterOutcome& winner = select_best(outcomes);
      test_entry["winner"] = {{"view", view_name(winner.candidate.view)},
                              {"sample_index", winner.candidate.sample_index},
                              {"mode", filter_mode_name(winner.mode)}};
      if (!winner.candidate.broad_description.empty()) {
        wb_broad = winner.candidate.broad_description;
      }
      if (!winner.candidate.detailed_steps.empty()) {
        wb_detailed = winner.candidate.detailed_steps;
      }
      if (winner.candidate.instruction) {
        predictions.push_back(apply_instruction(*winner.candidate.instruction,
                                                view_task.test.front().input,
                                                config.segmentation));
      } else {
        const std::string reply =
            backend
                .complete({{Role::user,
                            prompts::build_apply_steps_prompt(winner.candidate.detailed_steps,
                                                              view_task.test.front().input)}},
                          completion_params(config, 1))
                .front();
        if (auto grid = extract_grid_from_completion(reply)) {
          predictions.push_back(std::move(*grid));
        }
      }
    } catch (const error& e) {
      if (e.code() != errc::no_survivor) throw;
      test_entry["winner"] = nullptr;
    }
    if (predictions.empty()) {
      // No surviving candidate (or it failed on the test input): fall back
      // to the naive flow's direct prediction.
      const SolveTranscript fallback =
          solve_naive(view_task, backend, completion_params(config, config.backend.sample_count));
      test_entry["naive_fallback"] = transcript_entry(fallback);
      if (fallback.predicted_output) {
        predictions.push_back(*fallback.predicted_output);
      }
      if (!fallback.broad_description.empty()) wb_broad = fallback.broad_description;
      if (!fallback.detailed_steps.empty()) wb_detailed = fallback.detailed_steps;
    }
    if (memory != nullptr) {
      test_entry["memory_writeback_broad"] = wb_broad;
      test_entry["memory_writeback_detailed"] = wb_detailed;
    }
    json preds = json::array();
    for (const Grid& g : predictions) preds.push_back(grid_json(g));
    test_entry["predictions"] = std::move(preds);
    per_test.push_back(std::move(test_entry));
    run.predictions_per_test.push_back(std::move(predictions));
  }
  run.transcript["tests"] = std::move(per_test);
  return run;
}

TaskRun run_simple_flow(const Task& task, LlmBackend& backend, const RunConfig& config) {
  TaskRun run;
  run.transcript["flow"] = flow_name(config.flow);
  json per_test = json::array();
  for (std::size_t t = 0; t < task.test.size(); ++t) {
    const Task view_task = single_test_view(task, t);
    const CompletionParams params = completion_params(config, config.backend.sample_count);
    const SolveTranscript transcript = config.flow == Flow::naive
                                           ? solve_naive(view_task, backend, params)
                                           : solve_hierarchical(view_task, backend, params);
    std::vector<Grid> predictions;
    if (config.flow == Flow::hierarchical) {
      // Apply-stage completions are the last sample_count entries.
      const std::size_t apply_begin =
          transcript.raw_completions.size() >= static_cast<std::size_t>(params.sample_count)
              ? transcript.raw_completions.size() - params.sample_count
              : 0;
      predictions = grids_from_completions(std::vector<std::string>(
          transcript.raw_completions.begin() + apply_begin, transcript.raw_completions.end()));
    } else {
      predictions = grids_from_completions(transcript.raw_completions);
    }
    per_test.push_back(transcript_entry(transcript));
    run.predictions_per_test.push_back(std::move(predictions));
  }
  run.transcript["tests"] = std::move(per_test);
  return run;
}

struct ScoredTask {
  TaskResult result;
  bool solved_all = false;
  std::string writeback_broad;
  std::string writeback_detailed;
};

ScoredTask run_one_task(const Task& task, LlmBackend& raw_backend, const RunConfig& config,
                        SharedMemoryState* memory,
                        const std::filesystem::path& output_dir) {
  const auto start = std::chrono::steady_clock::now();
  CountingBackend backend(raw_backend);
  ScoredTask scored;
  scored.result.id = task.id;

  const std::filesystem::path task_out_dir = output_dir / task.id;
  std::filesystem::create_directories(task_out_dir);

  try {
    TaskRun run;
    if (config.flow == Flow::pooled || config.flow == Flow::pooled_memory) {
      run = run_pooled_flow(task, backend, config, memory, task_out_dir);
    } else {
      run = run_simple_flow(task, backend, config);
    }

    bool all_solved = true;
    int attempts_used = 0;
    for (std::size_t t = 0; t < task.test.size(); ++t) {
      const std::optional<Grid>& truth = task.test[t].output;
      if (!truth) {
        fail(errc::precondition,
             "task " + task.id + " has no ground-truth output for test pair " +
                 std::to_string(t));
      }
      const std::vector<Grid>& predictions = run.predictions_per_test[t];
      bool pair_solved = false;
      const int usable = std::min<int>(config.attempts, static_cast<int>(predictions.size()));
      for (int i = 0; i < usable; ++i) {
        if (grids_equal(predictions[static_cast<std::size_t>(i)], *truth)) {
          pair_solved = true;
          attempts_used = std::max(attempts_used, i + 1);
          if (t == 0) scored.result.prediction = predictions[static_cast<std::size_t>(i)];
          break;
        }
      }
      if (!pair_solved) {
        all_solved = false;
        attempts_used = std::max(attempts_used, usable);
        if (t == 0 && !predictions.empty()) scored.result.prediction = predictions.front();
      }
    }
    scored.solved_all = all_solved;
    scored.result.solved = all_solved;
    scored.result.attempts_used = attempts_used;

    run.transcript["task_id"] = task.id;
    run.transcript["solved"] = all_solved;
    const std::filesystem::path transcript_path = task_out_dir / "transcript.json";
    write_text_file(transcript_path, run.transcript.dump(2) + "\n");
    scored.result.transcript_path = transcript_path.string();

    if (all_solved && config.flow == Flow::pooled_memory) {
      // Pull the write-back texts recorded by the pooled flow.
      const json& tests = run.transcript["tests"];
      if (!tests.empty() && tests.front().contains("memory_writeback_broad")) {
        scored.writeback_broad = tests.front()["memory_writeback_broad"].get<std::string>();
        scored.writeback_detailed =
            tests.front()["memory_writeback_detailed"].get<std::string>();
      }
    }
  } catch (const error& e) {
    scored.result.error = std::string(errc_name(e.code())) + ": " + e.what();
  } catch (const std::exception& e) {
    scored.result.error = e.what();
  }

  scored.result.request_count = backend.count();
  scored.result.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                   std::chrono::steady_clock::now() - start)
                                   .count();
  return scored;
}

}  // namespace

bool score_prediction(std::span<const Grid> predictions, const Grid& truth, int attempts) {
  const std::size_t usable =
      std::min(predictions.size(), static_cast<std::size_t>(std::max(attempts, 0)));
  for (std::size_t i = 0; i < usable; ++i) {
    if (grids_equal(predictions[i], truth)) return true;
  }
  return false;
}

RunReport run_eval(const RunConfig& config) {
  if (!config.mock_dir.empty()) {
    ScriptedBackend backend{config.mock_dir};
    return run_eval_with_backend(config, backend);
  }
  HttpBackendConfig http;
  http.base_url = config.backend.base_url;
  http.timeout_sec = config.backend.timeout_sec;
  http.max_retries = config.backend.retries;
  HttpBackend backend{http};
  return run_eval_with_backend(config, backend);
}

RunReport run_eval_with_backend(const RunConfig& config, LlmBackend& backend) {
  RunReport report;
  report.config = config;
  report.started_at = now_iso8601();

  if (!std::filesystem::is_directory(config.dataset_dir)) {
    fail(errc::dataset_not_found, "dataset directory " + config.dataset_dir.string() +
                                      " does not exist");
  }
  std::vector<Task> tasks;
  for (const auto& entry : std::filesystem::directory_iterator(config.dataset_dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    const std::string id = entry.path().stem().string();
    if (!config.task_filter.empty() &&
        std::find(config.task_filter.begin(), config.task_filter.end(), id) ==
            config.task_filter.end()) {
      continue;
    }
    tasks.push_back(load_task_file(entry.path()));
  }
  // Sorted-id order keeps runs reproducible and makes memory write-back
  // order well defined.
  std::sort(tasks.begin(), tasks.end(),
            [](const Task& a, const Task& b) { return a.id < b.id; });

  for (const Task& task : tasks) {
    // The official corpus caps at 30x30; anything beyond it is suspicious.
    bool oversized = false;
    auto scan = [&](const std::vector<TaskPair>& pairs) {
      for (const TaskPair& pair : pairs) {
        if (pair.input.rows() > 30 || pair.input.cols() > 30) oversized = true;
        if (pair.output && (pair.output->rows() > 30 || pair.output->cols() > 30)) {
          oversized = true;
        }
      }
    };
    scan(task.train);
    scan(task.test);
    if (oversized) {
      report.warnings.push_back("task " + task.id + " has a grid larger than 30x30");
    }
  }

  std::filesystem::create_directories(config.output_dir);

  std::vector<ScoredTask> scored(tasks.size(),
                                 ScoredTask{TaskResult{}, false, {}, {}});
  if (config.flow == Flow::pooled_memory) {
    // Sequential: write-back mutates shared memory between tasks.
    SharedMemoryState memory;
    const std::filesystem::path dir =
        config.memory_dir.empty() ? config.output_dir / "memory" : config.memory_dir;
    if (!config.embedding_url.empty()) {
      HttpEmbedderConfig embed_config;
      embed_config.base_url = config.embedding_url;
      memory.embedder = std::make_unique<HttpEmbedder>(embed_config);
    } else {
      memory.embedder = std::make_unique<HashedBagEmbedder>();
    }
    memory.store = std::make_unique<MemoryStore>(dir, memory.embedder->dimension());
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      scored[i] = run_one_task(tasks[i], backend, config, &memory, config.output_dir);
      if (scored[i].solved_all && !memory.store->contains(tasks[i].id + "/broad")) {
        const std::string broad = scored[i].writeback_broad.empty()
                                      ? "(no description recorded)"
                                      : scored[i].writeback_broad;
        const std::string detailed = scored[i].writeback_detailed.empty()
                                         ? "(no description recorded)"
                                         : scored[i].writeback_detailed;
        record_solution(tasks[i], broad, detailed, *memory.embedder, *memory.store);
      }
    }
  } else {
    const int workers = std::max(1, std::min<int>(config.concurrency,
                                                  static_cast<int>(tasks.size())));
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= tasks.size()) break;
        scored[i] = run_one_task(tasks[i], backend, config, nullptr, config.output_dir);
      }
    };
    if (workers == 1) {
      worker();
    } else {
      std::vector<std::thread> threads;
      threads.reserve(static_cast<std::size_t>(workers));
      for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
      for (std::thread& t : threads) t.join();
    }
  }

  for (ScoredTask& s : scored) {
    if (s.result.solved) ++report.solved_count;
    report.results.push_back(std::move(s.result));
  }
  report.finished_at = now_iso8601();
  emit_report(report, config.output_dir);
  return report;
}

}  // namespace arc
