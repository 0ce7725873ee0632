// Command-line driver over the shared C API (arc.h).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "arc.h"
#include "json.hpp"

namespace {

using nlohmann::json;

int fail_with(const char* what, arc_status status) {
  std::cerr << what << ": " << arc_last_error() << " (status " << int(status) << ")\n";
  return 2;
}

std::string take_string(char* s) {
  std::string out = s == nullptr ? "" : s;
  arc_string_free(s);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CLI::ValidationError("cannot open " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct SolveOptions {
  std::string dataset_dir;
  std::vector<std::string> task_ids;
  std::string flow = "naive";
  int attempts = 1;
  std::string backend_url;
  std::string model;
  std::string mock_dir;
  std::string memory_dir;
  std::string out_dir = "runs";
  std::uint64_t seed = 0;
  int concurrency = 1;
  std::string config_file;
};

int run_solve(const SolveOptions& options) {
  json config;
  if (!options.config_file.empty()) {
    config = json::parse(read_file(options.config_file));
  }
  config["dataset_dir"] = options.dataset_dir;
  if (!options.task_ids.empty()) config["tasks"] = options.task_ids;
  config["flow"] = options.flow;
  config["attempts"] = options.attempts;
  if (!options.backend_url.empty()) config["backend"]["base_url"] = options.backend_url;
  if (!options.model.empty()) config["backend"]["model"] = options.model;
  if (!options.mock_dir.empty()) config["mock_dir"] = options.mock_dir;
  if (!options.memory_dir.empty()) config["memory_dir"] = options.memory_dir;
  config["output_dir"] = options.out_dir;
  config["seed"] = options.seed;
  config["concurrency"] = options.concurrency;

  char* report_text = nullptr;
  const arc_status status = arc_run_eval(config.dump().c_str(), &report_text);
  if (status != ARC_OK) {
    return fail_with("run failed", status);
  }
  const json report = json::parse(take_string(report_text));
  for (const auto& task : report["tasks"]) {
    std::cout << (task["solved"].get<bool>() ? "[solved] " : "[failed] ")
              << task["id"].get<std::string>();
    const std::string error = task["error"].get<std::string>();
    if (!error.empty()) std::cout << "  (" << error << ")";
    std::cout << "\n";
  }
  std::cout << "solved " << report["solved_count"].get<int>() << "/"
            << report["task_count"].get<int>() << "\n";
  std::cout << "report written to " << options.out_dir << "/report.json\n";
  return 0;
}

int run_redact(const std::string& task_file) {
  arc_task* task = nullptr;
  arc_status status = arc_task_load_file(task_file.c_str(), &task);
  if (status != ARC_OK) return fail_with("cannot load task", status);
  char* text = nullptr;
  status = arc_task_redact(task, &text);
  arc_task_free(task);
  if (status != ARC_OK) return fail_with("cannot redact task", status);
  std::cout << take_string(text) << "\n";
  return 0;
}

int run_apply(const std::string& task_file, const std::string& program,
              const std::string& program_file, bool check_train) {
  std::string text = program;
  if (!program_file.empty()) text = read_file(program_file);
  if (text.empty()) {
    std::cerr << "no program given; use --dsl or --program-file\n";
    return 2;
  }

  arc_instruction* instruction = nullptr;
  arc_status status = arc_instruction_parse(text.c_str(), &instruction);
  if (status != ARC_OK) return fail_with("cannot parse program", status);

  arc_task* task = nullptr;
  status = arc_task_load_file(task_file.c_str(), &task);
  if (status != ARC_OK) {
    arc_instruction_free(instruction);
    return fail_with("cannot load task", status);
  }

  int exit_code = 0;
  if (check_train) {
    char* report_text = nullptr;
    status = arc_instruction_verify(instruction, task, nullptr, &report_text);
    if (status != ARC_OK) {
      exit_code = fail_with("verification failed to run", status);
    } else {
      const json report = json::parse(take_string(report_text));
      int index = 0;
      for (const auto& pair : report["pairs"]) {
        std::cout << "train pair " << index++ << ": "
                  << pair["outcome"].get<std::string>() << "\n";
      }
      std::cout << (report["overall_pass"].get<bool>() ? "all training pairs reproduced\n"
                                                       : "program rejected\n");
    }
  }
  if (exit_code == 0) {
    const int tests = arc_task_pair_count(task, ARC_SPLIT_TEST);
    for (int i = 0; i < tests && exit_code == 0; ++i) {
      arc_grid* input = nullptr;
      status = arc_task_grid(task, ARC_SPLIT_TEST, i, ARC_SIDE_INPUT, &input);
      if (status != ARC_OK) {
        exit_code = fail_with("cannot read test input", status);
        break;
      }
      arc_grid* output = nullptr;
      status = arc_instruction_apply(instruction, input, nullptr, &output);
      arc_grid_free(input);
      if (status != ARC_OK) {
        exit_code = fail_with("cannot apply program", status);
        break;
      }
      char* ascii = nullptr;
      arc_grid_render_ascii(output, &ascii);
      std::cout << "test " << i << " ->\n" << take_string(ascii) << "\n";
      arc_grid_free(output);
    }
  }
  arc_task_free(task);
  arc_instruction_free(instruction);
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ARC solving pipeline"};
  app.set_version_flag("--version", arc_version());
  app.require_subcommand(1);

  SolveOptions solve;
  CLI::App* solve_cmd = app.add_subcommand(
      "solve", "Run a solver flow over a dataset directory and score by exact match");
  solve_cmd->add_option("dataset_dir", solve.dataset_dir, "Directory of <task_id>.json files")
      ->required();
  solve_cmd->add_option("--task", solve.task_ids, "Only solve this task id (repeatable)");
  solve_cmd->add_option("--flow", solve.flow, "naive|hierarchical|pooled|pooled-memory")
      ->check(CLI::IsMember({"naive", "hierarchical", "pooled", "pooled-memory"}));
  solve_cmd->add_option("--attempts", solve.attempts, "Predictions scored per test pair")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--backend-url", solve.backend_url, "Chat-completions base URL");
  solve_cmd->add_option("--model", solve.model, "Model name");
  solve_cmd->add_option("--mock", solve.mock_dir, "Replay scripted transcripts from this dir");
  solve_cmd->add_option("--memory-dir", solve.memory_dir, "Instruction memory directory");
  solve_cmd->add_option("--out", solve.out_dir, "Output directory for transcripts and reports");
  solve_cmd->add_option("--seed", solve.seed, "Seed echoed into the report");
  solve_cmd->add_option("--concurrency", solve.concurrency, "Max tasks in flight")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--config", solve.config_file,
                        "Run-config JSON file; flags override its fields");

  std::string redact_file;
  CLI::App* redact_cmd =
      app.add_subcommand("redact", "Print a task's JSON with test outputs replaced");
  redact_cmd->add_option("task_file", redact_file, "Task JSON file")->required();

  std::string apply_file;
  std::string apply_dsl;
  std::string apply_program_file;
  bool apply_check = false;
  CLI::App* apply_cmd =
      app.add_subcommand("apply", "Run an instruction program on a task's test inputs");
  apply_cmd->add_option("task_file", apply_file, "Task JSON file")->required();
  apply_cmd->add_option("--dsl", apply_dsl, "Program text (one primitive per line)");
  apply_cmd->add_option("--program-file", apply_program_file, "File holding the program");
  apply_cmd->add_flag("--train-check", apply_check, "Verify against training pairs first");

  CLI::App* grammar_cmd = app.add_subcommand("grammar", "Print the instruction grammar");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) return run_solve(solve);
    if (redact_cmd->parsed()) return run_redact(redact_file);
    if (apply_cmd->parsed()) return run_apply(apply_file, apply_dsl, apply_program_file, apply_check);
    if (grammar_cmd->parsed()) {
      std::cout << arc_grammar_help() << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 2;
}
