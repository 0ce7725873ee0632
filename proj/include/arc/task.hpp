#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arc/grid.hpp"

namespace arc {

// One input/output example. Output is absent for unscored test inputs.
struct TaskPair {
  Grid input;
  std::optional<Grid> output;

  friend bool operator==(const TaskPair&, const TaskPair&) = default;
};

// One puzzle: training pairs (outputs always present) plus test pair(s).
struct Task {
  std::string id;
  std::vector<TaskPair> train;
  std::vector<TaskPair> test;
  // Some sources write "test" as a single object instead of a list; the
  // serializer reproduces whichever shape the source used.
  bool test_was_object = false;

  friend bool operator==(const Task&, const Task&) = default;
};

// Parses the official task JSON. Python-style single-quoted text is accepted
// and normalized; output is always emitted with double quotes.
Task parse_task(std::string_view json_text, std::string id);

// Reads one task file; the filename stem becomes the task id.
Task load_task_file(const std::filesystem::path& path);

// Canonical writer: compact, train before test, input before output. A test
// output that is absent is omitted.
std::string serialize_task(const Task& task);

// Same structure as serialize_task but every test output is replaced by the
// literal string "to_be_filled"; train pairs are untouched.
std::string redact_test_output(const Task& task);

}  // namespace arc
