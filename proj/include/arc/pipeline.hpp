#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arc/llm.hpp"
#include "arc/prompts.hpp"
#include "arc/task.hpp"

namespace arc {

enum class Flow { naive, hierarchical, pooled, pooled_memory };

const char* flow_name(Flow flow);
std::optional<Flow> parse_flow(std::string_view name);

struct SolveTranscript {
  std::string broad_description;
  std::string detailed_steps;
  std::optional<Grid> predicted_output;
  std::vector<std::string> raw_completions;
  Flow flow = Flow::naive;
  std::vector<std::string> warnings;
};

// Last well-formed rectangular 0-9 array in the text, skipping arrays whose
// surrounding line merely restates an input. Absence is a value.
std::optional<Grid> extract_grid_from_completion(std::string_view text);

struct CompletionSections {
  std::string broad;
  std::string detailed;
};

// Splits on the model's own "broad"/"step" headers; with no headers the
// whole completion counts as detailed steps.
CompletionSections split_completion_sections(std::string_view text);

SolveTranscript solve_naive(const Task& task, LlmBackend& backend,
                            const CompletionParams& params);

SolveTranscript solve_hierarchical(const Task& task, LlmBackend& backend,
                                   const CompletionParams& params);

// One description per training pair, each from an isolated request.
std::string describe_pair(const TaskPair& pair, LlmBackend& backend,
                          const CompletionParams& params);

std::string collate_descriptions(const std::vector<std::string>& descriptions,
                                 LlmBackend& backend, const CompletionParams& params);

}  // namespace arc
