#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arc/dsl.hpp"
#include "arc/llm.hpp"
#include "arc/prompts.hpp"

namespace arc {

// One hypothesis out of the generate-and-filter pool.
struct Candidate {
  View view = View::generic;
  std::string broad_description;
  std::string detailed_steps;
  std::optional<Instruction> instruction;  // present when the completion carried DSL text
  int sample_index = 0;
};

struct ViewFailure {
  View view;
  std::string message;
};

struct CandidatePool {
  std::vector<Candidate> candidates;
  std::vector<ViewFailure> failures;  // views whose generation request failed
};

enum class FilterMode { dsl_executed, llm_applied, unverifiable };

const char* filter_mode_name(FilterMode mode);

struct FilterOutcome {
  Candidate candidate;
  VerificationReport report;
  FilterMode mode = FilterMode::unverifiable;
};

// Finds the last run of lines that parses as a DSL program (fenced blocks are
// scanned the same way after stripping the fence markers).
std::optional<Instruction> extract_instruction_from_text(std::string_view text);

// One specialist prompt per view, sample_count samples each; pool size is
// |views| * sample_count. A failing view keeps the rest of the pool.
CandidatePool generate_candidates(const Task& task, LlmBackend& backend,
                                  const CompletionParams& params,
                                  const std::vector<View>& views,
                                  const std::string& extra_context = {});

// Candidates with instructions are executed against every training pair;
// the rest are checked by asking the backend to apply their steps (pass a
// null backend to mark those unverifiable). Any mismatch discards the
// candidate; an unparseable check marks it unverifiable.
std::vector<FilterOutcome> filter_candidates(std::span<const Candidate> pool,
                                             std::span<const TaskPair> train_pairs,
                                             LlmBackend* backend,
                                             const SegmentationConfig& config,
                                             const CompletionParams& params);

// Deterministic pick among passing outcomes: dsl-executed before llm-applied,
// then fewest primitives, shortest steps text, lowest sample index, view
// order. Throws no_survivor when nothing passed.
const FilterOutcome& select_best(std::span<const FilterOutcome> outcomes);

}  // namespace arc
