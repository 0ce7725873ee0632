#include "arc/candidates.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

#include "arc/pipeline.hpp"

namespace arc {

namespace {

std::string_view rstrip(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  return s;
}

bool line_parses_alone(std::string_view line) {
  try {
    parse_instruction(line);
    return true;
  } catch (const error&) {
    return false;
  }
}

}  // namespace

const char* filter_mode_name(FilterMode mode) {
  switch (mode) {
    case FilterMode::dsl_executed: return "dsl-executed";
    case FilterMode::llm_applied: return "llm-applied";
    case FilterMode::unverifiable: return "unverifiable";
  }
  return "unverifiable";
}

std::optional<Instruction> extract_instruction_from_text(std::string_view text) {
  // Split into lines, dropping fence markers so fenced and bare programs look
  // the same.
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = rstrip(text.substr(pos, end - pos));
    if (!line.starts_with("```")) {
      lines.push_back(line);
    }
    if (end == text.size()) break;
    pos = end + 1;
  }

  // Maximal contiguous runs of parseable primitive lines; the last run wins.
  std::optional<Instruction> found;
  std::string run;
  int run_lines = 0;
  auto flush = [&]() {
    if (run_lines > 0) {
      try {
        found = parse_instruction(run);
      } catch (const error&) {
      }
    }
    run.clear();
    run_lines = 0;
  };
  for (std::string_view line : lines) {
    if (!line.empty() && line_parses_alone(line)) {
      if (run_lines > 0) run.push_back('\n');
      run += std::string(line);
      ++run_lines;
    } else {
      flush();
    }
  }
  flush();
  return found;
}

CandidatePool generate_candidates(const Task& task, LlmBackend& backend,
                                  const CompletionParams& params,
                                  const std::vector<View>& views,
                                  const std::string& extra_context) {
  if (views.empty()) {
    fail(errc::precondition, "generate_candidates requires at least one view");
  }
  CandidatePool pool;
  for (View view : views) {
    std::vector<std::string> completions;
    try {
      completions = backend.complete(
          {{Role::user, prompts::build_view_prompt(task, view, extra_context)}}, params);
    } catch (const error& e) {
      pool.failures.push_back({view, e.what()});
      continue;
    }
    for (std::size_t i = 0; i < completions.size(); ++i) {
      Candidate candidate;
      candidate.view = view;
      candidate.sample_index = static_cast<int>(i);
      const CompletionSections sections = split_completion_sections(completions[i]);
      candidate.broad_description = sections.broad;
      candidate.detailed_steps = sections.detailed.empty() ? completions[i] : sections.detailed;
      candidate.instruction = extract_instruction_from_text(completions[i]);
      pool.candidates.push_back(std::move(candidate));
    }
  }
  return pool;
}

namespace {

// LLM-applied check: ask the backend to run the steps on each training input
// and compare the parsed reply.
FilterOutcome check_via_llm(const Candidate& candidate, std::span<const TaskPair> train_pairs,
                            LlmBackend* backend, const CompletionParams& params) {
  FilterOutcome outcome{candidate, {}, FilterMode::llm_applied};
  outcome.report.overall_pass = true;
  if (backend == nullptr) {
    outcome.mode = FilterMode::unverifiable;
    outcome.report.overall_pass = false;
    return outcome;
  }
  CompletionParams single = params;
  single.sample_count = 1;
  for (const TaskPair& pair : train_pairs) {
    PairOutcome po{PairOutcome::Kind::pass, std::nullopt, std::nullopt, {}};
    std::optional<Grid> got;
    try {
      const std::string reply =
          backend
              ->complete({{Role::user, prompts::build_apply_steps_prompt(
                                           candidate.detailed_steps, pair.input)}},
                         single)
              .front();
      got = extract_grid_from_completion(reply);
    } catch (const error& e) {
      po.kind = PairOutcome::Kind::error;
      po.reason = e.what();
    }
    if (po.kind != PairOutcome::Kind::error) {
      if (!got) {
        po.kind = PairOutcome::Kind::error;
        po.reason = "no grid in applied-steps reply";
        outcome.mode = FilterMode::unverifiable;
      } else if (!grids_equal(*got, *pair.output)) {
        po.kind = PairOutcome::Kind::fail;
        po.expected = *pair.output;
        po.got = std::move(*got);
      }
    } else {
      outcome.mode = FilterMode::unverifiable;
    }
    const bool ok = po.kind == PairOutcome::Kind::pass;
    outcome.report.pairs.push_back(std::move(po));
    if (!ok) {
      outcome.report.overall_pass = false;
      break;  // discarded on first failure; the failing pair stays recorded
    }
  }
  return outcome;
}

int view_rank(View view) {
  switch (view) {
    case View::object: return 0;
    case View::overall: return 1;
    case View::segment: return 2;
    case View::generic: return 3;
  }
  return 3;
}

}  // namespace

std::vector<FilterOutcome> filter_candidates(std::span<const Candidate> pool,
                                             std::span<const TaskPair> train_pairs,
                                             LlmBackend* backend,
                                             const SegmentationConfig& config,
                                             const CompletionParams& params) {
  for (const TaskPair& pair : train_pairs) {
    if (!pair.output) {
      fail(errc::precondition, "filter_candidates requires outputs on all training pairs");
    }
  }
  std::vector<FilterOutcome> outcomes;
  outcomes.reserve(pool.size());
  for (const Candidate& candidate : pool) {
    if (candidate.instruction) {
      outcomes.push_back({candidate,
                          verify_instruction(*candidate.instruction, train_pairs, config),
                          FilterMode::dsl_executed});
    } else {
      outcomes.push_back(check_via_llm(candidate, train_pairs, backend, params));
    }
  }
  return outcomes;
}

const FilterOutcome& select_best(std::span<const FilterOutcome> outcomes) {
  const FilterOutcome* best = nullptr;
  auto key = [](const FilterOutcome& o) {
    const std::size_t primitives =
        o.candidate.instruction ? primitive_count(*o.candidate.instruction)
                                : std::numeric_limits<std::size_t>::max();
    return std::tuple(o.mode == FilterMode::dsl_executed ? 0 : 1, primitives,
                      o.candidate.detailed_steps.size(), o.candidate.sample_index,
                      view_rank(o.candidate.view));
  };
  for (const FilterOutcome& outcome : outcomes) {
    if (!outcome.report.overall_pass || outcome.mode == FilterMode::unverifiable) continue;
    if (best == nullptr || key(outcome) < key(*best)) best = &outcome;
  }
  if (best == nullptr) {
    fail(errc::no_survivor, "no candidate passed all training pairs");
  }
  return *best;
}

}  // namespace arc
