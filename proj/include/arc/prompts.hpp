#pragma once

#include <optional>
#include <string>
#include <vector>

#include "arc/llm.hpp"
#include "arc/task.hpp"

namespace arc {

// Which slice of the solving prompt's action taxonomy a specialist sees.
enum class View { object, overall, segment, generic };

const char* view_name(View view);

enum class MemoryKind { broad, detailed };

namespace prompts {

// The full solving template, from "You are given a series..." through
// "...find out the answer 'to_be_filled'.". Byte-stable.
const std::string& solving_template();

// The template without its final question block (the priors only).
const std::string& priors_section();

// One user message: solving_template + blank line + redacted task JSON.
std::vector<ChatMessage> build_naive_prompt(const Task& task);

// Stage prompts for the broad -> detailed -> apply conversation.
std::vector<ChatMessage> build_hierarchical_opening(const Task& task);
std::string detailed_steps_followup();
std::string apply_steps_followup();

// Single-pair description request (priors + that pair's JSON only).
std::string build_pair_description_prompt(const TaskPair& pair);

// Collation request over numbered descriptions.
std::string build_collation_prompt(const std::vector<std::string>& descriptions);

// View-specialist prompt: the template sliced down to one view's action
// section, a request to also emit a DSL program, optional extra context,
// then the redacted task JSON.
std::string build_view_prompt(const Task& task, View view, const std::string& extra_context);

// Asks the model to execute written steps on one input grid and reply with
// just the resulting array.
std::string build_apply_steps_prompt(const std::string& detailed_steps, const Grid& input);

// First-generation prompt for memory refinement, scoped to one description
// kind; context carries the broad description when refining detailed steps.
std::string build_refine_opening_prompt(const Task& task, MemoryKind kind,
                                        const std::optional<std::string>& context);

// Follow-up generation conditioned on retrieved neighbour instructions.
std::string build_refine_iteration_prompt(const Task& task, MemoryKind kind,
                                          const std::string& previous,
                                          const std::vector<std::string>& neighbours,
                                          const std::optional<std::string>& context);

}  // namespace prompts
}  // namespace arc
