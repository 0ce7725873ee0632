#include "arc/prompts.hpp"

#include "arc/dsl.hpp"

namespace arc {

const char* view_name(View view) {
  switch (view) {
    case View::object: return "object";
    case View::overall: return "overall";
    case View::segment: return "segment";
    case View::generic: return "generic";
  }
  return "generic";
}

namespace prompts {

namespace {

constexpr std::string_view kIntro =
    "You are given a series of inputs and output pairs.\n"
    "These are all in the form of a 2D array, representing a 2D grid, with values from 0-9.\n"
    "The values are not representative of any ordinal ranking.\n"
    "Input/output pairs may not reflect all possibilities, you are to infer the simplest "
    "possible relation making use of symmetry and invariance as much as possible.\n";

constexpr std::string_view kInputForms =
    "The input can be something like:\n"
    "> entire grid being the sandbox to manipulate\n"
    "> using a part of the grid (individual squares or portions of the grid) to depict "
    "instructions of how to do the task. symmetry is important.\n"
    "> using regions of similar value to depict area for answer of the task\n";

constexpr std::string_view kOutputForms =
    "The output can be something like:\n"
    "> same output size as input after performing action\n"
    "> output one of the fixed predetermined patterns used to classify the input image\n"
    "> using output to show the ordering of objects, such as by size, height, width, "
    "position, value\n";

constexpr std::string_view kActionsHeader =
    "Each of the input-output relation can be done with one or more actions chained together, "
    "which could be something like (not exhaustive):\n";

constexpr std::string_view kObjectViewBlock =
    "- object view (defined as continuous squares connected horizontally, vertically and/or "
    "diagonally, separated by 0 values)\n"
    "> objects can be of the same value, or different values combined together\n"
    "> objects may be hidden beneath other objects\n"
    "> rotating or shifting objects\n"
    "> changing value of object\n"
    "> objects can be manipulated and mapped to a different number of output squares\n"
    "> different objects may be manipulated differently based on context\n";

constexpr std::string_view kOverallViewBlock =
    "- overall view\n"
    "> rotation / reflection symmetry\n"
    "> continuation of a pattern\n"
    "> changing values\n";

constexpr std::string_view kSegmentViewBlock =
    "- segment view\n"
    "> combine two segments of the input into one single one based on a simple rule\n"
    "> rule can be certain values are prioritized over others, or combination of values "
    "into new ones\n";

constexpr std::string_view kBroadQuestion =
    "- What is the broad description of the input/output relation that holds for all "
    "input/output pairs?";

constexpr std::string_view kDetailedQuestion =
    "- What is the step by step description of the input/output relation that holds for all "
    "input/output pairs?";

constexpr std::string_view kApplyQuestion =
    "- Apply this description to the test input and find out the answer 'to_be_filled'.";

std::string make_priors() {
  std::string out;
  out += kIntro;
  out += "\n";
  out += kInputForms;
  out += "\n";
  out += kOutputForms;
  out += "\n";
  out += kActionsHeader;
  out += kObjectViewBlock;
  out += "\n";
  out += kOverallViewBlock;
  out += "\n";
  out += kSegmentViewBlock;
  return out;
}

std::string do_section(std::initializer_list<std::string_view> questions) {
  std::string out = "Do the following:";
  for (std::string_view q : questions) {
    out += "\n";
    out += q;
  }
  return out;
}

std::string numbered_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    out += std::to_string(i + 1) + ". " + items[i] + "\n";
  }
  return out;
}

}  // namespace

const std::string& solving_template() {
  static const std::string text =
      make_priors() + "\n" + do_section({kBroadQuestion, kDetailedQuestion, kApplyQuestion});
  return text;
}

const std::string& priors_section() {
  static const std::string text = make_priors();
  return text;
}

std::vector<ChatMessage> build_naive_prompt(const Task& task) {
  return {{Role::user, solving_template() + "\n\n" + redact_test_output(task)}};
}

std::vector<ChatMessage> build_hierarchical_opening(const Task& task) {
  return {{Role::user, priors_section() + "\n" + do_section({kBroadQuestion}) + "\n\n" +
                           redact_test_output(task)}};
}

std::string detailed_steps_followup() {
  return std::string("Do the following:\n") + std::string(kDetailedQuestion);
}

std::string apply_steps_followup() {
  return std::string("Do the following:\n") + std::string(kApplyQuestion) +
         "\nOutput only the final answer as a 2D array.";
}

std::string build_pair_description_prompt(const TaskPair& pair) {
  std::string json = "{\"input\":" + grid_to_json(pair.input);
  if (pair.output) {
    json += ",\"output\":" + grid_to_json(*pair.output);
  }
  json += "}";
  return priors_section() +
         "\nDescribe the input/output relation for the following single pair.\n\n" + json;
}

std::string build_collation_prompt(const std::vector<std::string>& descriptions) {
  return "You are given descriptions of several input-output pairs from the same task.\n"
         "Find similarities between each of the descriptions and collate them to one general "
         "input-output representation.\n\n" +
         numbered_list(descriptions);
}

std::string build_view_prompt(const Task& task, View view, const std::string& extra_context) {
  std::string text;
  if (view == View::generic) {
    text = solving_template();
  } else {
    text += kIntro;
    text += "\n";
    text += kInputForms;
    text += "\n";
    text += kOutputForms;
    text += "\n";
    text += kActionsHeader;
    switch (view) {
      case View::object: text += kObjectViewBlock; break;
      case View::overall: text += kOverallViewBlock; break;
      case View::segment: text += kSegmentViewBlock; break;
      case View::generic: break;
    }
    text += "\n" + do_section({kBroadQuestion, kDetailedQuestion, kApplyQuestion});
  }
  text +=
      "\n\nAfter the step by step description, also output the detailed steps as a program "
      "in the following instruction language, one instruction per line, inside a code block "
      "fenced with ```dsl:\n" +
      grammar_help();
  if (!extra_context.empty()) {
    text += "\n\n" + extra_context;
  }
  text += "\n\n" + redact_test_output(task);
  return text;
}

std::string build_apply_steps_prompt(const std::string& detailed_steps, const Grid& input) {
  return "You are given a step by step instruction for transforming a 2D grid, and one input "
         "grid.\nApply the instruction to the input and output only the resulting grid as a 2D "
         "array.\n\nInstruction:\n" +
         detailed_steps + "\n\nInput:\n" + grid_to_json(input);
}

std::string build_refine_opening_prompt(const Task& task, MemoryKind kind,
                                        const std::optional<std::string>& context) {
  std::string text = priors_section() + "\n" +
                     do_section({kind == MemoryKind::broad ? kBroadQuestion : kDetailedQuestion});
  if (context && !context->empty()) {
    text += "\n\nBroad description of the relation:\n" + *context;
  }
  text += "\n\n" + redact_test_output(task);
  return text;
}

std::string build_refine_iteration_prompt(const Task& task, MemoryKind kind,
                                          const std::string& previous,
                                          const std::vector<std::string>& neighbours,
                                          const std::optional<std::string>& context) {
  std::string text = build_refine_opening_prompt(task, kind, context);
  text += "\n\nInstructions from similar previously solved tasks:\n" + numbered_list(neighbours);
  text += "\nYour previous answer:\n" + previous;
  text +=
      "\nRefine your previous answer using the retrieved instructions where they fit this "
      "task. Output only the refined answer.";
  return text;
}

}  // namespace prompts
}  // namespace arc
