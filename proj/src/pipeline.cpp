#include "arc/pipeline.hpp"

#include <algorithm>
#include <cctype>

namespace arc {

namespace {

bool contains_ci(std::string_view haystack, std::string_view needle) {
  auto lower = [](char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); };
  if (needle.empty() || haystack.size() < needle.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < needle.size(); ++j) {
      if (lower(haystack[i + j]) != lower(needle[j])) {
        match = false;
        break;
      }
    }
    if (match) return true;
  }
  return false;
}

struct ParsedArray {
  Grid grid;
  std::size_t begin;
  std::size_t end;
};

void skip_ws(std::string_view text, std::size_t& pos) {
  while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\n' ||
                               text[pos] == '\r')) {
    ++pos;
  }
}

// Attempts to read a nested integer array starting at text[pos] == '['.
// Returns the grid and the index one past the closing bracket, or nullopt.
std::optional<ParsedArray> try_parse_array(std::string_view text, std::size_t start) {
  std::size_t pos = start + 1;
  std::vector<std::vector<int>> rows;
  while (true) {
    skip_ws(text, pos);
    if (pos >= text.size()) return std::nullopt;
    if (text[pos] == ']') {
      ++pos;
      break;
    }
    if (text[pos] != '[') return std::nullopt;
    ++pos;
    std::vector<int> row;
    while (true) {
      skip_ws(text, pos);
      if (pos >= text.size()) return std::nullopt;
      if (text[pos] == ']') {
        ++pos;
        break;
      }
      if (!std::isdigit(static_cast<unsigned char>(text[pos]))) return std::nullopt;
      int value = 0;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        value = value * 10 + (text[pos] - '0');
        if (value > 99) return std::nullopt;
        ++pos;
      }
      row.push_back(value);
      skip_ws(text, pos);
      if (pos < text.size() && text[pos] == ',') ++pos;
    }
    if (row.empty()) return std::nullopt;
    rows.push_back(std::move(row));
    skip_ws(text, pos);
    if (pos < text.size() && text[pos] == ',') ++pos;
  }
  if (rows.empty()) return std::nullopt;
  const std::size_t cols = rows.front().size();
  std::vector<CellValue> cells;
  for (const auto& row : rows) {
    if (row.size() != cols) return std::nullopt;
    for (int v : row) {
      if (v < 0 || v > kMaxCellValue) return std::nullopt;
      cells.push_back(static_cast<CellValue>(v));
    }
  }
  return ParsedArray{Grid(static_cast<int>(rows.size()), static_cast<int>(cols), std::move(cells)),
                     start, pos};
}

// Context for an array: the same-line text before it, or the previous
// non-empty line when the array starts its own line.
std::string_view array_context(std::string_view text, std::size_t array_begin) {
  std::size_t line_start = text.rfind('\n', array_begin == 0 ? 0 : array_begin - 1);
  line_start = line_start == std::string_view::npos ? 0 : line_start + 1;
  std::string_view prefix = text.substr(line_start, array_begin - line_start);
  const bool prefix_blank =
      std::all_of(prefix.begin(), prefix.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
  if (!prefix_blank || line_start == 0) return prefix;
  std::size_t prev_end = line_start - 1;
  while (prev_end > 0 && (text[prev_end - 1] == '\r')) --prev_end;
  std::size_t prev_start = text.rfind('\n', prev_end == 0 ? 0 : prev_end - 1);
  prev_start = prev_start == std::string_view::npos ? 0 : prev_start + 1;
  return text.substr(prev_start, prev_end - prev_start);
}

bool restates_input(std::string_view context) {
  return contains_ci(context, "input") && !contains_ci(context, "output") &&
         !contains_ci(context, "answer");
}

}  // namespace

const char* flow_name(Flow flow) {
  switch (flow) {
    case Flow::naive: return "naive";
    case Flow::hierarchical: return "hierarchical";
    case Flow::pooled: return "pooled";
    case Flow::pooled_memory: return "pooled-memory";
  }
  return "naive";
}

std::optional<Flow> parse_flow(std::string_view name) {
  if (name == "naive") return Flow::naive;
  if (name == "hierarchical") return Flow::hierarchical;
  if (name == "pooled") return Flow::pooled;
  if (name == "pooled-memory" || name == "pooled+memory") return Flow::pooled_memory;
  return std::nullopt;
}

std::optional<Grid> extract_grid_from_completion(std::string_view text) {
  std::optional<Grid> last;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t open = text.find('[', pos);
    if (open == std::string_view::npos) break;
    std::size_t peek = open + 1;
    skip_ws(text, peek);
    if (peek < text.size() && text[peek] == '[') {
      if (auto parsed = try_parse_array(text, open)) {
        if (!restates_input(array_context(text, open))) {
          last = std::move(parsed->grid);
        }
        pos = parsed->end;
        continue;
      }
    }
    pos = open + 1;
  }
  return last;
}

CompletionSections split_completion_sections(std::string_view text) {
  // Locate header lines: short lines naming the broad description or the
  // step-by-step description.
  std::vector<std::pair<std::size_t, std::size_t>> lines;  // [begin, end)
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = std::min(text.find('\n', start), text.size());
    lines.emplace_back(start, end);
    if (end == text.size()) break;
    start = end + 1;
  }
  std::ptrdiff_t broad_header = -1;
  std::ptrdiff_t step_header = -1;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = text.substr(lines[i].first, lines[i].second - lines[i].first);
    if (line.size() > 120) continue;  // headers are short
    if (broad_header < 0 && contains_ci(line, "broad")) {
      broad_header = static_cast<std::ptrdiff_t>(i);
      continue;
    }
    if (step_header < 0 && broad_header >= 0 && contains_ci(line, "step")) {
      step_header = static_cast<std::ptrdiff_t>(i);
      break;
    }
  }

  auto slice = [&](std::size_t from_line, std::size_t to_line) {
    if (from_line >= lines.size()) return std::string();
    const std::size_t begin = lines[from_line].first;
    const std::size_t end = to_line < lines.size() ? lines[to_line].first : text.size();
    std::string out(text.substr(begin, end - begin));
    while (!out.empty() && (out.back() == '\n' || out.back() == '\r' || out.back() == ' ')) {
      out.pop_back();
    }
    while (!out.empty() && (out.front() == '\n' || out.front() == '\r')) {
      out.erase(out.begin());
    }
    return out;
  };

  CompletionSections sections;
  if (broad_header < 0) {
    sections.detailed = std::string(text);
    return sections;
  }
  if (step_header < 0) {
    sections.broad = slice(static_cast<std::size_t>(broad_header) + 1, lines.size());
    return sections;
  }
  sections.broad = slice(static_cast<std::size_t>(broad_header) + 1,
                         static_cast<std::size_t>(step_header));
  sections.detailed = slice(static_cast<std::size_t>(step_header) + 1, lines.size());
  return sections;
}

namespace {

// First completion that yields a grid decides the prediction.
std::optional<Grid> first_grid(const std::vector<std::string>& completions) {
  for (const std::string& text : completions) {
    if (auto grid = extract_grid_from_completion(text)) return grid;
  }
  return std::nullopt;
}

}  // namespace

SolveTranscript solve_naive(const Task& task, LlmBackend& backend,
                            const CompletionParams& params) {
  SolveTranscript transcript;
  transcript.flow = Flow::naive;
  transcript.raw_completions = backend.complete(prompts::build_naive_prompt(task), params);
  const CompletionSections sections =
      split_completion_sections(transcript.raw_completions.front());
  transcript.broad_description = sections.broad;
  transcript.detailed_steps = sections.detailed;
  transcript.predicted_output = first_grid(transcript.raw_completions);
  if (!transcript.predicted_output) {
    transcript.warnings.push_back("no grid found in completion");
  }
  return transcript;
}

SolveTranscript solve_hierarchical(const Task& task, LlmBackend& backend,
                                   const CompletionParams& params) {
  SolveTranscript transcript;
  transcript.flow = Flow::hierarchical;

  CompletionParams single = params;
  single.sample_count = 1;

  std::vector<ChatMessage> conversation = prompts::build_hierarchical_opening(task);
  const std::string broad = backend.complete(conversation, single).front();
  transcript.broad_description = broad;
  transcript.raw_completions.push_back(broad);
  conversation.push_back({Role::assistant, broad});

  conversation.push_back({Role::user, prompts::detailed_steps_followup()});
  const std::string steps = backend.complete(conversation, single).front();
  transcript.detailed_steps = steps;
  transcript.raw_completions.push_back(steps);
  const bool steps_empty =
      std::all_of(steps.begin(), steps.end(), [](unsigned char c) { return std::isspace(c); });
  if (steps_empty) {
    // Continue on the broad description alone.
    conversation.pop_back();
    transcript.warnings.push_back("detailed steps exchange returned no content");
  } else {
    conversation.push_back({Role::assistant, steps});
  }

  conversation.push_back({Role::user, prompts::apply_steps_followup()});
  const std::vector<std::string> answers = backend.complete(conversation, params);
  transcript.raw_completions.insert(transcript.raw_completions.end(), answers.begin(),
                                    answers.end());
  transcript.predicted_output = first_grid(answers);
  if (!transcript.predicted_output) {
    transcript.warnings.push_back("no grid found in apply exchange");
  }
  return transcript;
}

std::string describe_pair(const TaskPair& pair, LlmBackend& backend,
                          const CompletionParams& params) {
  if (!pair.output) {
    fail(errc::precondition, "describe_pair requires a pair with an output");
  }
  CompletionParams single = params;
  single.sample_count = 1;
  return backend
      .complete({{Role::user, prompts::build_pair_description_prompt(pair)}}, single)
      .front();
}

std::string collate_descriptions(const std::vector<std::string>& descriptions,
                                 LlmBackend& backend, const CompletionParams& params) {
  if (descriptions.empty()) {
    fail(errc::precondition, "collate_descriptions requires at least one description");
  }
  CompletionParams single = params;
  single.sample_count = 1;
  return backend
      .complete({{Role::user, prompts::build_collation_prompt(descriptions)}}, single)
      .front();
}

}  // namespace arc
