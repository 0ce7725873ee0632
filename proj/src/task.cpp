#include "arc/task.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace arc {

namespace {

using nlohmann::json;

// Rewrites Python-style single-quoted strings into JSON double-quoted ones.
// Text inside double-quoted strings is left alone.
std::string normalize_quotes(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_double = false;
  bool in_single = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_double) {
      out.push_back(c);
      if (c == '\\' && i + 1 < text.size()) {
        out.push_back(text[++i]);
      } else if (c == '"') {
        in_double = false;
      }
    } else if (in_single) {
      if (c == '\\' && i + 1 < text.size() && text[i + 1] == '\'') {
        out.push_back('\'');
        ++i;
      } else if (c == '\'') {
        out.push_back('"');
        in_single = false;
      } else if (c == '"') {
        out.push_back('\\');
        out.push_back('"');
      } else {
        out.push_back(c);
      }
    } else if (c == '"') {
      out.push_back(c);
      in_double = true;
    } else if (c == '\'') {
      out.push_back('"');
      in_single = true;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

Grid grid_from_json(const json& value, const std::string& where) {
  if (!value.is_array()) {
    fail(errc::schema_violation, where + ": grid must be an array of arrays");
  }
  if (value.empty()) {
    fail(errc::empty_grid, where + ": grid has no rows");
  }
  std::vector<CellValue> cells;
  std::size_t cols = 0;
  for (std::size_t r = 0; r < value.size(); ++r) {
    const json& row = value[r];
    if (!row.is_array()) {
      fail(errc::schema_violation, where + ": row " + std::to_string(r) + " is not an array");
    }
    if (row.empty()) {
      fail(errc::empty_grid, where + ": row " + std::to_string(r) + " is empty");
    }
    if (r == 0) {
      cols = row.size();
    } else if (row.size() != cols) {
      fail(errc::ragged_grid, where + ": row " + std::to_string(r) + " has " +
                                  std::to_string(row.size()) + " cells, expected " +
                                  std::to_string(cols));
    }
    for (const json& cell : row) {
      if (!cell.is_number_integer()) {
        fail(errc::schema_violation, where + ": cell is not an integer");
      }
      const std::int64_t v = cell.get<std::int64_t>();
      if (v < 0 || v > kMaxCellValue) {
        fail(errc::value_out_of_range,
             where + ": cell value " + std::to_string(v) + " outside 0-9");
      }
      cells.push_back(static_cast<CellValue>(v));
    }
  }
  return Grid(static_cast<int>(value.size()), static_cast<int>(cols), std::move(cells));
}

TaskPair pair_from_json(const json& value, const std::string& where, bool output_required) {
  if (!value.is_object()) {
    fail(errc::schema_violation, where + ": pair must be an object");
  }
  if (!value.contains("input")) {
    fail(errc::schema_violation, where + ": missing \"input\"");
  }
  TaskPair pair{grid_from_json(value.at("input"), where + ".input"), std::nullopt};
  if (value.contains("output")) {
    const json& out = value.at("output");
    if (out.is_string()) {
      if (out.get<std::string>() != "to_be_filled") {
        fail(errc::schema_violation,
             where + ": string output must be the redaction marker \"to_be_filled\"");
      }
      // redacted output, leave absent
    } else {
      pair.output = grid_from_json(out, where + ".output");
    }
  }
  if (output_required && !pair.output) {
    fail(errc::schema_violation, where + ": missing \"output\"");
  }
  return pair;
}

void write_pair(std::string& out, const TaskPair& pair, bool redact_output) {
  out += "{\"input\":";
  out += grid_to_json(pair.input);
  if (redact_output) {
    out += ",\"output\":\"to_be_filled\"";
  } else if (pair.output) {
    out += ",\"output\":";
    out += grid_to_json(*pair.output);
  }
  out += "}";
}

std::string serialize_impl(const Task& task, bool redact) {
  std::string out = "{\"train\":[";
  for (std::size_t i = 0; i < task.train.size(); ++i) {
    if (i > 0) out.push_back(',');
    write_pair(out, task.train[i], false);
  }
  out += "],\"test\":";
  const bool as_object = task.test_was_object && task.test.size() == 1;
  if (!as_object) out.push_back('[');
  for (std::size_t i = 0; i < task.test.size(); ++i) {
    if (i > 0) out.push_back(',');
    write_pair(out, task.test[i], redact);
  }
  if (!as_object) out.push_back(']');
  out.push_back('}');
  return out;
}

}  // namespace

Task parse_task(std::string_view json_text, std::string id) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) {
    doc = json::parse(normalize_quotes(json_text), nullptr, false);
    if (doc.is_discarded()) {
      fail(errc::malformed_json, "task \"" + id + "\": text is not parseable JSON");
    }
  }
  if (!doc.is_object() || !doc.contains("train") || !doc.contains("test")) {
    fail(errc::schema_violation,
         "task \"" + id + "\": top level must be an object with \"train\" and \"test\"");
  }

  Task task;
  task.id = std::move(id);

  const json& train = doc.at("train");
  if (!train.is_array() || train.empty()) {
    fail(errc::schema_violation, "task \"" + task.id + "\": \"train\" must be a non-empty array");
  }
  for (std::size_t i = 0; i < train.size(); ++i) {
    task.train.push_back(pair_from_json(train[i], "train[" + std::to_string(i) + "]", true));
  }

  const json& test = doc.at("test");
  if (test.is_object()) {
    task.test_was_object = true;
    task.test.push_back(pair_from_json(test, "test", false));
  } else if (test.is_array() && !test.empty()) {
    for (std::size_t i = 0; i < test.size(); ++i) {
      task.test.push_back(pair_from_json(test[i], "test[" + std::to_string(i) + "]", false));
    }
  } else {
    fail(errc::schema_violation,
         "task \"" + task.id + "\": \"test\" must be an object or a non-empty array");
  }
  return task;
}

Task load_task_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(errc::io_error, "cannot open task file " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_task(buffer.str(), path.stem().string());
}

std::string serialize_task(const Task& task) { return serialize_impl(task, false); }

std::string redact_test_output(const Task& task) { return serialize_impl(task, true); }

}  // namespace arc
