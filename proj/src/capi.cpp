#include "arc.h"

#include <cstring>
#include <string>

#include "arc/dsl.hpp"
#include "arc/eval.hpp"
#include "arc/grid_views.hpp"
#include "arc/task.hpp"
#include "json.hpp"

struct arc_task {
  arc::Task value;
};

struct arc_grid {
  arc::Grid value;
};

struct arc_instruction {
  arc::Instruction value;
};

namespace {

thread_local std::string g_last_error;

arc_status status_for(arc::errc code) {
  using arc::errc;
  switch (code) {
    case errc::ok: return ARC_OK;
    case errc::malformed_json: return ARC_ERR_MALFORMED_JSON;
    case errc::schema_violation: return ARC_ERR_SCHEMA_VIOLATION;
    case errc::value_out_of_range: return ARC_ERR_VALUE_OUT_OF_RANGE;
    case errc::ragged_grid: return ARC_ERR_RAGGED_GRID;
    case errc::empty_grid: return ARC_ERR_EMPTY_GRID;
    case errc::no_such_separator: return ARC_ERR_NO_SUCH_SEPARATOR;
    case errc::out_of_bounds: return ARC_ERR_OUT_OF_BOUNDS;
    case errc::unknown_primitive: return ARC_ERR_UNKNOWN_PRIMITIVE;
    case errc::bad_arity: return ARC_ERR_BAD_ARITY;
    case errc::bad_argument_type: return ARC_ERR_BAD_ARGUMENT_TYPE;
    case errc::empty_program: return ARC_ERR_EMPTY_PROGRAM;
    case errc::selector_unresolved: return ARC_ERR_SELECTOR_UNRESOLVED;
    case errc::geometry_error: return ARC_ERR_GEOMETRY;
    case errc::backend_error: return ARC_ERR_BACKEND;
    case errc::dimension_mismatch: return ARC_ERR_DIMENSION_MISMATCH;
    case errc::duplicate_id: return ARC_ERR_DUPLICATE_ID;
    case errc::no_survivor: return ARC_ERR_NO_SURVIVOR;
    case errc::dataset_not_found: return ARC_ERR_DATASET_NOT_FOUND;
    case errc::io_error: return ARC_ERR_IO;
    case errc::precondition: return ARC_ERR_PRECONDITION;
  }
  return ARC_ERR_UNKNOWN;
}

template <typename Fn>
arc_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return ARC_OK;
  } catch (const arc::error& e) {
    g_last_error = e.what();
    return status_for(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ARC_ERR_UNKNOWN;
  } catch (...) {
    g_last_error = "unknown failure";
    return ARC_ERR_UNKNOWN;
  }
}

arc_status invalid_argument(const char* what) {
  g_last_error = std::string("invalid argument: ") + what;
  return ARC_ERR_INVALID_ARGUMENT;
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

arc::SegmentationConfig config_from_json(const char* config_json) {
  arc::SegmentationConfig config;
  if (config_json == nullptr || *config_json == '\0') return config;
  nlohmann::json doc = nlohmann::json::parse(config_json, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    arc::fail(arc::errc::malformed_json, "segmentation config is not a JSON object");
  }
  if (doc.contains("connectivity")) {
    const int c = doc["connectivity"].get<int>();
    if (c == 4) {
      config.connectivity = arc::Connectivity::four;
    } else if (c == 8) {
      config.connectivity = arc::Connectivity::eight;
    } else {
      arc::fail(arc::errc::schema_violation, "connectivity must be 4 or 8");
    }
  }
  if (doc.contains("grouping")) {
    const std::string g = doc["grouping"].get<std::string>();
    if (g == "same-value") {
      config.grouping = arc::Grouping::same_value;
    } else if (g == "any-nonbackground") {
      config.grouping = arc::Grouping::any_nonbackground;
    } else {
      arc::fail(arc::errc::schema_violation,
                "grouping must be same-value or any-nonbackground");
    }
  }
  if (doc.contains("background")) {
    const int b = doc["background"].get<int>();
    if (b < 0 || b > arc::kMaxCellValue) {
      arc::fail(arc::errc::value_out_of_range, "background outside 0-9");
    }
    config.background = static_cast<arc::CellValue>(b);
  }
  return config;
}

nlohmann::json grid_json(const arc::Grid& grid) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < grid.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < grid.cols(); ++c) row.push_back(int(grid.at(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

extern "C" {

const char* arc_version(void) { return "0.1.0"; }

const char* arc_last_error(void) { return g_last_error.c_str(); }

void arc_string_free(char* s) { delete[] s; }

arc_status arc_task_parse(const char* json_text, const char* id, arc_task** out) {
  if (json_text == nullptr || id == nullptr || out == nullptr) {
    return invalid_argument("arc_task_parse requires json_text, id and out");
  }
  return guarded([&] { *out = new arc_task{arc::parse_task(json_text, id)}; });
}

arc_status arc_task_load_file(const char* path, arc_task** out) {
  if (path == nullptr || out == nullptr) {
    return invalid_argument("arc_task_load_file requires path and out");
  }
  return guarded([&] { *out = new arc_task{arc::load_task_file(path)}; });
}

void arc_task_free(arc_task* task) { delete task; }

arc_status arc_task_serialize(const arc_task* task, char** out_json) {
  if (task == nullptr || out_json == nullptr) {
    return invalid_argument("arc_task_serialize requires task and out_json");
  }
  return guarded([&] { *out_json = copy_string(arc::serialize_task(task->value)); });
}

arc_status arc_task_redact(const arc_task* task, char** out_json) {
  if (task == nullptr || out_json == nullptr) {
    return invalid_argument("arc_task_redact requires task and out_json");
  }
  return guarded([&] { *out_json = copy_string(arc::redact_test_output(task->value)); });
}

int arc_task_pair_count(const arc_task* task, arc_split split) {
  if (task == nullptr) return 0;
  return static_cast<int>(split == ARC_SPLIT_TRAIN ? task->value.train.size()
                                                   : task->value.test.size());
}

arc_status arc_task_grid(const arc_task* task, arc_split split, int index, arc_side side,
                         arc_grid** out) {
  if (task == nullptr || out == nullptr) {
    return invalid_argument("arc_task_grid requires task and out");
  }
  return guarded([&] {
    const auto& pairs = split == ARC_SPLIT_TRAIN ? task->value.train : task->value.test;
    if (index < 0 || static_cast<std::size_t>(index) >= pairs.size()) {
      arc::fail(arc::errc::out_of_bounds, "pair index " + std::to_string(index) +
                                              " outside 0.." + std::to_string(pairs.size()));
    }
    const arc::TaskPair& pair = pairs[static_cast<std::size_t>(index)];
    if (side == ARC_SIDE_INPUT) {
      *out = new arc_grid{pair.input};
    } else if (pair.output) {
      *out = new arc_grid{*pair.output};
    } else {
      arc::fail(arc::errc::precondition, "pair has no output");
    }
  });
}

arc_status arc_grid_from_json(const char* json_text, arc_grid** out) {
  if (json_text == nullptr || out == nullptr) {
    return invalid_argument("arc_grid_from_json requires json_text and out");
  }
  return guarded([&] {
    // Reuse the task parser's grid handling by wrapping the grid in a
    // minimal task-shaped document.
    const std::string wrapped = std::string("{\"train\":[{\"input\":") + json_text +
                                ",\"output\":[[0]]}],\"test\":[{\"input\":[[0]]}]}";
    arc::Task task = arc::parse_task(wrapped, "grid");
    *out = new arc_grid{std::move(task.train.front().input)};
  });
}

void arc_grid_free(arc_grid* grid) { delete grid; }

int arc_grid_rows(const arc_grid* grid) { return grid == nullptr ? 0 : grid->value.rows(); }

int arc_grid_cols(const arc_grid* grid) { return grid == nullptr ? 0 : grid->value.cols(); }

int arc_grid_cell(const arc_grid* grid, int row, int col) {
  if (grid == nullptr || !grid->value.in_bounds(row, col)) return -1;
  return grid->value.at(row, col);
}

int arc_grids_equal(const arc_grid* a, const arc_grid* b) {
  if (a == nullptr || b == nullptr) return 0;
  return arc::grids_equal(a->value, b->value) ? 1 : 0;
}

arc_status arc_grid_render_ascii(const arc_grid* grid, char** out_text) {
  if (grid == nullptr || out_text == nullptr) {
    return invalid_argument("arc_grid_render_ascii requires grid and out_text");
  }
  return guarded([&] { *out_text = copy_string(arc::render_grid_ascii(grid->value)); });
}

arc_status arc_grid_to_json(const arc_grid* grid, char** out_json) {
  if (grid == nullptr || out_json == nullptr) {
    return invalid_argument("arc_grid_to_json requires grid and out_json");
  }
  return guarded([&] { *out_json = copy_string(arc::grid_to_json(grid->value)); });
}

arc_status arc_grid_extract_objects(const arc_grid* grid, const char* config_json,
                                    char** out_objects_json) {
  if (grid == nullptr || out_objects_json == nullptr) {
    return invalid_argument("arc_grid_extract_objects requires grid and out_objects_json");
  }
  return guarded([&] {
    const auto components = arc::extract_objects(grid->value, config_from_json(config_json));
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& comp : components) {
      nlohmann::json cells = nlohmann::json::array();
      for (const auto& cell : comp.cells) {
        cells.push_back({{"row", cell.row}, {"col", cell.col}, {"value", int(cell.value)}});
      }
      doc.push_back({{"size", comp.size()},
                     {"bounding_box",
                      {{"top", comp.bounding_box.top},
                       {"left", comp.bounding_box.left},
                       {"bottom", comp.bounding_box.bottom},
                       {"right", comp.bounding_box.right}}},
                     {"cells", std::move(cells)}});
    }
    *out_objects_json = copy_string(doc.dump());
  });
}

arc_status arc_grid_detect_symmetries(const arc_grid* grid, char** out_report_json) {
  if (grid == nullptr || out_report_json == nullptr) {
    return invalid_argument("arc_grid_detect_symmetries requires grid and out_report_json");
  }
  return guarded([&] {
    const arc::SymmetryReport report = arc::detect_symmetries(grid->value);
    nlohmann::json doc = {{"horizontal_reflection", report.horizontal_reflection},
                          {"vertical_reflection", report.vertical_reflection},
                          {"main_diagonal", report.main_diagonal},
                          {"anti_diagonal", report.anti_diagonal},
                          {"rotation_90", report.rotation_90},
                          {"rotation_180", report.rotation_180}};
    *out_report_json = copy_string(doc.dump());
  });
}

arc_status arc_instruction_parse(const char* text, arc_instruction** out) {
  if (text == nullptr || out == nullptr) {
    return invalid_argument("arc_instruction_parse requires text and out");
  }
  return guarded([&] { *out = new arc_instruction{arc::parse_instruction(text)}; });
}

void arc_instruction_free(arc_instruction* instruction) { delete instruction; }

arc_status arc_instruction_print(const arc_instruction* instruction, char** out_text) {
  if (instruction == nullptr || out_text == nullptr) {
    return invalid_argument("arc_instruction_print requires instruction and out_text");
  }
  return guarded([&] { *out_text = copy_string(arc::print_instruction(instruction->value)); });
}

arc_status arc_instruction_apply(const arc_instruction* instruction, const arc_grid* grid,
                                 const char* config_json, arc_grid** out) {
  if (instruction == nullptr || grid == nullptr || out == nullptr) {
    return invalid_argument("arc_instruction_apply requires instruction, grid and out");
  }
  return guarded([&] {
    *out = new arc_grid{
        arc::apply_instruction(instruction->value, grid->value, config_from_json(config_json))};
  });
}

arc_status arc_instruction_verify(const arc_instruction* instruction, const arc_task* task,
                                  const char* config_json, char** out_report_json) {
  if (instruction == nullptr || task == nullptr || out_report_json == nullptr) {
    return invalid_argument("arc_instruction_verify requires instruction, task and out");
  }
  return guarded([&] {
    const arc::VerificationReport report = arc::verify_instruction(
        instruction->value, task->value.train, config_from_json(config_json));
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& outcome : report.pairs) {
      nlohmann::json entry;
      switch (outcome.kind) {
        case arc::PairOutcome::Kind::pass:
          entry["outcome"] = "pass";
          break;
        case arc::PairOutcome::Kind::fail:
          entry["outcome"] = "fail";
          entry["expected"] = grid_json(*outcome.expected);
          entry["got"] = grid_json(*outcome.got);
          break;
        case arc::PairOutcome::Kind::error:
          entry["outcome"] = "error";
          entry["reason"] = outcome.reason;
          break;
      }
      pairs.push_back(std::move(entry));
    }
    nlohmann::json doc = {{"overall_pass", report.overall_pass}, {"pairs", std::move(pairs)}};
    *out_report_json = copy_string(doc.dump());
  });
}

const char* arc_grammar_help(void) {
  static const std::string help = arc::grammar_help();
  return help.c_str();
}

arc_status arc_run_eval(const char* config_json, char** out_report_json) {
  if (config_json == nullptr || out_report_json == nullptr) {
    return invalid_argument("arc_run_eval requires config_json and out_report_json");
  }
  return guarded([&] {
    const arc::RunConfig config = arc::parse_run_config_json(config_json);
    const arc::RunReport report = arc::run_eval(config);
    *out_report_json = copy_string(arc::report_to_json(report));
  });
}

}  // extern "C"
