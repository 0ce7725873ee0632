#include "arc/grid.hpp"

#include <sstream>

namespace arc {

Grid::Grid(int rows, int cols, std::vector<CellValue> cells)
    : rows_(rows), cols_(cols), cells_(std::move(cells)) {
  if (rows_ < 1 || cols_ < 1) {
    fail(errc::empty_grid, "grid dimensions must be at least 1x1");
  }
  if (cells_.size() != static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_)) {
    fail(errc::ragged_grid, "cell count does not match rows*cols");
  }
  for (CellValue v : cells_) {
    if (v > kMaxCellValue) {
      fail(errc::value_out_of_range, "cell value " + std::to_string(int(v)) + " outside 0-9");
    }
  }
}

Grid Grid::filled(int rows, int cols, CellValue value) {
  return Grid(rows, cols,
              std::vector<CellValue>(static_cast<std::size_t>(rows) * cols, value));
}

std::size_t Grid::index(int r, int c) const {
  if (!in_bounds(r, c)) {
    fail(errc::out_of_bounds, "cell (" + std::to_string(r) + "," + std::to_string(c) +
                                  ") outside " + std::to_string(rows_) + "x" +
                                  std::to_string(cols_) + " grid");
  }
  return static_cast<std::size_t>(r) * cols_ + c;
}

void Grid::set(int r, int c, CellValue v) {
  if (v > kMaxCellValue) {
    fail(errc::value_out_of_range, "cell value " + std::to_string(int(v)) + " outside 0-9");
  }
  cells_[index(r, c)] = v;
}

bool grids_equal(const Grid& a, const Grid& b) { return a == b; }

std::string render_grid_ascii(const Grid& grid) {
  std::string out;
  out.reserve(static_cast<std::size_t>(grid.rows()) * (grid.cols() * 2));
  for (int r = 0; r < grid.rows(); ++r) {
    if (r > 0) out.push_back('\n');
    for (int c = 0; c < grid.cols(); ++c) {
      if (c > 0) out.push_back(' ');
      out.push_back(static_cast<char>('0' + grid.at(r, c)));
    }
  }
  return out;
}

Grid parse_grid_ascii(const std::string& text) {
  std::vector<std::vector<CellValue>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    std::vector<CellValue> row;
    std::istringstream tokens(line);
    std::string tok;
    while (tokens >> tok) {
      if (tok.size() != 1 || tok[0] < '0' || tok[0] > '9') {
        fail(errc::value_out_of_range, "ascii grid token '" + tok + "' is not a digit");
      }
      row.push_back(static_cast<CellValue>(tok[0] - '0'));
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(errc::empty_grid, "ascii grid has no rows");
  const std::size_t cols = rows.front().size();
  std::vector<CellValue> cells;
  for (const auto& row : rows) {
    if (row.size() != cols) fail(errc::ragged_grid, "ascii grid rows differ in length");
    cells.insert(cells.end(), row.begin(), row.end());
  }
  return Grid(static_cast<int>(rows.size()), static_cast<int>(cols), std::move(cells));
}

std::string grid_to_json(const Grid& grid) {
  std::string out;
  out.push_back('[');
  for (int r = 0; r < grid.rows(); ++r) {
    if (r > 0) out.push_back(',');
    out.push_back('[');
    for (int c = 0; c < grid.cols(); ++c) {
      if (c > 0) out.push_back(',');
      out.push_back(static_cast<char>('0' + grid.at(r, c)));
    }
    out.push_back(']');
  }
  out.push_back(']');
  return out;
}

Grid rotate90_cw(const Grid& grid) {
  Grid out = Grid::filled(grid.cols(), grid.rows(), 0);
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c) {
      out.set(c, grid.rows() - 1 - r, grid.at(r, c));
    }
  }
  return out;
}

Grid rotate_cw(const Grid& grid, int quarter_turns) {
  Grid out = grid;
  for (int i = 0; i < ((quarter_turns % 4) + 4) % 4; ++i) out = rotate90_cw(out);
  return out;
}

Grid mirror_left_right(const Grid& grid) {
  Grid out = grid;
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c) {
      out.set(r, grid.cols() - 1 - c, grid.at(r, c));
    }
  }
  return out;
}

Grid mirror_up_down(const Grid& grid) {
  Grid out = grid;
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c) {
      out.set(grid.rows() - 1 - r, c, grid.at(r, c));
    }
  }
  return out;
}

Grid transpose_main(const Grid& grid) {
  Grid out = Grid::filled(grid.cols(), grid.rows(), 0);
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c) {
      out.set(c, r, grid.at(r, c));
    }
  }
  return out;
}

Grid transpose_anti(const Grid& grid) {
  Grid out = Grid::filled(grid.cols(), grid.rows(), 0);
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c) {
      out.set(grid.cols() - 1 - c, grid.rows() - 1 - r, grid.at(r, c));
    }
  }
  return out;
}

const char* errc_name(errc code) {
  switch (code) {
    case errc::ok: return "ok";
    case errc::malformed_json: return "malformed_json";
    case errc::schema_violation: return "schema_violation";
    case errc::value_out_of_range: return "value_out_of_range";
    case errc::ragged_grid: return "ragged_grid";
    case errc::empty_grid: return "empty_grid";
    case errc::no_such_separator: return "no_such_separator";
    case errc::out_of_bounds: return "out_of_bounds";
    case errc::unknown_primitive: return "unknown_primitive";
    case errc::bad_arity: return "bad_arity";
    case errc::bad_argument_type: return "bad_argument_type";
    case errc::empty_program: return "empty_program";
    case errc::selector_unresolved: return "selector_unresolved";
    case errc::geometry_error: return "geometry_error";
    case errc::backend_error: return "backend_error";
    case errc::dimension_mismatch: return "dimension_mismatch";
    case errc::duplicate_id: return "duplicate_id";
    case errc::no_survivor: return "no_survivor";
    case errc::dataset_not_found: return "dataset_not_found";
    case errc::io_error: return "io_error";
    case errc::precondition: return "precondition";
  }
  return "unknown";
}

}  // namespace arc
