#include "arc/grid_views.hpp"

#include <algorithm>

namespace arc {

bool ObjectComponent::contains_value(CellValue v) const {
  return std::any_of(cells.begin(), cells.end(),
                     [v](const GridCell& c) { return c.value == v; });
}

std::vector<ObjectComponent> extract_objects(const Grid& grid,
                                             const SegmentationConfig& config) {
  static constexpr int kOrth[4][2] = {{-1, 0}, {0, -1}, {0, 1}, {1, 0}};
  static constexpr int kDiag[4][2] = {{-1, -1}, {-1, 1}, {1, -1}, {1, 1}};

  if (config.background > kMaxCellValue) {
    fail(errc::value_out_of_range, "background value outside 0-9");
  }

  std::vector<int> label(static_cast<std::size_t>(grid.rows()) * grid.cols(), -1);
  auto idx = [&](int r, int c) { return static_cast<std::size_t>(r) * grid.cols() + c; };

  std::vector<ObjectComponent> components;
  std::vector<std::pair<int, int>> frontier;
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c) {
      if (grid.at(r, c) == config.background || label[idx(r, c)] >= 0) continue;
      const int id = static_cast<int>(components.size());
      ObjectComponent comp{{}, {r, c, r, c}};
      frontier.clear();
      frontier.emplace_back(r, c);
      label[idx(r, c)] = id;
      while (!frontier.empty()) {
        const int cr = frontier.back().first;
        const int cc = frontier.back().second;
        frontier.pop_back();
        comp.cells.push_back({cr, cc, grid.at(cr, cc)});
        comp.bounding_box.top = std::min(comp.bounding_box.top, cr);
        comp.bounding_box.left = std::min(comp.bounding_box.left, cc);
        comp.bounding_box.bottom = std::max(comp.bounding_box.bottom, cr);
        comp.bounding_box.right = std::max(comp.bounding_box.right, cc);
        auto visit = [&](int nr, int nc) {
          if (!grid.in_bounds(nr, nc) || label[idx(nr, nc)] >= 0) return;
          const CellValue v = grid.at(nr, nc);
          if (v == config.background) return;
          if (config.grouping == Grouping::same_value && v != grid.at(cr, cc)) return;
          label[idx(nr, nc)] = id;
          frontier.emplace_back(nr, nc);
        };
        for (const auto& d : kOrth) visit(cr + d[0], cc + d[1]);
        if (config.connectivity == Connectivity::eight) {
          for (const auto& d : kDiag) visit(cr + d[0], cc + d[1]);
        }
      }
      std::sort(comp.cells.begin(), comp.cells.end(), [](const GridCell& a, const GridCell& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
      });
      components.push_back(std::move(comp));
    }
  }
  return components;
}

SymmetryReport detect_symmetries(const Grid& grid) {
  SymmetryReport report;
  report.horizontal_reflection = mirror_left_right(grid) == grid;
  report.vertical_reflection = mirror_up_down(grid) == grid;
  report.rotation_180 = rotate_cw(grid, 2) == grid;
  if (grid.rows() == grid.cols()) {
    report.main_diagonal = transpose_main(grid) == grid;
    report.anti_diagonal = transpose_anti(grid) == grid;
    report.rotation_90 = rotate90_cw(grid) == grid;
  }
  return report;
}

namespace {

Grid slice(const Grid& grid, int top, int left, int bottom, int right) {
  std::vector<CellValue> cells;
  cells.reserve(static_cast<std::size_t>(bottom - top + 1) * (right - left + 1));
  for (int r = top; r <= bottom; ++r) {
    for (int c = left; c <= right; ++c) cells.push_back(grid.at(r, c));
  }
  return Grid(bottom - top + 1, right - left + 1, std::move(cells));
}

bool line_is_constant(const Grid& grid, Axis axis, int index, CellValue value) {
  if (axis == Axis::row) {
    for (int c = 0; c < grid.cols(); ++c) {
      if (grid.at(index, c) != value) return false;
    }
  } else {
    for (int r = 0; r < grid.rows(); ++r) {
      if (grid.at(r, index) != value) return false;
    }
  }
  return true;
}

}  // namespace

SegmentSplit split_segments(const Grid& grid, Axis axis, const Separator& separator) {
  const int extent = axis == Axis::row ? grid.rows() : grid.cols();

  int line = -1;
  if (separator.kind == Separator::Kind::index) {
    if (separator.index < 1 || separator.index >= extent) {
      fail(errc::out_of_bounds, "separator index " + std::to_string(separator.index) +
                                    " not strictly inside extent " + std::to_string(extent));
    }
    line = separator.index;
  } else {
    for (int i = 0; i < extent; ++i) {
      if (line_is_constant(grid, axis, i, separator.value)) {
        line = i;
        break;
      }
    }
    if (line < 0) {
      fail(errc::no_such_separator, "no constant " + std::to_string(int(separator.value)) +
                                        (axis == Axis::row ? " row" : " column"));
    }
    if (line == 0 || line == extent - 1) {
      fail(errc::no_such_separator, "separator line at the grid edge leaves an empty part");
    }
  }

  // Index mode cuts between lines; value mode removes the separator line.
  const int first_end = line - 1;
  const int second_begin = separator.kind == Separator::Kind::index ? line : line + 1;

  Grid first = axis == Axis::row ? slice(grid, 0, 0, first_end, grid.cols() - 1)
                                 : slice(grid, 0, 0, grid.rows() - 1, first_end);
  Grid second = axis == Axis::row
                    ? slice(grid, second_begin, 0, grid.rows() - 1, grid.cols() - 1)
                    : slice(grid, 0, second_begin, grid.rows() - 1, grid.cols() - 1);
  return SegmentSplit{axis, separator.kind, line, separator.value, std::move(first),
                      std::move(second)};
}

Grid stitch_segments(const SegmentSplit& split) {
  const bool with_line = split.separator_kind == Separator::Kind::value;
  if (split.axis == Axis::row) {
    const int cols = split.first.cols();
    const int rows = split.first.rows() + split.second.rows() + (with_line ? 1 : 0);
    Grid out = Grid::filled(rows, cols, split.separator_value);
    for (int r = 0; r < split.first.rows(); ++r) {
      for (int c = 0; c < cols; ++c) out.set(r, c, split.first.at(r, c));
    }
    const int offset = split.first.rows() + (with_line ? 1 : 0);
    for (int r = 0; r < split.second.rows(); ++r) {
      for (int c = 0; c < cols; ++c) out.set(offset + r, c, split.second.at(r, c));
    }
    return out;
  }
  const int rows = split.first.rows();
  const int cols = split.first.cols() + split.second.cols() + (with_line ? 1 : 0);
  Grid out = Grid::filled(rows, cols, split.separator_value);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < split.first.cols(); ++c) out.set(r, c, split.first.at(r, c));
  }
  const int offset = split.first.cols() + (with_line ? 1 : 0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < split.second.cols(); ++c) out.set(r, offset + c, split.second.at(r, c));
  }
  return out;
}

}  // namespace arc
