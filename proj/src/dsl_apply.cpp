#include <algorithm>

#include "arc/dsl.hpp"

namespace arc {

namespace {

const ObjectComponent& resolve_selector(const std::vector<ObjectComponent>& components,
                                        const Selector& selector) {
  if (components.empty()) {
    fail(errc::selector_unresolved, "grid has no objects");
  }
  switch (selector.kind) {
    case Selector::Kind::largest: {
      std::size_t best = 0;
      for (std::size_t i = 1; i < components.size(); ++i) {
        if (components[i].size() > components[best].size()) best = i;
      }
      return components[best];
    }
    case Selector::Kind::smallest: {
      std::size_t best = 0;
      for (std::size_t i = 1; i < components.size(); ++i) {
        if (components[i].size() < components[best].size()) best = i;
      }
      return components[best];
    }
    case Selector::Kind::nth_in_order: {
      if (selector.n < 1 || static_cast<std::size_t>(selector.n) > components.size()) {
        fail(errc::selector_unresolved,
             "nth-in-order(" + std::to_string(selector.n) + ") but grid has " +
                 std::to_string(components.size()) + " objects");
      }
      return components[static_cast<std::size_t>(selector.n) - 1];
    }
    case Selector::Kind::by_value: {
      for (const auto& comp : components) {
        if (comp.contains_value(selector.value)) return comp;
      }
      fail(errc::selector_unresolved,
           "no object contains value " + std::to_string(int(selector.value)));
    }
  }
  fail(errc::selector_unresolved, "unhandled selector kind");
}

struct Interpreter {
  const Grid& grid;
  const SegmentationConfig& config;

  const ObjectComponent pick(const Selector& selector) const {
    return resolve_selector(extract_objects(grid, config), selector);
  }

  Grid operator()(const RotateOp& op) const { return rotate_cw(grid, op.quarter_turns); }

  Grid operator()(const ReflectOp& op) const {
    switch (op.axis) {
      case ReflectAxis::horizontal: return mirror_left_right(grid);
      case ReflectAxis::vertical: return mirror_up_down(grid);
      case ReflectAxis::main_diagonal: return transpose_main(grid);
      case ReflectAxis::anti_diagonal: return transpose_anti(grid);
    }
    fail(errc::geometry_error, "unhandled reflect axis");
  }

  Grid operator()(const ShiftObjectOp& op) const {
    const ObjectComponent comp = pick(op.selector);
    Grid out = grid;
    for (const GridCell& cell : comp.cells) out.set(cell.row, cell.col, config.background);
    for (const GridCell& cell : comp.cells) {
      const int nr = cell.row + op.dr;
      const int nc = cell.col + op.dc;
      if (!grid.in_bounds(nr, nc)) {
        fail(errc::geometry_error, "shift moves cell (" + std::to_string(cell.row) + "," +
                                       std::to_string(cell.col) + ") outside the grid");
      }
      out.set(nr, nc, cell.value);
    }
    return out;
  }

  Grid operator()(const RecolorOp& op) const {
    Grid out = grid;
    for (int r = 0; r < grid.rows(); ++r) {
      for (int c = 0; c < grid.cols(); ++c) {
        for (const auto& [from, to] : op.mapping) {
          if (grid.at(r, c) == from) {
            out.set(r, c, to);
            break;
          }
        }
      }
    }
    return out;
  }

  // Each cell of the selected component moves to the grid corner matching its
  // quadrant within the component's bounding box, keeping its distance from
  // the box edge. The top/left half wins the middle line of odd boxes.
  Grid operator()(const ScatterToCornersOp& op) const {
    const ObjectComponent comp = pick(op.selector);
    const BoundingBox box = comp.bounding_box;
    Grid out = grid;
    for (const GridCell& cell : comp.cells) out.set(cell.row, cell.col, config.background);
    for (const GridCell& cell : comp.cells) {
      const int r_rel = cell.row - box.top;
      const int c_rel = cell.col - box.left;
      const int nr = 2 * r_rel < box.height() ? r_rel : grid.rows() - box.height() + r_rel;
      const int nc = 2 * c_rel < box.width() ? c_rel : grid.cols() - box.width() + c_rel;
      out.set(nr, nc, cell.value);
    }
    return out;
  }

  Grid operator()(const SubsampleOp& op) const {
    if (op.row_offset >= grid.rows() || op.col_offset >= grid.cols()) {
      fail(errc::geometry_error, "subsample offset outside " + std::to_string(grid.rows()) +
                                     "x" + std::to_string(grid.cols()) + " grid");
    }
    const int out_rows = (grid.rows() - op.row_offset + op.row_stride - 1) / op.row_stride;
    const int out_cols = (grid.cols() - op.col_offset + op.col_stride - 1) / op.col_stride;
    Grid out = Grid::filled(out_rows, out_cols, 0);
    for (int r = 0; r < out_rows; ++r) {
      for (int c = 0; c < out_cols; ++c) {
        out.set(r, c, grid.at(op.row_offset + r * op.row_stride, op.col_offset + c * op.col_stride));
      }
    }
    return out;
  }

  Grid operator()(const CropBboxOp& op) const {
    const ObjectComponent comp = pick(op.selector);
    const BoundingBox box = comp.bounding_box;
    Grid out = Grid::filled(box.height(), box.width(), 0);
    for (int r = 0; r < box.height(); ++r) {
      for (int c = 0; c < box.width(); ++c) {
        out.set(r, c, grid.at(box.top + r, box.left + c));
      }
    }
    return out;
  }

  Grid operator()(const TilePatternOp& op) const {
    Grid out = Grid::filled(op.out_rows, op.out_cols, 0);
    for (int r = 0; r < op.out_rows; ++r) {
      for (int c = 0; c < op.out_cols; ++c) {
        out.set(r, c, grid.at(r % grid.rows(), c % grid.cols()));
      }
    }
    return out;
  }

  Grid operator()(const CombineSegmentsOp& op) const {
    Separator sep = op.separator_kind == Separator::Kind::index
                        ? Separator::at_index(op.separator_index)
                        : Separator::at_value(op.separator_value);
    const SegmentSplit split = split_segments(grid, op.axis, sep);
    const Grid& a = split.first;
    const Grid& b = split.second;
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
      fail(errc::geometry_error, "segments have different shapes: " + std::to_string(a.rows()) +
                                     "x" + std::to_string(a.cols()) + " vs " +
                                     std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
    Grid out = a;
    for (int r = 0; r < a.rows(); ++r) {
      for (int c = 0; c < a.cols(); ++c) {
        out.set(r, c, combine_cells(a.at(r, c), b.at(r, c), op.rule));
      }
    }
    return out;
  }

  Grid operator()(const EmitFixedOp& op) const { return op.grid; }

  static CellValue combine_cells(CellValue a, CellValue b, const CombineRule& rule) {
    switch (rule.kind) {
      case CombineRule::Kind::nonzero_union:
        return a != 0 ? a : b;
      case CombineRule::Kind::priority: {
        // Listed values outrank unlisted ones; ties keep the first segment.
        auto rank = [&rule](CellValue v) {
          const auto it = std::find(rule.priority.begin(), rule.priority.end(), v);
          return it == rule.priority.end() ? rule.priority.size()
                                           : static_cast<std::size_t>(it - rule.priority.begin());
        };
        return rank(b) < rank(a) ? b : a;
      }
      case CombineRule::Kind::overlap_new:
        if (a != 0 && b != 0) return rule.overlap_value;
        return a != 0 ? a : b;
    }
    return a;
  }
};

}  // namespace

Grid apply_primitive(const Primitive& primitive, const Grid& grid,
                     const SegmentationConfig& config) {
  return std::visit(Interpreter{grid, config}, primitive);
}

Grid apply_instruction(const Instruction& instruction, const Grid& grid,
                       const SegmentationConfig& config) {
  Grid current = grid;
  for (const Primitive& step : instruction.steps) {
    current = apply_primitive(step, current, config);
  }
  return current;
}

VerificationReport verify_instruction(const Instruction& instruction,
                                      std::span<const TaskPair> pairs,
                                      const SegmentationConfig& config,
                                      bool stop_on_first_failure) {
  VerificationReport report;
  report.overall_pass = true;
  for (const TaskPair& pair : pairs) {
    if (!pair.output) {
      fail(errc::precondition, "verify_instruction requires an output on every pair");
    }
    PairOutcome outcome{PairOutcome::Kind::pass, std::nullopt, std::nullopt, {}};
    try {
      Grid got = apply_instruction(instruction, pair.input, config);
      if (!grids_equal(got, *pair.output)) {
        outcome.kind = PairOutcome::Kind::fail;
        outcome.expected = *pair.output;
        outcome.got = std::move(got);
      }
    } catch (const error& e) {
      outcome.kind = PairOutcome::Kind::error;
      outcome.expected = *pair.output;
      outcome.reason = std::string(errc_name(e.code())) + ": " + e.what();
    }
    const bool ok = outcome.kind == PairOutcome::Kind::pass;
    report.pairs.push_back(std::move(outcome));
    if (!ok) {
      report.overall_pass = false;
      if (stop_on_first_failure) break;
    }
  }
  return report;
}

}  // namespace arc
