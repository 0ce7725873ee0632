#pragma once

#include <vector>

#include "arc/grid.hpp"

namespace arc {

enum class Connectivity { four, eight };
enum class Grouping { same_value, any_nonbackground };

struct SegmentationConfig {
  Connectivity connectivity = Connectivity::eight;
  Grouping grouping = Grouping::any_nonbackground;
  CellValue background = kDefaultBackground;
};

struct GridCell {
  int row;
  int col;
  CellValue value;

  friend bool operator==(const GridCell&, const GridCell&) = default;
};

struct BoundingBox {
  int top;
  int left;
  int bottom;
  int right;

  int height() const noexcept { return bottom - top + 1; }
  int width() const noexcept { return right - left + 1; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// One connected component of non-background cells. Cells are sorted
// row-major; the bounding box is the tight hull.
struct ObjectComponent {
  std::vector<GridCell> cells;
  BoundingBox bounding_box;

  std::size_t size() const noexcept { return cells.size(); }
  bool contains_value(CellValue v) const;
};

// Components partition the non-background cells. Ordering is deterministic:
// by the row-major position of each component's first cell.
std::vector<ObjectComponent> extract_objects(const Grid& grid,
                                             const SegmentationConfig& config);

struct SymmetryReport {
  bool horizontal_reflection = false;  // mirror left<->right
  bool vertical_reflection = false;    // mirror top<->bottom
  bool main_diagonal = false;          // square grids only
  bool anti_diagonal = false;          // square grids only
  bool rotation_90 = false;            // square grids only
  bool rotation_180 = false;

  friend bool operator==(const SymmetryReport&, const SymmetryReport&) = default;
};

// Square-only flags are false (not an error) on non-square grids.
SymmetryReport detect_symmetries(const Grid& grid);

enum class Axis { row, column };

// A split position: either a cut index (no cells removed) or a marker value
// naming a full constant row/column that separates the parts.
struct Separator {
  enum class Kind { index, value };
  Kind kind;
  int index = 0;
  CellValue value = 0;

  static Separator at_index(int i) { return {Kind::index, i, 0}; }
  static Separator at_value(CellValue v) { return {Kind::value, 0, v}; }
};

struct SegmentSplit {
  Axis axis;
  Separator::Kind separator_kind;
  int separator_index;    // cut position, or the separator line's index
  CellValue separator_value;
  Grid first;
  Grid second;
};

SegmentSplit split_segments(const Grid& grid, Axis axis, const Separator& separator);

// Inverse of split_segments: concatenates the parts (re-inserting the
// separator line in value mode) to reproduce the source grid.
Grid stitch_segments(const SegmentSplit& split);

}  // namespace arc
