#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "arc/error.hpp"

namespace arc {

// Cell values are nominal symbols 0..9, not magnitudes.
using CellValue = std::uint8_t;
inline constexpr CellValue kMaxCellValue = 9;
inline constexpr CellValue kDefaultBackground = 0;

// Rectangular row-major grid of cell values. Immutable in spirit: mutation
// is only used while building a value, shared grids are treated as const.
class Grid {
 public:
  Grid(int rows, int cols, std::vector<CellValue> cells);

  static Grid filled(int rows, int cols, CellValue value);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }

  CellValue at(int r, int c) const { return cells_[index(r, c)]; }
  void set(int r, int c, CellValue v);

  bool in_bounds(int r, int c) const noexcept {
    return r >= 0 && r < rows_ && c >= 0 && c < cols_;
  }

  const std::vector<CellValue>& cells() const noexcept { return cells_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t index(int r, int c) const;

  int rows_;
  int cols_;
  std::vector<CellValue> cells_;
};

bool grids_equal(const Grid& a, const Grid& b);

// One text row per grid row, digits separated by single spaces.
std::string render_grid_ascii(const Grid& grid);

// Companion parser for render_grid_ascii output.
Grid parse_grid_ascii(const std::string& text);

// Compact JSON form, e.g. "[[1,2],[3,4]]".
std::string grid_to_json(const Grid& grid);

// Whole-grid isometries shared by symmetry detection and the instruction
// interpreter.
Grid rotate90_cw(const Grid& grid);
Grid rotate_cw(const Grid& grid, int quarter_turns);
Grid mirror_left_right(const Grid& grid);
Grid mirror_up_down(const Grid& grid);
Grid transpose_main(const Grid& grid);   // square grids only
Grid transpose_anti(const Grid& grid);   // square grids only

}  // namespace arc
