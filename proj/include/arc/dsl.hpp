#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "arc/grid.hpp"
#include "arc/grid_views.hpp"
#include "arc/task.hpp"

namespace arc {

// Line-oriented instruction language. One primitive per line, named
// arguments, '#' starts a comment:
//
//   rotate quarter_turns=<0-3>
//   reflect axis=<horizontal|vertical|main-diagonal|anti-diagonal>
//   shift_object selector=<SELECTOR> dr=<int> dc=<int>
//   recolor map=<v:v[,v:v...]>
//   scatter_to_corners selector=<SELECTOR>
//   subsample row_offset=<int> row_stride=<int> col_offset=<int> col_stride=<int>
//   crop_bbox selector=<SELECTOR>
//   tile_pattern out_rows=<int> out_cols=<int>
//   combine_segments axis=<row|column> separator=<index:<int>|value:<0-9>>
//                    rule=<nonzero-union|priority:<v[,v...]>|overlap-new:<0-9>>
//   emit_fixed grid=<[[...],[...]] with no spaces>
//
//   SELECTOR := largest | smallest | nth-in-order(<n>) | by-value(<0-9>)
//
// Selectors pick a component from extract_objects on the current grid under
// the SegmentationConfig the interpreter was given; chained primitives see
// the evolving grid, not the original input.

enum class ReflectAxis { horizontal, vertical, main_diagonal, anti_diagonal };

struct Selector {
  enum class Kind { largest, smallest, nth_in_order, by_value };
  Kind kind = Kind::largest;
  int n = 0;            // 1-based, nth_in_order only
  CellValue value = 0;  // by_value only

  friend bool operator==(const Selector&, const Selector&) = default;
};

struct RotateOp {
  int quarter_turns;
  friend bool operator==(const RotateOp&, const RotateOp&) = default;
};

struct ReflectOp {
  ReflectAxis axis;
  friend bool operator==(const ReflectOp&, const ReflectOp&) = default;
};

struct ShiftObjectOp {
  Selector selector;
  int dr;
  int dc;
  friend bool operator==(const ShiftObjectOp&, const ShiftObjectOp&) = default;
};

struct RecolorOp {
  // Partial map, sorted by source value, each source listed once.
  std::vector<std::pair<CellValue, CellValue>> mapping;
  friend bool operator==(const RecolorOp&, const RecolorOp&) = default;
};

struct ScatterToCornersOp {
  Selector selector;
  friend bool operator==(const ScatterToCornersOp&, const ScatterToCornersOp&) = default;
};

struct SubsampleOp {
  int row_offset;
  int row_stride;
  int col_offset;
  int col_stride;
  friend bool operator==(const SubsampleOp&, const SubsampleOp&) = default;
};

struct CropBboxOp {
  Selector selector;
  friend bool operator==(const CropBboxOp&, const CropBboxOp&) = default;
};

struct TilePatternOp {
  int out_rows;
  int out_cols;
  friend bool operator==(const TilePatternOp&, const TilePatternOp&) = default;
};

struct CombineRule {
  enum class Kind { nonzero_union, priority, overlap_new };
  Kind kind = Kind::nonzero_union;
  std::vector<CellValue> priority;  // priority only
  CellValue overlap_value = 0;      // overlap_new only

  friend bool operator==(const CombineRule&, const CombineRule&) = default;
};

struct CombineSegmentsOp {
  Axis axis;
  Separator::Kind separator_kind;
  int separator_index;
  CellValue separator_value;
  CombineRule rule;
  friend bool operator==(const CombineSegmentsOp&, const CombineSegmentsOp&) = default;
};

struct EmitFixedOp {
  Grid grid;
  friend bool operator==(const EmitFixedOp&, const EmitFixedOp&) = default;
};

using Primitive =
    std::variant<RotateOp, ReflectOp, ShiftObjectOp, RecolorOp, ScatterToCornersOp,
                 SubsampleOp, CropBboxOp, TilePatternOp, CombineSegmentsOp, EmitFixedOp>;

struct Instruction {
  std::vector<Primitive> steps;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

// Errors: unknown_primitive, bad_arity, bad_argument_type, empty_program.
Instruction parse_instruction(std::string_view text);

// Canonical printer; parse(print(i)) == i and print(parse(t)) is idempotent.
std::string print_instruction(const Instruction& instruction);

Grid apply_primitive(const Primitive& primitive, const Grid& grid,
                     const SegmentationConfig& config);

// Primitives compose left to right. Errors: selector_unresolved,
// geometry_error (plus split errors from combine_segments).
Grid apply_instruction(const Instruction& instruction, const Grid& grid,
                       const SegmentationConfig& config);

struct PairOutcome {
  enum class Kind { pass, fail, error };
  Kind kind;
  std::optional<Grid> expected;
  std::optional<Grid> got;
  std::string reason;  // error outcomes only
};

struct VerificationReport {
  std::vector<PairOutcome> pairs;
  bool overall_pass = false;
};

// Applies the instruction to each pair input and compares exactly. Execution
// errors become per-pair error outcomes, never exceptions. With
// stop_on_first_failure the remaining pairs are left unevaluated but the
// failing pair is still recorded.
VerificationReport verify_instruction(const Instruction& instruction,
                                      std::span<const TaskPair> pairs,
                                      const SegmentationConfig& config,
                                      bool stop_on_first_failure = false);

std::size_t primitive_count(const Instruction& instruction);

// Human/LLM-facing grammar summary, one primitive per line.
std::string grammar_help();

}  // namespace arc
