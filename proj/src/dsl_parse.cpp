#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

#include "arc/dsl.hpp"
#include "json.hpp"

namespace arc {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

struct Args {
  std::string primitive;
  int line_no;
  std::map<std::string, std::string, std::less<>> values;

  std::string where() const {
    return "line " + std::to_string(line_no) + " (" + primitive + ")";
  }

  const std::string& get(std::string_view key) const {
    auto it = values.find(key);
    if (it == values.end()) {
      fail(errc::bad_arity, where() + ": missing argument \"" + std::string(key) + "\"");
    }
    return it->second;
  }

  void expect_exactly(std::initializer_list<std::string_view> keys) const {
    for (std::string_view k : keys) get(k);
    if (values.size() != keys.size()) {
      fail(errc::bad_arity, where() + ": unexpected extra arguments");
    }
  }
};

int parse_int(const Args& args, std::string_view key, int min, int max) {
  const std::string& raw = args.get(key);
  int value = 0;
  auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
  if (ec != std::errc() || ptr != raw.data() + raw.size()) {
    fail(errc::bad_argument_type,
         args.where() + ": " + std::string(key) + "=" + raw + " is not an integer");
  }
  if (value < min || value > max) {
    fail(errc::bad_argument_type, args.where() + ": " + std::string(key) + "=" + raw +
                                      " outside [" + std::to_string(min) + "," +
                                      std::to_string(max) + "]");
  }
  return value;
}

CellValue parse_cell(const Args& args, std::string_view key, const std::string& raw) {
  if (raw.size() != 1 || raw[0] < '0' || raw[0] > '9') {
    fail(errc::bad_argument_type,
         args.where() + ": " + std::string(key) + " value \"" + raw + "\" is not a cell 0-9");
  }
  return static_cast<CellValue>(raw[0] - '0');
}

Selector parse_selector(const Args& args, const std::string& raw) {
  if (raw == "largest") return {Selector::Kind::largest, 0, 0};
  if (raw == "smallest") return {Selector::Kind::smallest, 0, 0};
  if (raw.starts_with("nth-in-order(") && raw.ends_with(")")) {
    const std::string inner = raw.substr(13, raw.size() - 14);
    int n = 0;
    auto [ptr, ec] = std::from_chars(inner.data(), inner.data() + inner.size(), n);
    if (ec != std::errc() || ptr != inner.data() + inner.size() || n < 1) {
      fail(errc::bad_argument_type,
           args.where() + ": nth-in-order index \"" + inner + "\" must be a positive integer");
    }
    return {Selector::Kind::nth_in_order, n, 0};
  }
  if (raw.starts_with("by-value(") && raw.ends_with(")")) {
    return {Selector::Kind::by_value, 0,
            parse_cell(args, "selector", raw.substr(9, raw.size() - 10))};
  }
  fail(errc::bad_argument_type, args.where() + ": unknown selector \"" + raw + "\"");
}

ReflectAxis parse_reflect_axis(const Args& args, const std::string& raw) {
  if (raw == "horizontal") return ReflectAxis::horizontal;
  if (raw == "vertical") return ReflectAxis::vertical;
  if (raw == "main-diagonal") return ReflectAxis::main_diagonal;
  if (raw == "anti-diagonal") return ReflectAxis::anti_diagonal;
  fail(errc::bad_argument_type, args.where() + ": unknown axis \"" + raw + "\"");
}

Axis parse_split_axis(const Args& args, const std::string& raw) {
  if (raw == "row") return Axis::row;
  if (raw == "column") return Axis::column;
  fail(errc::bad_argument_type, args.where() + ": axis must be row or column, got \"" + raw + "\"");
}

std::vector<CellValue> parse_cell_list(const Args& args, std::string_view key,
                                       const std::string& raw) {
  std::vector<CellValue> values;
  std::stringstream ss{raw};
  std::string item;
  while (std::getline(ss, item, ',')) {
    values.push_back(parse_cell(args, key, item));
  }
  if (values.empty()) {
    fail(errc::bad_argument_type, args.where() + ": " + std::string(key) + " list is empty");
  }
  return values;
}

Grid parse_grid_literal(const Args& args, const std::string& raw) {
  const nlohmann::json doc = nlohmann::json::parse(raw, nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) {
    fail(errc::bad_argument_type, args.where() + ": grid literal is not a nested array");
  }
  try {
    std::vector<CellValue> cells;
    std::size_t cols = 0;
    for (std::size_t r = 0; r < doc.size(); ++r) {
      const auto& row = doc[r];
      if (!row.is_array() || row.empty()) {
        fail(errc::bad_argument_type, args.where() + ": grid literal row is not a non-empty array");
      }
      if (r == 0) cols = row.size();
      if (row.size() != cols) {
        fail(errc::bad_argument_type, args.where() + ": grid literal is ragged");
      }
      for (const auto& cell : row) {
        if (!cell.is_number_integer() || cell.get<int>() < 0 || cell.get<int>() > kMaxCellValue) {
          fail(errc::bad_argument_type, args.where() + ": grid literal cell outside 0-9");
        }
        cells.push_back(static_cast<CellValue>(cell.get<int>()));
      }
    }
    if (cells.empty()) {
      fail(errc::bad_argument_type, args.where() + ": grid literal is empty");
    }
    return Grid(static_cast<int>(doc.size()), static_cast<int>(cols), std::move(cells));
  } catch (const error& e) {
    if (e.code() == errc::bad_argument_type) throw;
    fail(errc::bad_argument_type, args.where() + ": bad grid literal: " + e.what());
  }
}

std::pair<Separator::Kind, int> parse_separator(const Args& args, const std::string& raw,
                                                CellValue& value_out) {
  if (raw.starts_with("index:")) {
    const std::string inner = raw.substr(6);
    int idx = 0;
    auto [ptr, ec] = std::from_chars(inner.data(), inner.data() + inner.size(), idx);
    if (ec != std::errc() || ptr != inner.data() + inner.size() || idx < 1) {
      fail(errc::bad_argument_type,
           args.where() + ": separator index \"" + inner + "\" must be a positive integer");
    }
    return {Separator::Kind::index, idx};
  }
  if (raw.starts_with("value:")) {
    value_out = parse_cell(args, "separator", raw.substr(6));
    return {Separator::Kind::value, 0};
  }
  fail(errc::bad_argument_type,
       args.where() + ": separator must be index:<n> or value:<v>, got \"" + raw + "\"");
}

CombineRule parse_rule(const Args& args, const std::string& raw) {
  CombineRule rule;
  if (raw == "nonzero-union") {
    rule.kind = CombineRule::Kind::nonzero_union;
  } else if (raw.starts_with("priority:")) {
    rule.kind = CombineRule::Kind::priority;
    rule.priority = parse_cell_list(args, "rule", raw.substr(9));
  } else if (raw.starts_with("overlap-new:")) {
    rule.kind = CombineRule::Kind::overlap_new;
    rule.overlap_value = parse_cell(args, "rule", raw.substr(12));
  } else {
    fail(errc::bad_argument_type, args.where() + ": unknown combine rule \"" + raw + "\"");
  }
  return rule;
}

RecolorOp parse_recolor(const Args& args, const std::string& raw) {
  RecolorOp op;
  std::stringstream ss{raw};
  std::string entry;
  while (std::getline(ss, entry, ',')) {
    const auto colon = entry.find(':');
    if (colon == std::string::npos) {
      fail(errc::bad_argument_type, args.where() + ": map entry \"" + entry + "\" is not v:v");
    }
    const CellValue from = parse_cell(args, "map", entry.substr(0, colon));
    const CellValue to = parse_cell(args, "map", entry.substr(colon + 1));
    for (const auto& [existing, _] : op.mapping) {
      if (existing == from) {
        fail(errc::bad_argument_type,
             args.where() + ": map lists source value " + std::to_string(int(from)) + " twice");
      }
    }
    op.mapping.emplace_back(from, to);
  }
  if (op.mapping.empty()) {
    fail(errc::bad_argument_type, args.where() + ": map is empty");
  }
  std::sort(op.mapping.begin(), op.mapping.end());
  return op;
}

Primitive parse_line(const Args& args) {
  const std::string& name = args.primitive;
  if (name == "rotate") {
    args.expect_exactly({"quarter_turns"});
    return RotateOp{parse_int(args, "quarter_turns", 0, 3)};
  }
  if (name == "reflect") {
    args.expect_exactly({"axis"});
    return ReflectOp{parse_reflect_axis(args, args.get("axis"))};
  }
  if (name == "shift_object") {
    args.expect_exactly({"selector", "dr", "dc"});
    return ShiftObjectOp{parse_selector(args, args.get("selector")),
                         parse_int(args, "dr", -99, 99), parse_int(args, "dc", -99, 99)};
  }
  if (name == "recolor") {
    args.expect_exactly({"map"});
    return parse_recolor(args, args.get("map"));
  }
  if (name == "scatter_to_corners") {
    args.expect_exactly({"selector"});
    return ScatterToCornersOp{parse_selector(args, args.get("selector"))};
  }
  if (name == "subsample") {
    args.expect_exactly({"row_offset", "row_stride", "col_offset", "col_stride"});
    return SubsampleOp{parse_int(args, "row_offset", 0, 9999),
                       parse_int(args, "row_stride", 1, 9999),
                       parse_int(args, "col_offset", 0, 9999),
                       parse_int(args, "col_stride", 1, 9999)};
  }
  if (name == "crop_bbox") {
    args.expect_exactly({"selector"});
    return CropBboxOp{parse_selector(args, args.get("selector"))};
  }
  if (name == "tile_pattern") {
    args.expect_exactly({"out_rows", "out_cols"});
    return TilePatternOp{parse_int(args, "out_rows", 1, 9999),
                         parse_int(args, "out_cols", 1, 9999)};
  }
  if (name == "combine_segments") {
    args.expect_exactly({"axis", "separator", "rule"});
    CombineSegmentsOp op;
    op.axis = parse_split_axis(args, args.get("axis"));
    CellValue sep_value = 0;
    auto [kind, index] = parse_separator(args, args.get("separator"), sep_value);
    op.separator_kind = kind;
    op.separator_index = index;
    op.separator_value = sep_value;
    op.rule = parse_rule(args, args.get("rule"));
    return op;
  }
  if (name == "emit_fixed") {
    args.expect_exactly({"grid"});
    return EmitFixedOp{parse_grid_literal(args, args.get("grid"))};
  }
  fail(errc::unknown_primitive, args.where() + ": unknown primitive");
}

std::string selector_text(const Selector& s) {
  switch (s.kind) {
    case Selector::Kind::largest: return "largest";
    case Selector::Kind::smallest: return "smallest";
    case Selector::Kind::nth_in_order: return "nth-in-order(" + std::to_string(s.n) + ")";
    case Selector::Kind::by_value: return "by-value(" + std::to_string(int(s.value)) + ")";
  }
  return "largest";
}

const char* axis_text(ReflectAxis axis) {
  switch (axis) {
    case ReflectAxis::horizontal: return "horizontal";
    case ReflectAxis::vertical: return "vertical";
    case ReflectAxis::main_diagonal: return "main-diagonal";
    case ReflectAxis::anti_diagonal: return "anti-diagonal";
  }
  return "horizontal";
}

struct Printer {
  std::string operator()(const RotateOp& op) const {
    return "rotate quarter_turns=" + std::to_string(op.quarter_turns);
  }
  std::string operator()(const ReflectOp& op) const {
    return std::string("reflect axis=") + axis_text(op.axis);
  }
  std::string operator()(const ShiftObjectOp& op) const {
    return "shift_object selector=" + selector_text(op.selector) +
           " dr=" + std::to_string(op.dr) + " dc=" + std::to_string(op.dc);
  }
  std::string operator()(const RecolorOp& op) const {
    std::string out = "recolor map=";
    for (std::size_t i = 0; i < op.mapping.size(); ++i) {
      if (i > 0) out.push_back(',');
      out += std::to_string(int(op.mapping[i].first)) + ":" +
             std::to_string(int(op.mapping[i].second));
    }
    return out;
  }
  std::string operator()(const ScatterToCornersOp& op) const {
    return "scatter_to_corners selector=" + selector_text(op.selector);
  }
  std::string operator()(const SubsampleOp& op) const {
    return "subsample row_offset=" + std::to_string(op.row_offset) +
           " row_stride=" + std::to_string(op.row_stride) +
           " col_offset=" + std::to_string(op.col_offset) +
           " col_stride=" + std::to_string(op.col_stride);
  }
  std::string operator()(const CropBboxOp& op) const {
    return "crop_bbox selector=" + selector_text(op.selector);
  }
  std::string operator()(const TilePatternOp& op) const {
    return "tile_pattern out_rows=" + std::to_string(op.out_rows) +
           " out_cols=" + std::to_string(op.out_cols);
  }
  std::string operator()(const CombineSegmentsOp& op) const {
    std::string out = "combine_segments axis=";
    out += op.axis == Axis::row ? "row" : "column";
    out += " separator=";
    if (op.separator_kind == Separator::Kind::index) {
      out += "index:" + std::to_string(op.separator_index);
    } else {
      out += "value:" + std::to_string(int(op.separator_value));
    }
    out += " rule=";
    switch (op.rule.kind) {
      case CombineRule::Kind::nonzero_union:
        out += "nonzero-union";
        break;
      case CombineRule::Kind::priority:
        out += "priority:";
        for (std::size_t i = 0; i < op.rule.priority.size(); ++i) {
          if (i > 0) out.push_back(',');
          out += std::to_string(int(op.rule.priority[i]));
        }
        break;
      case CombineRule::Kind::overlap_new:
        out += "overlap-new:" + std::to_string(int(op.rule.overlap_value));
        break;
    }
    return out;
  }
  std::string operator()(const EmitFixedOp& op) const {
    return "emit_fixed grid=" + grid_to_json(op.grid);
  }
};

}  // namespace

Instruction parse_instruction(std::string_view text) {
  Instruction instruction;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = trim(line.substr(0, hash));
    }
    if (line.empty()) continue;

    Args args;
    args.line_no = line_no;
    std::size_t cursor = 0;
    bool first = true;
    while (cursor < line.size()) {
      while (cursor < line.size() && line[cursor] == ' ') ++cursor;
      if (cursor >= line.size()) break;
      std::size_t end = line.find(' ', cursor);
      if (end == std::string_view::npos) end = line.size();
      const std::string token(line.substr(cursor, end - cursor));
      cursor = end;
      if (first) {
        args.primitive = token;
        first = false;
        continue;
      }
      const std::size_t eq = token.find('=');
      if (eq == std::string::npos || eq == 0) {
        fail(errc::bad_arity, "line " + std::to_string(line_no) + ": token \"" + token +
                                  "\" is not key=value");
      }
      const std::string key = token.substr(0, eq);
      if (args.values.contains(key)) {
        fail(errc::bad_arity,
             "line " + std::to_string(line_no) + ": duplicate argument \"" + key + "\"");
      }
      args.values.emplace(key, token.substr(eq + 1));
    }
    instruction.steps.push_back(parse_line(args));
  }
  if (instruction.steps.empty()) {
    fail(errc::empty_program, "program has no instructions");
  }
  return instruction;
}

std::string print_instruction(const Instruction& instruction) {
  std::string out;
  for (std::size_t i = 0; i < instruction.steps.size(); ++i) {
    if (i > 0) out.push_back('\n');
    out += std::visit(Printer{}, instruction.steps[i]);
  }
  return out;
}

std::size_t primitive_count(const Instruction& instruction) { return instruction.steps.size(); }

std::string grammar_help() {
  return
      "rotate quarter_turns=<0-3>                # clockwise quarter turns\n"
      "reflect axis=<horizontal|vertical|main-diagonal|anti-diagonal>\n"
      "                                          # horizontal mirrors left-right, "
      "vertical top-bottom\n"
      "shift_object selector=<SELECTOR> dr=<int> dc=<int>\n"
      "recolor map=<v:v[,v:v...]>\n"
      "scatter_to_corners selector=<SELECTOR>    # each cell to its nearest grid corner\n"
      "subsample row_offset=<int> row_stride=<int> col_offset=<int> col_stride=<int>\n"
      "crop_bbox selector=<SELECTOR>\n"
      "tile_pattern out_rows=<int> out_cols=<int>\n"
      "combine_segments axis=<row|column> separator=<index:<n>|value:<0-9>> "
      "rule=<nonzero-union|priority:<v[,v...]>|overlap-new:<0-9>>\n"
      "emit_fixed grid=<[[...],[...]] with no spaces>\n"
      "SELECTOR := largest | smallest | nth-in-order(<n>) | by-value(<0-9>)\n"
      "Objects are connected non-zero regions, ordered from the top-left.\n"
      "One instruction per line; lines starting with # are comments.";
}

}  // namespace arc
