#include <random>

#include "arc/grid_views.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace arc;

namespace {

// The library's components as plain cell sets, for comparing against the
// union-find oracle.
std::vector<std::set<std::pair<int, int>>> as_cell_sets(
    const std::vector<ObjectComponent>& components) {
  std::vector<std::set<std::pair<int, int>>> sets;
  for (const ObjectComponent& comp : components) {
    std::set<std::pair<int, int>> cells;
    for (const GridCell& cell : comp.cells) cells.insert({cell.row, cell.col});
    sets.push_back(std::move(cells));
  }
  return sets;
}

const Grid kTrainInput157(4, 4, {0, 0, 0, 0, 0, 3, 4, 0, 0, 7, 6, 0, 0, 0, 0, 0});

}  // namespace

TEST_CASE("extract_objects on the task 157 training input") {
  SegmentationConfig any4{Connectivity::four, Grouping::any_nonbackground, 0};
  const auto merged = extract_objects(kTrainInput157, any4);
  REQUIRE(merged.size() == 1);
  CHECK(merged.front().size() == 4);
  CHECK(merged.front().bounding_box == BoundingBox{1, 1, 2, 2});

  SegmentationConfig same4{Connectivity::four, Grouping::same_value, 0};
  const auto split = extract_objects(kTrainInput157, same4);
  REQUIRE(split.size() == 4);
  for (const auto& comp : split) CHECK(comp.size() == 1);
  // Deterministic order: row-major by first cell.
  CHECK(split[0].cells.front().value == 3);
  CHECK(split[1].cells.front().value == 4);
  CHECK(split[2].cells.front().value == 7);
  CHECK(split[3].cells.front().value == 6);
}

TEST_CASE("extract_objects on an all-background grid") {
  CHECK(extract_objects(Grid::filled(3, 3, 0), SegmentationConfig{}).empty());
}

TEST_CASE("extract_objects matches the union-find oracle on random grids") {
  std::mt19937 rng(20260811);
  const SegmentationConfig configs[] = {
      {Connectivity::four, Grouping::any_nonbackground, 0},
      {Connectivity::eight, Grouping::any_nonbackground, 0},
      {Connectivity::four, Grouping::same_value, 0},
      {Connectivity::eight, Grouping::same_value, 0},
  };
  for (int trial = 0; trial < 250; ++trial) {
    const Grid g = oracle::random_grid(rng, 8, 8, 3);  // small alphabet, more adjacency
    for (const auto& config : configs) {
      const auto expected = oracle::connected_components(g, config).components;
      const auto got = as_cell_sets(extract_objects(g, config));
      REQUIRE(got == expected);
    }
  }
}

TEST_CASE("component sizes partition the non-background cells") {
  std::mt19937 rng(5150);
  for (int trial = 0; trial < 100; ++trial) {
    const Grid g = oracle::random_grid(rng, 7, 7);
    SegmentationConfig config;
    std::size_t non_background = 0;
    for (int r = 0; r < g.rows(); ++r) {
      for (int c = 0; c < g.cols(); ++c) {
        if (g.at(r, c) != config.background) ++non_background;
      }
    }
    const auto components = extract_objects(g, config);
    std::size_t total = 0;
    std::set<std::pair<int, int>> seen;
    for (const auto& comp : components) {
      total += comp.size();
      for (const auto& cell : comp.cells) {
        CHECK(cell.value != config.background);
        CHECK(seen.insert({cell.row, cell.col}).second);  // pairwise disjoint
      }
    }
    CHECK(total == non_background);
  }
}

TEST_CASE("any-nonbackground components are invariant under value relabeling") {
  std::mt19937 rng(777);
  SegmentationConfig config;  // any_nonbackground
  for (int trial = 0; trial < 50; ++trial) {
    const Grid g = oracle::random_grid(rng, 6, 6, 4);
    // Relabel 1..9 by a permutation that fixes the background 0.
    std::vector<CellValue> perm = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::shuffle(perm.begin() + 1, perm.end(), rng);
    Grid relabeled = g;
    for (int r = 0; r < g.rows(); ++r) {
      for (int c = 0; c < g.cols(); ++c) relabeled.set(r, c, perm[g.at(r, c)]);
    }
    CHECK(as_cell_sets(extract_objects(g, config)) ==
          as_cell_sets(extract_objects(relabeled, config)));
  }
}

TEST_CASE("detect_symmetries on pinned grids") {
  const SymmetryReport uniform = detect_symmetries(Grid::filled(3, 3, 5));
  CHECK(uniform == SymmetryReport{true, true, true, true, true, true});

  // 2x2 checker-like grid: fixed by rot180 and both diagonals only.
  const SymmetryReport diag = detect_symmetries(Grid(2, 2, {1, 2, 2, 1}));
  CHECK(diag.rotation_180);
  CHECK(diag.main_diagonal);
  CHECK(diag.anti_diagonal);
  CHECK_FALSE(diag.horizontal_reflection);
  CHECK_FALSE(diag.vertical_reflection);
  CHECK_FALSE(diag.rotation_90);

  // The task 157 answer grid has no symmetry at all.
  const Grid answer(4, 4, {2, 0, 0, 3, 0, 0, 0, 0, 0, 0, 0, 0, 4, 0, 0, 9});
  CHECK(detect_symmetries(answer) == SymmetryReport{});
  CHECK(detect_symmetries(answer) == oracle::symmetry_report(answer));
}

TEST_CASE("square-only flags are false on non-square grids") {
  const SymmetryReport report = detect_symmetries(Grid::filled(2, 3, 1));
  CHECK(report.horizontal_reflection);
  CHECK(report.vertical_reflection);
  CHECK(report.rotation_180);
  CHECK_FALSE(report.main_diagonal);
  CHECK_FALSE(report.anti_diagonal);
  CHECK_FALSE(report.rotation_90);
}

TEST_CASE("detect_symmetries agrees with the dihedral oracle on random grids") {
  std::mt19937 rng(60311);
  for (int trial = 0; trial < 1000; ++trial) {
    const Grid g = oracle::random_grid(rng, 6, 6, 2);
    REQUIRE(detect_symmetries(g) == oracle::symmetry_report(g));
  }
  // rotation-90 implies rotation-180 by group structure; spot-check it holds.
  for (int trial = 0; trial < 200; ++trial) {
    const Grid g = oracle::random_grid(rng, 4, 4, 1);
    const SymmetryReport report = detect_symmetries(g);
    if (report.rotation_90) CHECK(report.rotation_180);
  }
}

TEST_CASE("split_segments at a constant-value column") {
  const Grid g(2, 4, {1, 1, 9, 2, 1, 0, 9, 2});
  const SegmentSplit split = split_segments(g, Axis::column, Separator::at_value(9));
  CHECK(split.separator_index == 2);
  CHECK(split.first == Grid(2, 2, {1, 1, 1, 0}));
  CHECK(split.second == Grid(2, 1, {2, 2}));
  CHECK(stitch_segments(split) == g);
}

TEST_CASE("split_segments at a row index") {
  const Grid g = Grid::filled(4, 4, 3);
  const SegmentSplit split = split_segments(g, Axis::row, Separator::at_index(2));
  CHECK(split.first.rows() == 2);
  CHECK(split.first.cols() == 4);
  CHECK(split.second.rows() == 2);
  CHECK(split.second.cols() == 4);
  CHECK(stitch_segments(split) == g);
}

TEST_CASE("split_segments error paths") {
  CHECK_THROWS_AS(split_segments(kTrainInput157, Axis::row, Separator::at_value(9)), error);
  try {
    split_segments(kTrainInput157, Axis::row, Separator::at_value(9));
  } catch (const error& e) {
    CHECK(e.code() == errc::no_such_separator);
  }
  try {
    split_segments(kTrainInput157, Axis::row, Separator::at_index(4));
  } catch (const error& e) {
    CHECK(e.code() == errc::out_of_bounds);
  }
  try {
    split_segments(kTrainInput157, Axis::column, Separator::at_index(0));
  } catch (const error& e) {
    CHECK(e.code() == errc::out_of_bounds);
  }
}

TEST_CASE("split then stitch reproduces random grids") {
  std::mt19937 rng(31337);
  for (int trial = 0; trial < 200; ++trial) {
    // Cells capped at 8 so a planted 9-line is the unique separator.
    Grid g = oracle::random_grid(rng, 6, 6, 8);
    const Axis axis = trial % 2 == 0 ? Axis::row : Axis::column;
    const int extent = axis == Axis::row ? g.rows() : g.cols();
    if (extent < 2) continue;
    std::uniform_int_distribution<int> index_dist(1, extent - 1);
    const SegmentSplit split = split_segments(g, axis, Separator::at_index(index_dist(rng)));
    CHECK(stitch_segments(split) == g);

    if (extent >= 3) {
      std::uniform_int_distribution<int> line_dist(1, extent - 2);
      const int line = line_dist(rng);
      for (int i = 0; i < (axis == Axis::row ? g.cols() : g.rows()); ++i) {
        if (axis == Axis::row) {
          g.set(line, i, 9);
        } else {
          g.set(i, line, 9);
        }
      }
      const SegmentSplit by_value = split_segments(g, axis, Separator::at_value(9));
      CHECK(by_value.separator_index == line);
      CHECK(stitch_segments(by_value) == g);
    }
  }
}
