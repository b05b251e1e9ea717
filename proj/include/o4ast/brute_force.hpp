#pragma once

#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include "combination.hpp"
#include "error.hpp"
#include "flow_series.hpp"
#include "predictor.hpp"
#include "search.hpp"

namespace o4ast {

// Exhaustive reference search: enumerate every partition of a region into
// axis-aligned scale-sized squares and score each as the sum of the parts'
// own prediction losses. The objective decomposes over disjoint parts, so
// the optimum matches what the bottom-up table search composes from
// per-grid optima. Cost is exponential, so inputs are limited to tiny
// fixtures.
struct BruteForceResult {
  Combination best;
  double best_loss = 0.0;
  long long partitions_scored = 0;
};

namespace brute_detail {

// True when the s x s square anchored at (r, c) at a given layer lies fully
// inside the remaining region.
inline bool square_fits(const SignedGrid& remaining, int r0, int c0, int s) {
  if (r0 % s != 0 || c0 % s != 0) return false;
  if (r0 + s > remaining.rows || c0 + s > remaining.cols) return false;
  for (int r = r0; r < r0 + s; ++r)
    for (int c = c0; c < c0 + s; ++c)
      if (!remaining.at(r, c)) return false;
  return true;
}

inline void mark_square(SignedGrid& remaining, int r0, int c0, int s, int value) {
  for (int r = r0; r < r0 + s; ++r)
    for (int c = c0; c < c0 + s; ++c) remaining.at(r, c) = value;
}

struct Searcher {
  const HierarchyConfig& cfg;
  const PredictionStore& store;
  const FlowSeries& truth;
  const std::vector<std::pair<int, int>>& cells;
  SlotRange range;
  Combination current;
  BruteForceResult result;
  std::map<std::tuple<int, int, int>, double> part_losses;

  // Loss of one grid against its own truth series, memoised across the
  // partitions that share it.
  double part_loss(int layer, int gr, int gc) {
    const auto key = std::make_tuple(layer, gr, gc);
    auto it = part_losses.find(key);
    if (it != part_losses.end()) return it->second;
    Combination direct;
    direct.add(layer, gr, gc, +1);
    const std::vector<std::pair<int, int>> self{{gr, gc}};
    const double loss = search_detail::combo_loss_against_cells(
        store, direct, truth, layer, self, range);
    part_losses.emplace(key, loss);
    return loss;
  }

  void score_current() {
    double loss = 0.0;
    for (const auto& t : current.terms) loss += part_loss(t.layer, t.row, t.col);
    ++result.partitions_scored;
    if (result.partitions_scored == 1 || loss < result.best_loss) {
      result.best_loss = loss;
      result.best = current.simplified();
    }
  }

  // Cover the first uncovered atomic cell (row-major) with every grid-aligned
  // square that contains it, then recurse. Each partition is enumerated once.
  void recurse(SignedGrid& remaining) {
    int fr = -1, fc = -1;
    for (int r = 0; r < remaining.rows && fr < 0; ++r)
      for (int c = 0; c < remaining.cols; ++c)
        if (remaining.at(r, c)) {
          fr = r;
          fc = c;
          break;
        }
    if (fr < 0) {
      score_current();
      return;
    }
    for (int l = 0; l < cfg.layers(); ++l) {
      const int s = cfg.scale(l);
      const int r0 = fr / s * s;
      const int c0 = fc / s * s;
      if (!square_fits(remaining, r0, c0, s)) continue;
      mark_square(remaining, r0, c0, s, 0);
      current.add(l, r0 / s, c0 / s, +1);
      recurse(remaining);
      current.terms.pop_back();
      mark_square(remaining, r0, c0, s, 1);
    }
  }
};

}  // namespace brute_detail

// Score every square partition of `region` and return the global optimum.
// Refuses anything beyond a small fixture (<= 8x8 raster, <= 3 layers).
inline BruteForceResult brute_force_union_search(const HierarchyConfig& cfg,
                                                 const SignedGrid& region,
                                                 const PredictionStore& store,
                                                 const FlowSeries& truth,
                                                 SlotRange range) {
  if (cfg.raw_height() > 8 || cfg.raw_width() > 8 || cfg.layers() > 3)
    raise(ErrorKind::TooLarge,
          "brute-force search is limited to rasters of at most 8x8 with at "
          "most 3 layers");
  if (region.rows != cfg.height() || region.cols != cfg.width())
    raise(ErrorKind::Shape, "region mask does not match the padded raster");
  std::vector<std::pair<int, int>> cells;
  for (int r = 0; r < region.rows; ++r)
    for (int c = 0; c < region.cols; ++c)
      if (region.at(r, c)) cells.emplace_back(r, c);
  if (cells.empty()) raise(ErrorKind::EmptyRegion, "region mask is empty");
  SignedGrid remaining = region;
  brute_detail::Searcher s{cfg, store, truth, cells, range, {}, {}};
  s.recurse(remaining);
  return s.result;
}

}  // namespace o4ast
