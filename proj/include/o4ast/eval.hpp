#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "combination.hpp"
#include "decompose.hpp"
#include "error.hpp"
#include "flow_series.hpp"
#include "metrics.hpp"
#include "predictor.hpp"
#include "search.hpp"

namespace o4ast {

enum class Strategy { Direct, Union, UnionSubtraction };

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Direct: return "direct";
    case Strategy::Union: return "union";
    case Strategy::UnionSubtraction: return "union_subtraction";
  }
  return "?";
}

inline Strategy parse_strategy(const std::string& s) {
  if (s == "direct") return Strategy::Direct;
  if (s == "union") return Strategy::Union;
  if (s == "union_subtraction" || s == "union-subtraction")
    return Strategy::UnionSubtraction;
  raise(ErrorKind::Config, "unknown strategy: " + s);
}

// Region-level combination for one strategy: the direct strategy sums the
// decomposed grids' own predictions; the other two substitute each grid's
// indexed optimal combination.
inline Combination strategy_combination(const std::vector<HierarchicalGrid>& grids,
                                        const CombinationTable& table,
                                        Strategy strategy) {
  Combination combo;
  for (const auto& g : grids) {
    switch (strategy) {
      case Strategy::Direct:
        combo = combo.concat(g.direct_combination());
        break;
      case Strategy::Union: {
        const auto it = table.entries.find(g.code);
        if (it == table.entries.end())
          raise(ErrorKind::IncompleteTable, "table is missing code: " + g.code);
        combo = combo.concat(it->second.union_best);
        break;
      }
      case Strategy::UnionSubtraction: {
        const auto it = table.entries.find(g.code);
        if (it == table.entries.end())
          raise(ErrorKind::IncompleteTable, "table is missing code: " + g.code);
        combo = combo.concat(it->second.best);
        break;
      }
    }
  }
  return combo.simplified();
}

// ---------------------------------------------------------------------------
// Query generators: axis-aligned rectangles and random polyominoes over the
// unpadded raster, sized near a target atomic-cell count.

inline RasterRegion random_rectangle_query(const HierarchyConfig& cfg,
                                           std::mt19937_64& rng,
                                           int target_cells) {
  const int raw_h = cfg.raw_height(), raw_w = cfg.raw_width();
  target_cells = std::clamp(target_cells, 1, raw_h * raw_w);
  for (int attempt = 0; attempt < 256; ++attempt) {
    const int max_h = std::min(raw_h, target_cells);
    const int h = std::uniform_int_distribution<int>(1, max_h)(rng);
    const int w = std::clamp((target_cells + h / 2) / h, 1, raw_w);
    const int r0 = std::uniform_int_distribution<int>(0, raw_h - h)(rng);
    const int c0 = std::uniform_int_distribution<int>(0, raw_w - w)(rng);
    RasterRegion region;
    region.mask = SignedGrid(cfg.height(), cfg.width());
    for (int r = r0; r < r0 + h; ++r)
      for (int c = c0; c < c0 + w; ++c) region.mask.at(r, c) = 1;
    return region;
  }
  raise(ErrorKind::Config, "could not place rectangle query");
}

// Grows a connected polyomino by repeatedly annexing a random frontier cell.
inline RasterRegion random_polyomino_query(const HierarchyConfig& cfg,
                                           std::mt19937_64& rng,
                                           int target_cells) {
  const int raw_h = cfg.raw_height(), raw_w = cfg.raw_width();
  target_cells = std::clamp(target_cells, 1, raw_h * raw_w);
  RasterRegion region;
  region.mask = SignedGrid(cfg.height(), cfg.width());
  const int sr = std::uniform_int_distribution<int>(0, raw_h - 1)(rng);
  const int sc = std::uniform_int_distribution<int>(0, raw_w - 1)(rng);
  region.mask.at(sr, sc) = 1;
  std::vector<std::pair<int, int>> frontier;
  auto push_neighbors = [&](int r, int c) {
    const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
    for (int i = 0; i < 4; ++i) {
      const int nr = r + dr[i], nc = c + dc[i];
      if (nr < 0 || nc < 0 || nr >= raw_h || nc >= raw_w) continue;
      if (!region.mask.at(nr, nc)) frontier.emplace_back(nr, nc);
    }
  };
  push_neighbors(sr, sc);
  int placed = 1;
  while (placed < target_cells && !frontier.empty()) {
    const size_t i =
        std::uniform_int_distribution<size_t>(0, frontier.size() - 1)(rng);
    const auto [r, c] = frontier[i];
    frontier[i] = frontier.back();
    frontier.pop_back();
    if (region.mask.at(r, c)) continue;
    region.mask.at(r, c) = 1;
    ++placed;
    push_neighbors(r, c);
  }
  return region;
}

// Benchmark task areas in km^2, mapped to atomic-cell counts.
inline int task_query_cells(int task, double cell_meters) {
  static constexpr double kAreasKm2[4] = {0.3, 0.6, 1.3, 4.8};
  if (task < 1 || task > 4) raise(ErrorKind::Config, "task must be 1..4");
  const double cell_km2 = (cell_meters / 1000.0) * (cell_meters / 1000.0);
  return std::max(1, static_cast<int>(std::lround(kAreasKm2[task - 1] / cell_km2)));
}

// ---------------------------------------------------------------------------
// Strategy comparison.

struct QueryRecord {
  int query = 0;
  int cells = 0;
  bool union_differs = false;  // union combination != direct combination
  bool best_differs = false;
  // Pooled per-strategy residual sums over the scored range.
  double sse[3] = {0, 0, 0};
  double ape[3] = {0, 0, 0};
  long long entries = 0;
  long long mape_entries = 0;
};

struct StrategySummary {
  double rmse = 0.0;
  double mape = 0.0;
  bool mape_defined = false;
  double prop = 0.0;           // share of queries with a differing decomposition
  double imprv = 0.0;          // relative RMSE gain vs direct on those queries
  bool imprv_defined = false;  // false when no query differs
};

struct EvaluationReport {
  double mape_epsilon = kMapeEpsilon;
  long long queries = 0;
  long long entries_per_query = 0;
  StrategySummary direct, union_only, union_subtraction;
  std::vector<QueryRecord> records;
};

namespace eval_detail {

inline void summarize(const EvaluationReport& report, Strategy strategy,
                      StrategySummary& out) {
  const int s = static_cast<int>(strategy);
  double sse = 0, ape = 0, diff_sse = 0, diff_direct_sse = 0;
  long long entries = 0, mape_entries = 0, diff_entries = 0, differing = 0;
  for (const auto& rec : report.records) {
    sse += rec.sse[s];
    ape += rec.ape[s];
    entries += rec.entries;
    mape_entries += rec.mape_entries;
    const bool differs = strategy == Strategy::UnionSubtraction
                             ? rec.best_differs
                             : rec.union_differs;
    if (differs) {
      ++differing;
      diff_sse += rec.sse[s];
      diff_direct_sse += rec.sse[static_cast<int>(Strategy::Direct)];
      diff_entries += rec.entries;
    }
  }
  out.rmse = entries ? std::sqrt(sse / static_cast<double>(entries)) : 0.0;
  out.mape_defined = mape_entries > 0;
  out.mape = out.mape_defined ? ape / static_cast<double>(mape_entries) : 0.0;
  if (strategy == Strategy::Direct) {
    out.prop = 0.0;
    out.imprv_defined = false;
    return;
  }
  out.prop = report.records.empty()
                 ? 0.0
                 : static_cast<double>(differing) / report.records.size();
  if (differing > 0 && diff_entries > 0 && diff_direct_sse > 0) {
    const double rmse_direct = std::sqrt(diff_direct_sse / diff_entries);
    const double rmse_self = std::sqrt(diff_sse / diff_entries);
    out.imprv = (rmse_direct - rmse_self) / rmse_direct;
    out.imprv_defined = true;
  }
}

}  // namespace eval_detail

// Runs every query under all three strategies over `range` and pools the
// residuals. Predictions are clamped at 0 after signed aggregation.
inline EvaluationReport evaluate_strategies(
    const std::vector<RasterRegion>& queries, const CombinationTable& table,
    const PredictionStore& store, const FlowSeries& truth, SlotRange range) {
  if (queries.empty()) raise(ErrorKind::EmptyDataset, "no queries");
  if (range.length() <= 0) raise(ErrorKind::Config, "empty evaluation range");
  const auto& cfg = table.cfg;
  EvaluationReport report;
  report.queries = static_cast<long long>(queries.size());
  report.entries_per_query =
      static_cast<long long>(range.length()) * truth.channels();
  report.records.reserve(queries.size());

  for (size_t qi = 0; qi < queries.size(); ++qi) {
    const auto& region = queries[qi];
    const auto grids = hierarchical_decompose(region, cfg);
    Combination combos[3] = {
        strategy_combination(grids, table, Strategy::Direct),
        strategy_combination(grids, table, Strategy::Union),
        strategy_combination(grids, table, Strategy::UnionSubtraction),
    };
    QueryRecord rec;
    rec.query = static_cast<int>(qi);
    rec.cells = static_cast<int>(region.cell_count());
    rec.union_differs = !(combos[1] == combos[0]);
    rec.best_differs = !(combos[2] == combos[0]);

    std::vector<std::pair<int, int>> cells;
    for (int r = 0; r < region.mask.rows; ++r)
      for (int c = 0; c < region.mask.cols; ++c)
        if (region.mask.at(r, c)) cells.emplace_back(r, c);

    for (int ch = 0; ch < truth.channels(); ++ch)
      for (int t = range.begin; t < range.end; ++t) {
        double tru = 0.0;
        for (const auto& [r, c] : cells) tru += truth.at(0, ch, t, r, c);
        ++rec.entries;
        const bool mape_ok = tru >= kMapeEpsilon;
        if (mape_ok) ++rec.mape_entries;
        for (int s = 0; s < 3; ++s) {
          const double pred =
              std::max(0.0, combination_value(store, combos[s], ch, t));
          const double d = pred - tru;
          rec.sse[s] += d * d;
          if (mape_ok) rec.ape[s] += std::abs(d) / tru;
        }
      }
    report.records.push_back(rec);
  }
  eval_detail::summarize(report, Strategy::Direct, report.direct);
  eval_detail::summarize(report, Strategy::Union, report.union_only);
  eval_detail::summarize(report, Strategy::UnionSubtraction,
                         report.union_subtraction);
  return report;
}

}  // namespace o4ast
