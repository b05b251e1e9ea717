#pragma once

#include <vector>

#include "error.hpp"
#include "flow_series.hpp"

namespace o4ast {

// Closeness / daily / weekly lag selection. For target slot t the feature
// vector is [t-l_c .. t-1; t-l_d*d .. t-d; t-l_w*w .. t-w].
struct TemporalFeatureSpec {
  int closeness = 6;
  int daily = 7;
  int weekly = 4;
  int slots_per_day = 24;
  int slots_per_week = 168;

  int count() const { return closeness + daily + weekly; }

  int min_slot() const {
    int m = closeness;
    if (daily > 0) m = std::max(m, daily * slots_per_day);
    if (weekly > 0) m = std::max(m, weekly * slots_per_week);
    return m;
  }

  void validate() const {
    if (closeness < 0 || daily < 0 || weekly < 0)
      raise(ErrorKind::Config, "lag counts must be >= 0");
    if (count() == 0) raise(ErrorKind::Config, "at least one lag required");
    if (slots_per_day <= 0 || slots_per_week <= slots_per_day)
      raise(ErrorKind::Config, "need 0 < slots_per_day < slots_per_week");
  }

  // Offsets subtracted from t, in feature order.
  std::vector<int> lag_offsets() const {
    std::vector<int> out;
    for (int i = closeness; i >= 1; --i) out.push_back(i);
    for (int i = daily; i >= 1; --i) out.push_back(i * slots_per_day);
    for (int i = weekly; i >= 1; --i) out.push_back(i * slots_per_week);
    return out;
  }
};

// Raw lag values for one cell/channel; `out` must have spec.count() slots.
inline void temporal_feature_row(const FlowSeries& fs, int layer, int channel,
                                 int row, int col, int t,
                                 const std::vector<int>& offsets, double* out) {
  for (size_t i = 0; i < offsets.size(); ++i)
    out[i] = static_cast<double>(fs.at(layer, channel, t - offsets[i], row, col));
}

// Feature matrix for every (cell, channel) of one layer at slot t; rows
// ordered (channel, row, col).
inline std::vector<std::vector<double>> build_temporal_features(
    const FlowSeries& fs, int layer, const TemporalFeatureSpec& spec, int t) {
  spec.validate();
  if (t < spec.min_slot() || t >= fs.slots())
    raise(ErrorKind::Horizon, "insufficient history for slot " + std::to_string(t));
  const auto offsets = spec.lag_offsets();
  const auto& cfg = fs.hierarchy();
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<size_t>(fs.channels()) * cfg.cell_count(layer));
  for (int c = 0; c < fs.channels(); ++c)
    for (int r = 0; r < cfg.layer_height(layer); ++r)
      for (int cc = 0; cc < cfg.layer_width(layer); ++cc) {
        std::vector<double> row(offsets.size());
        temporal_feature_row(fs, layer, c, r, cc, t, offsets, row.data());
        out.push_back(std::move(row));
      }
  return out;
}

}  // namespace o4ast
