#pragma once

#include <cmath>
#include <vector>

#include "error.hpp"
#include "flow_series.hpp"
#include "ingest.hpp"

namespace o4ast {

// Per-scale mean/variance over the training slots, all cells and channels.
struct ScaleStats {
  double mean = 0.0;
  double variance = 0.0;
  bool degenerate = false;  // variance below epsilon; passes through shifted

  static constexpr double kEpsilon = 1e-12;

  double stddev() const { return degenerate ? 1.0 : std::sqrt(variance); }
};

class ScaleNormalizer {
public:
  ScaleNormalizer() = default;

  static ScaleNormalizer fit(const FlowSeries& fs, SlotRange train) {
    if (train.length() <= 0) raise(ErrorKind::Config, "empty training range");
    ScaleNormalizer n;
    const auto& cfg = fs.hierarchy();
    n.stats_.resize(cfg.layers());
    for (int l = 0; l < cfg.layers(); ++l) {
      const size_t cells = static_cast<size_t>(cfg.cell_count(l));
      double sum = 0.0, sumsq = 0.0;
      size_t count = 0;
      for (int c = 0; c < fs.channels(); ++c)
        for (int t = train.begin; t < train.end; ++t) {
          const size_t base = fs.index(l, c, t, 0, 0);
          const auto& data = fs.layer_data(l);
          for (size_t i = 0; i < cells; ++i) {
            const double x = data[base + i];
            sum += x;
            sumsq += x * x;
          }
          count += cells;
        }
      ScaleStats& s = n.stats_[l];
      s.mean = sum / static_cast<double>(count);
      s.variance = std::max(0.0, sumsq / static_cast<double>(count) - s.mean * s.mean);
      s.degenerate = s.variance < ScaleStats::kEpsilon;
    }
    return n;
  }

  static ScaleNormalizer from_stats(std::vector<ScaleStats> stats) {
    ScaleNormalizer n;
    n.stats_ = std::move(stats);
    return n;
  }

  const ScaleStats& stats(int layer) const { return stats_.at(layer); }
  int layers() const { return static_cast<int>(stats_.size()); }

  double normalize(int layer, double x) const {
    const auto& s = stats_[layer];
    return (x - s.mean) / s.stddev();
  }

  double denormalize(int layer, double z) const {
    const auto& s = stats_[layer];
    return z * s.stddev() + s.mean;
  }

private:
  std::vector<ScaleStats> stats_;
};

// Normalized copy of the full series, same layout, floating point.
struct NormalizedSeries {
  ScaleNormalizer normalizer;
  std::vector<std::vector<double>> data;  // per layer, same indexing as FlowSeries
};

inline NormalizedSeries scale_normalize(const FlowSeries& fs, SlotRange train) {
  NormalizedSeries out;
  out.normalizer = ScaleNormalizer::fit(fs, train);
  const auto& cfg = fs.hierarchy();
  out.data.resize(cfg.layers());
  for (int l = 0; l < cfg.layers(); ++l) {
    const auto& raw = fs.layer_data(l);
    out.data[l].resize(raw.size());
    for (size_t i = 0; i < raw.size(); ++i)
      out.data[l][i] = out.normalizer.normalize(l, raw[i]);
  }
  return out;
}

}  // namespace o4ast
