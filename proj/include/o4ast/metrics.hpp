#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "error.hpp"
#include "flow_series.hpp"

namespace o4ast {

// MAPE ignores entries whose truth is below this count threshold; the
// threshold is echoed in every report.
inline constexpr double kMapeEpsilon = 1.0;

struct Metrics {
  double rmse = 0.0;
  double mape = 0.0;
  bool mape_defined = false;
  size_t entries = 0;       // entries scored by RMSE
  size_t mape_entries = 0;  // entries with truth >= kMapeEpsilon
};

inline Metrics compute_metrics(const std::vector<double>& pred,
                               const std::vector<double>& truth) {
  if (pred.size() != truth.size())
    raise(ErrorKind::Shape, "prediction/truth length mismatch");
  if (pred.empty()) raise(ErrorKind::EmptyDataset, "no entries to score");
  Metrics m;
  m.entries = pred.size();
  double sse = 0.0, ape = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    sse += d * d;
    if (truth[i] >= kMapeEpsilon) {
      ape += std::abs(d) / truth[i];
      ++m.mape_entries;
    }
  }
  m.rmse = std::sqrt(sse / static_cast<double>(pred.size()));
  if (m.mape_entries > 0) {
    m.mape = ape / static_cast<double>(m.mape_entries);
    m.mape_defined = true;
  }
  return m;
}

// Sample autocorrelation at one lag; NaN when the series is (numerically)
// constant.
inline double sample_acf(const std::vector<double>& x, int lag) {
  const int n = static_cast<int>(x.size());
  if (lag <= 0 || lag >= n) raise(ErrorKind::Config, "lag out of range");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double denom = 0.0;
  for (double v : x) denom += (v - mean) * (v - mean);
  if (denom < 1e-12) return std::nan("");
  double num = 0.0;
  for (int t = 0; t + lag < n; ++t) num += (x[t] - mean) * (x[t + lag] - mean);
  return num / denom;
}

struct AcfScaleProfile {
  int scale = 0;
  double mean_acf = 0.0;
  int grids_used = 0;
  int grids_degenerate = 0;
  bool defined = false;  // false when every grid at the scale is degenerate
};

// Per-scale mean of each grid's sample ACF averaged over the given lags.
// Constant grids are excluded and counted.
inline std::vector<AcfScaleProfile> acf_profile(const FlowSeries& fs,
                                                const std::vector<int>& lags) {
  if (lags.empty()) raise(ErrorKind::Config, "no lags given");
  const auto& cfg = fs.hierarchy();
  const int slots = fs.slots();
  for (int lag : lags)
    if (lag <= 0 || lag >= slots)
      raise(ErrorKind::Config, "lag must lie in [1, slots)");
  std::vector<AcfScaleProfile> out(static_cast<size_t>(cfg.layers()));
  for (int l = 0; l < cfg.layers(); ++l) {
    auto& prof = out[static_cast<size_t>(l)];
    prof.scale = cfg.scale(l);
    double sum = 0.0;
    std::vector<double> series(static_cast<size_t>(slots));
    for (int ch = 0; ch < fs.channels(); ++ch)
      for (int r = 0; r < cfg.layer_height(l); ++r)
        for (int c = 0; c < cfg.layer_width(l); ++c) {
          // Skip cells that lie entirely in the zero padding.
          if (r * prof.scale >= cfg.raw_height() || c * prof.scale >= cfg.raw_width())
            continue;
          for (int t = 0; t < slots; ++t)
            series[static_cast<size_t>(t)] = fs.at(l, ch, t, r, c);
          double grid_acf = 0.0;
          bool degenerate = false;
          for (int lag : lags) {
            const double a = sample_acf(series, lag);
            if (std::isnan(a)) {
              degenerate = true;
              break;
            }
            grid_acf += a;
          }
          if (degenerate) {
            ++prof.grids_degenerate;
          } else {
            sum += grid_acf / static_cast<double>(lags.size());
            ++prof.grids_used;
          }
        }
    if (prof.grids_used > 0) {
      prof.mean_acf = sum / prof.grids_used;
      prof.defined = true;
    }
  }
  return out;
}

}  // namespace o4ast
