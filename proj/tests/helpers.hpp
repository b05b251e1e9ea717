#pragma once

#include <functional>
#include <random>

#include "o4ast/flow_series.hpp"
#include "o4ast/geo.hpp"
#include "o4ast/ingest.hpp"
#include "o4ast/predictor.hpp"

namespace o4ast::testing {

inline Georef test_georef(double cell_meters = 100.0) {
  Georef geo;
  geo.origin_lat = 40.75;
  geo.origin_lng = -74.0;
  geo.cell_meters = cell_meters;
  return geo;
}

// FlowSeries filled from a deterministic function of (layer-0 cell, slot).
inline FlowSeries make_series(
    const HierarchyConfig& cfg, int channels, int slots,
    const std::function<uint32_t(int ch, int t, int r, int c)>& f) {
  FlowSeries fs(cfg, channels, slots, 3600, 0);
  for (int ch = 0; ch < channels; ++ch)
    for (int t = 0; t < slots; ++t)
      for (int r = 0; r < cfg.raw_height(); ++r)
        for (int c = 0; c < cfg.raw_width(); ++c)
          fs.at(0, ch, t, r, c) = f(ch, t, r, c);
  aggregate_scales(fs);
  return fs;
}

inline FlowSeries random_series(const HierarchyConfig& cfg, int channels,
                                int slots, uint64_t seed, uint32_t max_count = 9) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<uint32_t> dist(0, max_count);
  return make_series(cfg, channels, slots,
                     [&](int, int, int, int) { return dist(rng); });
}

// Prediction store: truth plus deterministic per-entry noise.
inline PredictionStore noisy_store(const FlowSeries& fs, SlotRange range,
                                   uint64_t seed, double noise) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, noise);
  const auto& cfg = fs.hierarchy();
  PredictionStore store(cfg, fs.channels(), range, "test-noisy");
  for (int l = 0; l < cfg.layers(); ++l)
    for (int ch = 0; ch < fs.channels(); ++ch)
      for (int t = range.begin; t < range.end; ++t)
        for (int r = 0; r < cfg.layer_height(l); ++r)
          for (int c = 0; c < cfg.layer_width(l); ++c)
            store.ref(l, ch, t, r, c) = fs.at(l, ch, t, r, c) + n(rng);
  return store;
}

}  // namespace o4ast::testing
