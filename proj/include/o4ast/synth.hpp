#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "geo.hpp"
#include "ingest.hpp"

namespace o4ast {

// Synthetic corpus generator. The construction is deliberately
// heterogeneous in predictability: single-cell periodic hotspots are easy
// to predict, background cells carry sparse Poisson noise, autoregressive
// cells reward fine-scale short-lag models, and split blocks have a
// deterministic block total that is divided randomly among three sibling
// cells, so the block is far more predictable than its parts. Hotspots
// occupy exactly one cell each, so unpredictable remainders are
// independent across cells.

struct SynthHotspot {
  double row = 0.0, col = 0.0;   // center, atomic cell units
  double sigma = 0.0;            // bump radius in cells; <= 0 means a single cell
  double amplitude = 10.0;       // peak mean events per slot
  double daily_weight = 0.8;
  double weekly_weight = 0.0;
  double phase = 0.0;            // radians, applied to the daily component
  bool deterministic = false;    // emit round(rate) instead of Poisson(rate)
};

struct SynthSplitBlock {
  int block_row = 0, block_col = 0;  // 2x2 atomic block coordinates
  double total_amplitude = 60.0;     // deterministic daily total of 3 cells
  int hotspot_child = 3;             // ordinal 0..3; gets its own clean signal
  double hotspot_amplitude = 40.0;
};

// A cell driven by a mean-reverting first-order autoregressive level rather
// than a periodic profile. Its short-lag dynamics reward fine-scale lag
// models, while at coarser scales these cells are drowned out by the
// periodic hotspot mass, so their parents are served poorly by the shared
// coarse-scale weights.
struct SynthARCell {
  int row = 0, col = 0;
  double amplitude = 20.0;       // mean events per slot at level 1.0
  double rho = 0.85;             // lag-1 coefficient of the latent level
  double innovation_sd = 0.35;   // std-dev of the level innovations
};

struct SynthSpec {
  int height = 32;
  int width = 32;
  int channels = 1;
  int slots = 1000;
  long long slot_seconds = 3600;
  long long t0 = 0;
  int slots_per_day = 24;
  int slots_per_week = 168;
  double noise_level = 0.3;  // background Poisson rate per cell per slot
  std::vector<SynthHotspot> hotspots;
  std::vector<SynthSplitBlock> split_blocks;
  std::vector<SynthARCell> ar_cells;
};

// Default corpus scaled to the raster size. Hotspots are single cells so
// each cell's unpredictable remainder is independent of its neighbours';
// that keeps cross-cell error correlation near zero by construction, which
// is what lets per-grid losses compose faithfully into region losses.
// Mixed daily/weekly weights and phases keep the cells heterogeneous for
// per-scale shared-weight models.
inline SynthSpec default_synth_spec(int height = 32, int width = 32,
                                    int slots = 1000) {
  SynthSpec spec;
  spec.height = height;
  spec.width = width;
  spec.slots = slots;
  std::mt19937_64 hrng(4242);
  std::uniform_real_distribution<double> uamp(8.0, 30.0);
  std::uniform_real_distribution<double> uphase(0.0, 6.28);
  for (int r = 3; r < height; r += 5)
    for (int c = 2; c < width; c += 7) {
      SynthHotspot hs;
      hs.row = r;
      hs.col = c;
      hs.sigma = 0.0;
      hs.amplitude = uamp(hrng);
      hs.daily_weight = 0.8;
      hs.weekly_weight = (r + c) % 3 == 0 ? 0.4 : 0.0;
      hs.phase = uphase(hrng);
      spec.hotspots.push_back(hs);
    }
  const int bh = height / 2, bw = width / 2;
  spec.split_blocks = {
      {bh / 4, bw / 4, 50.0, 3, 36.0},
      {(3 * bh) / 4, (3 * bw) / 4, 44.0, 0, 30.0},
  };
  // Autoregressive cells on a sparse lattice, kept clear of the hotspot
  // bumps and split blocks so each one dominates its own parent grid.
  for (int r = 1; r < height; r += 4)
    for (int c = 1; c < width; c += 4) {
      bool clear = true;
      for (const auto& hs : spec.hotspots) {
        const double d2 = (r + 0.5 - hs.row) * (r + 0.5 - hs.row) +
                          (c + 0.5 - hs.col) * (c + 0.5 - hs.col);
        const double keep = std::max(1.5, 2.5 * hs.sigma);
        if (d2 < keep * keep) clear = false;
      }
      for (const auto& sb : spec.split_blocks)
        if (r / 2 == sb.block_row && c / 2 == sb.block_col) clear = false;
      if (clear) spec.ar_cells.push_back({r, c, 20.0, 0.85, 0.35});
    }
  return spec;
}

namespace synth_detail {

inline double profile(const SynthSpec& spec, double daily_w, double weekly_w,
                      double phase, int t) {
  const double day = 2.0 * M_PI * t / spec.slots_per_day;
  const double week = 2.0 * M_PI * t / spec.slots_per_week;
  return std::max(0.0, 1.0 + daily_w * std::sin(day + phase) +
                           weekly_w * std::sin(week + 0.5 * phase));
}

inline void emit_events(std::vector<EventRecord>& out, std::mt19937_64& rng,
                        const SynthSpec& spec, const Georef& geo, int row, int col,
                        int slot, int channel, long long count) {
  std::uniform_real_distribution<double> uni(0.05, 0.95);
  const double dlat = geo.cell_meters / Georef::kMetersPerDegLat;
  const double dlng = geo.cell_meters / geo.meters_per_deg_lng();
  for (long long i = 0; i < count; ++i) {
    EventRecord r;
    r.timestamp = spec.t0 + slot * spec.slot_seconds +
                  static_cast<long long>(uni(rng) * spec.slot_seconds);
    r.lat = geo.origin_lat - (row + uni(rng)) * dlat;
    r.lng = geo.origin_lng + (col + uni(rng)) * dlng;
    r.channel = channel;
    out.push_back(r);
  }
}

}  // namespace synth_detail

inline std::vector<EventRecord> generate_synthetic(const SynthSpec& spec,
                                                   const Georef& geo,
                                                   uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<EventRecord> out;

  // Per-cell mean rate from hotspot bumps; amplitudes below a floor are
  // dropped so point hotspots stay confined to their own cell.
  std::vector<std::vector<std::pair<size_t, double>>> bump_weights(
      spec.hotspots.size());
  for (size_t g = 0; g < spec.hotspots.size(); ++g) {
    const auto& hs = spec.hotspots[g];
    for (int r = 0; r < spec.height; ++r)
      for (int c = 0; c < spec.width; ++c) {
        double w;
        if (hs.sigma <= 0.0) {
          w = (r == static_cast<int>(hs.row) && c == static_cast<int>(hs.col))
                  ? 1.0
                  : 0.0;
        } else {
          const double d2 = (r + 0.5 - hs.row) * (r + 0.5 - hs.row) +
                            (c + 0.5 - hs.col) * (c + 0.5 - hs.col);
          w = std::exp(-d2 / (2.0 * hs.sigma * hs.sigma));
        }
        if (w * hs.amplitude >= 0.05)
          bump_weights[g].push_back({static_cast<size_t>(r) * spec.width + c, w});
      }
  }

  std::vector<double> ar_level(spec.ar_cells.size(), 1.0);

  for (int t = 0; t < spec.slots; ++t) {
    // Advance the latent autoregressive levels once per slot.
    for (size_t i = 0; i < spec.ar_cells.size(); ++i) {
      const auto& ac = spec.ar_cells[i];
      std::normal_distribution<double> innov(0.0, ac.innovation_sd);
      ar_level[i] = 1.0 + ac.rho * (ar_level[i] - 1.0) + innov(rng);
    }
    for (int ch = 0; ch < spec.channels; ++ch) {
      // Hotspots.
      for (size_t g = 0; g < spec.hotspots.size(); ++g) {
        const auto& hs = spec.hotspots[g];
        const double prof =
            synth_detail::profile(spec, hs.daily_weight, hs.weekly_weight,
                                  hs.phase, t);
        for (const auto& [cell, w] : bump_weights[g]) {
          const double rate = hs.amplitude * w * prof / spec.channels;
          long long count;
          if (hs.deterministic) {
            count = static_cast<long long>(std::llround(rate));
          } else {
            std::poisson_distribution<long long> poisson(rate);
            count = rate > 0.0 ? poisson(rng) : 0;
          }
          if (count > 0)
            synth_detail::emit_events(out, rng, spec, geo,
                                      static_cast<int>(cell) / spec.width,
                                      static_cast<int>(cell) % spec.width, t, ch,
                                      count);
        }
      }
      // Split blocks: deterministic total, random three-way division.
      for (const auto& sb : spec.split_blocks) {
        const double prof = synth_detail::profile(spec, 0.8, 0.0, 0.0, t);
        const long long total = static_cast<long long>(
            std::llround(sb.total_amplitude * prof / spec.channels));
        std::vector<int> members;
        for (int o = 0; o < 4; ++o)
          if (o != sb.hotspot_child) members.push_back(o);
        std::exponential_distribution<double> expo(1.0);
        double g0 = expo(rng), g1 = expo(rng), g2 = expo(rng);
        const double gsum = g0 + g1 + g2;
        const double p0 = g0 / gsum, p1 = g1 / gsum;
        long long counts[3] = {0, 0, 0};
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        for (long long i = 0; i < total; ++i) {
          const double u = u01(rng);
          counts[u < p0 ? 0 : (u < p0 + p1 ? 1 : 2)] += 1;
        }
        for (int m = 0; m < 3; ++m) {
          const int o = members[m];
          synth_detail::emit_events(out, rng, spec, geo, sb.block_row * 2 + o / 2,
                                    sb.block_col * 2 + o % 2, t, ch, counts[m]);
        }
        const long long hot = static_cast<long long>(std::llround(
            sb.hotspot_amplitude *
            synth_detail::profile(spec, 0.9, 0.0, 1.3, t) / spec.channels));
        synth_detail::emit_events(out, rng, spec, geo,
                                  sb.block_row * 2 + sb.hotspot_child / 2,
                                  sb.block_col * 2 + sb.hotspot_child % 2, t, ch,
                                  hot);
      }
      // Autoregressive cells: deterministic counts from the latent level, so
      // the cell is clean given its own recent history.
      for (size_t i = 0; i < spec.ar_cells.size(); ++i) {
        const auto& ac = spec.ar_cells[i];
        const long long count = static_cast<long long>(
            std::llround(ac.amplitude * std::max(0.0, ar_level[i]) /
                         spec.channels));
        if (count > 0)
          synth_detail::emit_events(out, rng, spec, geo, ac.row, ac.col, t, ch,
                                    count);
      }
      // Background noise.
      if (spec.noise_level > 0.0) {
        std::poisson_distribution<long long> poisson(spec.noise_level);
        for (int r = 0; r < spec.height; ++r)
          for (int c = 0; c < spec.width; ++c) {
            const long long count = poisson(rng);
            if (count > 0)
              synth_detail::emit_events(out, rng, spec, geo, r, c, t, ch, count);
          }
      }
    }
  }
  return out;
}

}  // namespace o4ast
