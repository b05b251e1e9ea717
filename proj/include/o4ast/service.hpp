#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "decompose.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "geo.hpp"
#include "index.hpp"
#include "io_util.hpp"
#include "predictor.hpp"

namespace o4ast {

struct QueryRequest {
  std::optional<std::vector<GeoPoint>> polygon;
  std::optional<RasterRegion> mask;
  int slot = 0;
  Strategy strategy = Strategy::UnionSubtraction;
};

struct QueryGridInfo {
  GridCode code;
  std::string trace;
};

struct QueryResponse {
  std::vector<double> value;  // per channel, clamped at 0
  std::vector<QueryGridInfo> grids;
  long long decompose_us = 0;
  long long lookup_us = 0;
  long long aggregate_us = 0;
  long long total_us = 0;
};

struct HealthReport {
  bool ready = false;
  SlotRange slot_range{0, 0};
};

struct StatsReport {
  bool ready = false;
  SlotRange slot_range{0, 0};
  std::string snapshot_digest;
  long long queries = 0;
  long long errors = 0;
  double p50_us = 0.0;
  double p99_us = 0.0;
  double max_us = 0.0;
};

namespace service_detail {

inline double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double idx = p * (static_cast<double>(v.size()) - 1.0);
  const size_t lo = static_cast<size_t>(idx);
  const size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = idx - static_cast<double>(lo);
  return v[lo] + (v[hi] - v[lo]) * frac;
}

}  // namespace service_detail

// Online query service. Predictions and index are immutable snapshots;
// publishing swaps a shared_ptr under a short lock, so every query runs
// against exactly one snapshot and never observes a partial update.
class QueryService {
 public:
  QueryService(Georef geo, std::shared_ptr<const CombinationIndex> index)
      : geo_(geo), index_(std::move(index)) {
    if (!index_) raise(ErrorKind::Config, "service requires an index");
  }

  const HierarchyConfig& hierarchy() const { return index_->hierarchy(); }

  // Publishes `store` if it covers `upcoming_slot`; otherwise the previous
  // snapshot is retained and false is returned.
  bool sync_predictions(std::shared_ptr<const PredictionStore> store,
                        int upcoming_slot) {
    if (!store || !store->range().contains(upcoming_slot)) return false;
    if (!(store->hierarchy() == index_->hierarchy()))
      raise(ErrorKind::Shape, "prediction store does not match the index raster");
    std::lock_guard<std::mutex> lock(snapshot_mu_);
    snapshot_ = std::move(store);
    return true;
  }

  std::shared_ptr<const PredictionStore> snapshot() const {
    std::lock_guard<std::mutex> lock(snapshot_mu_);
    return snapshot_;
  }

  QueryResponse handle_query(const QueryRequest& req) {
    const auto t_start = std::chrono::steady_clock::now();
    const auto snap = snapshot();
    if (!snap) {
      count_error();
      raise(ErrorKind::Config, "service not ready: no published snapshot");
    }
    if (!snap->range().contains(req.slot)) {
      count_error();
      raise(ErrorKind::NotFound, "slot outside published range");
    }
    if (req.polygon.has_value() == req.mask.has_value()) {
      count_error();
      raise(ErrorKind::Config,
            "request needs exactly one of polygon and mask");
    }
    const auto& cfg = index_->hierarchy();
    QueryResponse resp;
    try {
      RasterRegion region =
          req.polygon ? rasterize_polygon(*req.polygon, geo_, cfg) : *req.mask;
      const auto t_raster = std::chrono::steady_clock::now();
      const auto grids = hierarchical_decompose(region, cfg);
      const auto t_decomp = std::chrono::steady_clock::now();

      Combination combo;
      resp.grids.reserve(grids.size());
      for (const auto& g : grids) {
        if (req.strategy == Strategy::Direct) {
          combo = combo.concat(g.direct_combination());
          resp.grids.push_back({g.code, "direct"});
        } else {
          const IndexLookup hit = index_->lookup(g.code);
          const bool best = req.strategy == Strategy::UnionSubtraction;
          combo = combo.concat(best ? hit.entry->best : hit.entry->union_best);
          resp.grids.push_back(
              {g.code,
               trace_name(best ? hit.entry->best_trace : hit.entry->union_trace)});
        }
      }
      const auto t_lookup = std::chrono::steady_clock::now();

      combo = combo.simplified();
      resp.value.assign(static_cast<size_t>(snap->channels()), 0.0);
      for (int ch = 0; ch < snap->channels(); ++ch)
        resp.value[static_cast<size_t>(ch)] =
            std::max(0.0, combination_value(*snap, combo, ch, req.slot));
      const auto t_end = std::chrono::steady_clock::now();

      auto us = [](auto a, auto b) {
        return std::chrono::duration_cast<std::chrono::microseconds>(b - a).count();
      };
      resp.decompose_us = us(t_raster, t_decomp);
      resp.lookup_us = us(t_decomp, t_lookup);
      resp.aggregate_us = us(t_lookup, t_end);
      resp.total_us = us(t_start, t_end);
    } catch (...) {
      count_error();
      throw;
    }
    record_latency(static_cast<double>(resp.total_us));
    return resp;
  }

  HealthReport health() const {
    HealthReport h;
    const auto snap = snapshot();
    h.ready = snap != nullptr;
    if (snap) h.slot_range = snap->range();
    return h;
  }

  StatsReport stats() const {
    StatsReport s;
    const auto snap = snapshot();
    s.ready = snap != nullptr;
    if (snap) {
      s.slot_range = snap->range();
      s.snapshot_digest = hex_digest(snap->digest());
    }
    std::lock_guard<std::mutex> lock(mu_);
    s.queries = queries_;
    s.errors = errors_;
    s.p50_us = service_detail::percentile(latencies_us_, 0.50);
    s.p99_us = service_detail::percentile(latencies_us_, 0.99);
    s.max_us = latencies_us_.empty()
                   ? 0.0
                   : *std::max_element(latencies_us_.begin(), latencies_us_.end());
    return s;
  }

 private:
  void record_latency(double us) {
    std::lock_guard<std::mutex> lock(mu_);
    ++queries_;
    latencies_us_.push_back(us);
  }

  void count_error() {
    std::lock_guard<std::mutex> lock(mu_);
    ++errors_;
  }

  Georef geo_;
  std::shared_ptr<const CombinationIndex> index_;
  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const PredictionStore> snapshot_;
  mutable std::mutex mu_;
  long long queries_ = 0;
  long long errors_ = 0;
  std::vector<double> latencies_us_;
};

}  // namespace o4ast
