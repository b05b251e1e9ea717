#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "config.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "flow_series.hpp"
#include "index.hpp"
#include "ingest.hpp"
#include "io_util.hpp"
#include "metrics.hpp"
#include "predictor.hpp"
#include "search.hpp"

namespace o4ast {

// Content-digest stage cache: a stage is skipped when its outputs exist and
// the recorded digest of (input files + parameters) is unchanged.
class ArtifactCache {
 public:
  explicit ArtifactCache(std::string work_dir) : dir_(std::move(work_dir)) {
    std::filesystem::create_directories(dir_);
  }

  std::string path(const std::string& name) const {
    return (std::filesystem::path(dir_) / name).string();
  }

  // Returns true when the stage was executed (cache miss).
  bool ensure(const std::string& stage, const std::vector<std::string>& inputs,
              const std::string& params, const std::vector<std::string>& outputs,
              const std::function<void()>& run) {
    Fnv1a64 h;
    for (const auto& in : inputs) {
      if (!std::filesystem::exists(in))
        raise(ErrorKind::NotFound,
              "stage '" + stage + "' is missing input artifact: " + in);
      const uint64_t d = digest_file(in);
      h.update(&d, sizeof(d));
    }
    h.update(params.data(), params.size());
    const std::string digest = hex_digest(h.digest());
    const std::string stamp = path(stage + ".stamp");
    bool fresh = std::filesystem::exists(stamp);
    for (const auto& out : outputs)
      fresh = fresh && std::filesystem::exists(out);
    if (fresh) {
      std::ifstream in(stamp);
      std::string recorded;
      in >> recorded;
      if (recorded == digest) return false;
    }
    run();
    std::ofstream out(stamp, std::ios::trunc);
    out << digest << "\n";
    return true;
  }

 private:
  std::string dir_;
};

inline void save_split_json(const SplitRanges& s, const std::string& path) {
  nlohmann::json j{{"train", {s.train.begin, s.train.end}},
                   {"validation", {s.validation.begin, s.validation.end}},
                   {"test", {s.test.begin, s.test.end}}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) raise(ErrorKind::Io, "cannot write split file: " + path);
  out << j.dump(2) << "\n";
}

inline SplitRanges load_split_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::Io, "cannot open split file: " + path);
  nlohmann::json j;
  try {
    in >> j;
    auto range = [&](const char* key) {
      return SlotRange{j.at(key).at(0).get<int>(), j.at(key).at(1).get<int>()};
    };
    SplitRanges s;
    s.train = range("train");
    s.validation = range("validation");
    s.test = range("test");
    return s;
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorKind::Schema, "bad split file " + path + ": " + e.what());
  }
}

struct PipelineOptions {
  DatasetConfig dataset;
  std::string work_dir;
  std::string events_csv;  // input event file
  BaselineKind baseline = BaselineKind::LagLeastSquares;
  TemporalFeatureSpec features;
  int query_count = 500;
  int query_task = 2;
  uint64_t seed = 7;
};

struct PipelineResult {
  std::vector<std::string> executed;  // stages that ran (cache misses)
  std::string report_path;
};

inline nlohmann::json strategy_summary_json(const StrategySummary& s,
                                            bool with_prop) {
  nlohmann::json j{{"rmse", s.rmse},
                   {"mape", s.mape_defined ? nlohmann::json(s.mape)
                                           : nlohmann::json(nullptr)}};
  if (with_prop) {
    j["prop"] = s.prop;
    j["imprv"] =
        s.imprv_defined ? nlohmann::json(s.imprv) : nlohmann::json(nullptr);
  }
  return j;
}

inline nlohmann::json evaluation_report_json(const EvaluationReport& r) {
  return nlohmann::json{
      {"queries", r.queries},
      {"entries_per_query", r.entries_per_query},
      {"mape_epsilon", r.mape_epsilon},
      {"direct", strategy_summary_json(r.direct, false)},
      {"union", strategy_summary_json(r.union_only, true)},
      {"union_subtraction", strategy_summary_json(r.union_subtraction, true)}};
}

// Offline chain: events -> flows -> split -> fit/predict -> search -> index
// -> evaluation report. Each stage caches on content digests.
inline PipelineResult run_pipeline(const PipelineOptions& opt) {
  ArtifactCache cache(opt.work_dir);
  PipelineResult result;
  auto ran = [&](const std::string& stage, bool executed) {
    if (executed) result.executed.push_back(stage);
  };
  const HierarchyConfig cfg = opt.dataset.hierarchy();
  const std::string flows = cache.path("flows.bin");
  const std::string split_path = cache.path("split.json");
  const std::string preds = cache.path("predictions.bin");
  const std::string table_path = cache.path("table.bin");
  const std::string index_path = cache.path("index.bin");
  const std::string report_path = cache.path("eval.json");
  result.report_path = report_path;

  std::ostringstream dataset_params;
  dataset_params << cfg.raw_height() << 'x' << cfg.raw_width();
  for (int k : cfg.windows()) dataset_params << ',' << k;
  dataset_params << ";slot=" << opt.dataset.slot_seconds;

  ran("aggregate",
      cache.ensure("aggregate", {opt.events_csv}, dataset_params.str(), {flows},
                   [&] {
                     const auto records = read_event_csv_file(opt.events_csv);
                     FlowSeries fs =
                         slot_records(records, cfg, opt.dataset.geo,
                                      opt.dataset.slot_seconds,
                                      opt.dataset.channels);
                     aggregate_scales(fs);
                     save_flow_series(fs, flows);
                   }));

  ran("split", cache.ensure("split", {flows}, "70/10/20", {split_path}, [&] {
        const FlowSeries fs = load_flow_series(flows);
        save_split_json(split_dataset(fs.slots()), split_path);
      }));

  auto load_split = [&] { return load_split_json(split_path); };

  std::ostringstream fit_params;
  fit_params << baseline_name(opt.baseline) << ";c=" << opt.features.closeness
             << ";d=" << opt.features.daily << ";w=" << opt.features.weekly
             << ";spd=" << opt.features.slots_per_day
             << ";spw=" << opt.features.slots_per_week;

  ran("predict",
      cache.ensure("predict", {flows, split_path}, fit_params.str(), {preds},
                   [&] {
                     const FlowSeries fs = load_flow_series(flows);
                     const SplitRanges s = load_split();
                     const BaselineModel model =
                         fit_baseline(fs, opt.features, s.train, opt.baseline);
                     const SlotRange scored{s.validation.begin, s.test.end};
                     const PredictionStore store = predict_store(model, fs, scored);
                     save_prediction_store(store, preds);
                   }));

  ran("search",
      cache.ensure("search", {flows, split_path, preds}, "union+subtraction",
                   {table_path}, [&] {
                     const FlowSeries fs = load_flow_series(flows);
                     const SplitRanges s = load_split();
                     const PredictionStore store = load_prediction_store(preds);
                     CombinationTable table =
                         dp_union_search(store, fs, s.validation);
                     subtraction_search(table, store, fs, s.validation);
                     save_combination_table(table, table_path);
                   }));

  ran("index", cache.ensure("index", {table_path}, "", {index_path}, [&] {
        const CombinationTable table = load_combination_table(table_path);
        save_index(CombinationIndex::build(table), index_path);
      }));

  std::ostringstream eval_params;
  eval_params << "q=" << opt.query_count << ";task=" << opt.query_task
              << ";seed=" << opt.seed
              << ";cell_m=" << opt.dataset.geo.cell_meters;

  ran("evaluate",
      cache.ensure("evaluate", {flows, split_path, preds, table_path},
                   eval_params.str(), {report_path}, [&] {
                     const FlowSeries fs = load_flow_series(flows);
                     const SplitRanges s = load_split();
                     const PredictionStore store = load_prediction_store(preds);
                     const CombinationTable table =
                         load_combination_table(table_path);
                     std::mt19937_64 rng(opt.seed);
                     const int cells = task_query_cells(
                         opt.query_task, opt.dataset.geo.cell_meters);
                     std::vector<RasterRegion> queries;
                     queries.reserve(static_cast<size_t>(opt.query_count));
                     for (int i = 0; i < opt.query_count; ++i)
                       queries.push_back(i % 2 == 0
                                             ? random_rectangle_query(cfg, rng, cells)
                                             : random_polyomino_query(cfg, rng, cells));
                     const EvaluationReport report =
                         evaluate_strategies(queries, table, store, fs, s.test);
                     std::ofstream out(report_path, std::ios::trunc);
                     out << evaluation_report_json(report).dump(2) << "\n";
                   }));
  return result;
}

}  // namespace o4ast
