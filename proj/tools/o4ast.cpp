// Command-line front end: synthetic data, offline pipeline stages, the
// online HTTP service and evaluation reports.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "o4ast/brute_force.hpp"
#include "o4ast/config.hpp"
#include "o4ast/eval.hpp"
#include "o4ast/http_server.hpp"
#include "o4ast/index.hpp"
#include "o4ast/metrics.hpp"
#include "o4ast/pipeline.hpp"
#include "o4ast/search.hpp"
#include "o4ast/service.hpp"
#include "o4ast/synth.hpp"

namespace {

using nlohmann::json;

o4ast::Georef default_georef(double cell_meters = 150.0) {
  o4ast::Georef geo;
  geo.origin_lat = 40.75;
  geo.origin_lng = -74.0;
  geo.cell_meters = cell_meters;
  return geo;
}

void write_config_file(const std::string& path, const o4ast::SynthSpec& spec,
                       const o4ast::Georef& geo) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) o4ast::raise(o4ast::ErrorKind::Io, "cannot write config: " + path);
  out << "origin_lat   = " << geo.origin_lat << "\n"
      << "origin_lng   = " << geo.origin_lng << "\n"
      << "cell_meters  = " << geo.cell_meters << "\n"
      << "height       = " << spec.height << "\n"
      << "width        = " << spec.width << "\n"
      << "windows      = 2,2,2\n"
      << "channels     = " << spec.channels << "\n"
      << "slot_seconds = " << spec.slot_seconds << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"arbitrary-areal-unit flow prediction engine"};
  app.require_subcommand(1);

  std::string config_path, events_path, in_path, out_path, csv_path;
  std::string flows_path, split_path, model_path, preds_path, table_path;
  std::string index_path, listen = "127.0.0.1:8080", work_dir = "work";
  std::string baseline = "lag-least-squares";
  uint64_t seed = 7;
  int slots = 1000, height = 32, width = 32;
  int queries = 500, task = 2, lag = 24;
  bool no_subtraction = false, show_stats = false;
  o4ast::TemporalFeatureSpec features;

  auto* synth = app.add_subcommand("synth", "generate a synthetic event corpus");
  synth->add_option("--out", out_path, "output event CSV")->required();
  synth->add_option("--config-out", config_path, "also write a dataset config");
  synth->add_option("--seed", seed, "RNG seed");
  synth->add_option("--slots", slots, "number of time slots");
  synth->add_option("--height", height, "raster height");
  synth->add_option("--width", width, "raster width");

  auto* ingest = app.add_subcommand("ingest", "bin events into atomic cells");
  ingest->add_option("--config", config_path)->required();
  ingest->add_option("--events", events_path)->required();
  ingest->add_option("--out", out_path, "flow series file")->required();

  auto* aggregate = app.add_subcommand("aggregate", "roll flows up the hierarchy");
  aggregate->add_option("--in", in_path)->required();
  aggregate->add_option("--out", out_path)->required();

  auto* split = app.add_subcommand("split", "70/10/20 train/validation/test split");
  split->add_option("--flows", flows_path)->required();
  split->add_option("--out", out_path)->required();

  auto* fit = app.add_subcommand("fit", "fit a baseline predictor");
  fit->add_option("--flows", flows_path)->required();
  fit->add_option("--split", split_path)->required();
  fit->add_option("--baseline", baseline, "history-mean | lag-least-squares");
  fit->add_option("--closeness", features.closeness);
  fit->add_option("--daily", features.daily);
  fit->add_option("--weekly", features.weekly);
  fit->add_option("--slots-per-day", features.slots_per_day);
  fit->add_option("--slots-per-week", features.slots_per_week);
  fit->add_option("--out", out_path, "model file")->required();

  auto* predict = app.add_subcommand("predict", "fill the multi-scale store");
  predict->add_option("--flows", flows_path)->required();
  predict->add_option("--split", split_path)->required();
  predict->add_option("--model", model_path)->required();
  predict->add_option("--out", out_path, "prediction store file")->required();
  predict->add_option("--csv", csv_path, "also export CSV");

  auto* import = app.add_subcommand("import", "import external predictions");
  import->add_option("--config", config_path)->required();
  import->add_option("--csv", csv_path)->required();
  import->add_option("--out", out_path, "prediction store file")->required();

  auto* search = app.add_subcommand("search", "offline combination search");
  search->add_option("--flows", flows_path)->required();
  search->add_option("--split", split_path)->required();
  search->add_option("--predictions", preds_path)->required();
  search->add_flag("--no-subtraction", no_subtraction, "union search only");
  search->add_option("--out", out_path, "combination table file")->required();

  auto* index = app.add_subcommand("index", "build the extended quad-tree");
  index->add_option("--table", table_path)->required();
  index->add_option("--out", out_path, "index file")->required();
  index->add_flag("--stats", show_stats, "print per-scale node counts and sizes");

  auto* serve = app.add_subcommand("serve", "online HTTP query service");
  serve->add_option("--config", config_path)->required();
  serve->add_option("--index", index_path)->required();
  serve->add_option("--predictions", preds_path)->required();
  serve->add_option("--listen", listen, "host:port");

  auto* eval = app.add_subcommand("eval", "end-to-end pipeline + strategy report");
  eval->add_option("--config", config_path)->required();
  eval->add_option("--events", events_path)->required();
  eval->add_option("--work", work_dir, "artifact directory");
  eval->add_option("--baseline", baseline, "history-mean | lag-least-squares");
  eval->add_option("--queries", queries, "number of evaluation queries");
  eval->add_option("--task", task, "task analogue 1..4 (query area)");
  eval->add_option("--seed", seed, "query RNG seed");
  eval->add_option("--closeness", features.closeness);
  eval->add_option("--daily", features.daily);
  eval->add_option("--weekly", features.weekly);
  eval->add_option("--slots-per-day", features.slots_per_day);
  eval->add_option("--slots-per-week", features.slots_per_week);

  auto* acf = app.add_subcommand("acf", "per-scale autocorrelation profile");
  acf->add_option("--flows", flows_path)->required();
  acf->add_option("--lag", lag, "lag in slots (default daily)");

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) {
    const o4ast::SynthSpec spec = o4ast::default_synth_spec(height, width, slots);
    const o4ast::Georef geo = default_georef();
    const auto records = o4ast::generate_synthetic(spec, geo, seed);
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) o4ast::raise(o4ast::ErrorKind::Io, "cannot write: " + out_path);
    o4ast::write_event_csv(records, out);
    if (!config_path.empty()) write_config_file(config_path, spec, geo);
    std::cerr << "wrote " << records.size() << " events to " << out_path << "\n";
  } else if (ingest->parsed()) {
    const auto cfg = o4ast::load_dataset_config(config_path);
    long long malformed = 0;
    const auto records = o4ast::read_event_csv_file(events_path, &malformed);
    o4ast::FlowSeries fs =
        o4ast::slot_records(records, cfg.hierarchy(), cfg.geo, cfg.slot_seconds,
                            cfg.channels);
    o4ast::save_flow_series(fs, out_path);
    std::cerr << "ingested " << records.size() << " records (" << malformed
              << " malformed, " << fs.dropped_records() << " dropped), "
              << fs.slots() << " slots\n";
  } else if (aggregate->parsed()) {
    o4ast::FlowSeries fs = o4ast::load_flow_series(in_path);
    o4ast::aggregate_scales(fs);
    o4ast::save_flow_series(fs, out_path);
  } else if (split->parsed()) {
    const o4ast::FlowSeries fs = o4ast::load_flow_series(flows_path);
    o4ast::save_split_json(o4ast::split_dataset(fs.slots()), out_path);
  } else if (fit->parsed()) {
    const o4ast::FlowSeries fs = o4ast::load_flow_series(flows_path);
    const o4ast::SplitRanges s = o4ast::load_split_json(split_path);
    const auto kind = baseline == "history-mean"
                          ? o4ast::BaselineKind::HistoryMean
                          : o4ast::BaselineKind::LagLeastSquares;
    if (baseline != "history-mean" && baseline != "lag-least-squares")
      o4ast::raise(o4ast::ErrorKind::Config, "unknown baseline: " + baseline);
    const auto model = o4ast::fit_baseline(fs, features, s.train, kind);
    o4ast::save_baseline_model(model, fs.hierarchy().layers(), out_path);
  } else if (predict->parsed()) {
    const o4ast::FlowSeries fs = o4ast::load_flow_series(flows_path);
    const o4ast::SplitRanges s = o4ast::load_split_json(split_path);
    const auto model = o4ast::load_baseline_model(model_path);
    const o4ast::SlotRange range{s.validation.begin, s.test.end};
    const auto store = o4ast::predict_store(model, fs, range);
    o4ast::save_prediction_store(store, out_path);
    if (!csv_path.empty()) {
      std::ofstream out(csv_path, std::ios::trunc);
      o4ast::export_predictions_csv(store, out);
    }
  } else if (import->parsed()) {
    const auto cfg = o4ast::load_dataset_config(config_path);
    const auto store = o4ast::import_predictions_csv_file(
        csv_path, cfg.hierarchy(), cfg.channels);
    o4ast::save_prediction_store(store, out_path);
  } else if (search->parsed()) {
    const o4ast::FlowSeries fs = o4ast::load_flow_series(flows_path);
    const o4ast::SplitRanges s = o4ast::load_split_json(split_path);
    const auto store = o4ast::load_prediction_store(preds_path);
    o4ast::CombinationTable table = o4ast::dp_union_search(store, fs, s.validation);
    if (!no_subtraction)
      o4ast::subtraction_search(table, store, fs, s.validation);
    o4ast::save_combination_table(table, out_path);
    std::cerr << "searched " << table.entries.size() << " grid codes\n";
  } else if (index->parsed()) {
    const auto table = o4ast::load_combination_table(table_path);
    const auto tree = o4ast::CombinationIndex::build(table);
    o4ast::save_index(tree, out_path);
    if (show_stats) {
      json scales = json::array();
      for (const auto& s : tree.scale_stats()) {
        size_t bytes = 0;
        for (const auto& [code, entry] : tree.all_entries()) {
          const auto d = o4ast::decode(tree.hierarchy(), code);
          if (tree.hierarchy().scale(d.layer) != s.scale) continue;
          bytes += code.size() + 18 +
                   18 * (entry->best.terms.size() + entry->union_best.terms.size());
        }
        scales.push_back({{"scale", s.scale},
                          {"singles", s.singles},
                          {"multis", s.multis},
                          {"approx_bytes", bytes}});
      }
      std::cout << json{{"nodes", tree.node_count()},
                        {"roots", tree.root_count()},
                        {"scales", scales}}
                       .dump(2)
                << "\n";
    }
  } else if (serve->parsed()) {
    const auto cfg = o4ast::load_dataset_config(config_path);
    auto tree = std::make_shared<o4ast::CombinationIndex>(
        o4ast::load_index(index_path));
    auto store = std::make_shared<o4ast::PredictionStore>(
        o4ast::load_prediction_store(preds_path));
    o4ast::QueryService service(cfg.geo, tree);
    if (!service.sync_predictions(store, store->range().begin))
      o4ast::raise(o4ast::ErrorKind::Config, "could not publish predictions");
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos)
      o4ast::raise(o4ast::ErrorKind::Config, "--listen must be host:port");
    const std::string host = listen.substr(0, colon);
    const int port = std::stoi(listen.substr(colon + 1));
    std::cerr << "listening on " << host << ":" << port << "\n";
    return o4ast::run_http_server(service, host, port);
  } else if (eval->parsed()) {
    o4ast::PipelineOptions opt;
    opt.dataset = o4ast::load_dataset_config(config_path);
    opt.work_dir = work_dir;
    opt.events_csv = events_path;
    opt.baseline = baseline == "history-mean"
                       ? o4ast::BaselineKind::HistoryMean
                       : o4ast::BaselineKind::LagLeastSquares;
    opt.features = features;
    opt.query_count = queries;
    opt.query_task = task;
    opt.seed = seed;
    const auto result = o4ast::run_pipeline(opt);
    std::cerr << "stages executed:";
    for (const auto& s : result.executed) std::cerr << ' ' << s;
    if (result.executed.empty()) std::cerr << " (all cached)";
    std::cerr << "\n";
    std::ifstream report(result.report_path);
    std::cout << report.rdbuf();
  } else if (acf->parsed()) {
    const o4ast::FlowSeries fs = o4ast::load_flow_series(flows_path);
    const auto profile = o4ast::acf_profile(fs, {lag});
    json scales = json::array();
    for (const auto& p : profile)
      scales.push_back({{"scale", p.scale},
                        {"mean_acf", p.defined ? json(p.mean_acf) : json(nullptr)},
                        {"grids_used", p.grids_used},
                        {"grids_degenerate", p.grids_degenerate}});
    std::cout << json{{"lag", lag}, {"scales", scales}}.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const o4ast::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
