#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "error.hpp"
#include "features.hpp"
#include "flow_series.hpp"
#include "io_util.hpp"
#include "normalize.hpp"

namespace o4ast {

// Predicted flow per (scale, row, col, channel, slot) for a contiguous
// slot range, de-normalized to flow units and clamped at zero.
class PredictionStore {
public:
  PredictionStore() = default;

  PredictionStore(HierarchyConfig cfg, int channels, SlotRange range,
                  std::string provenance)
      : cfg_(std::move(cfg)), channels_(channels), range_(range),
        provenance_(std::move(provenance)) {
    if (range_.length() <= 0) raise(ErrorKind::Config, "empty prediction range");
    data_.resize(cfg_.layers());
    for (int l = 0; l < cfg_.layers(); ++l)
      data_[l].assign(
          static_cast<size_t>(channels_) * range_.length() * cfg_.cell_count(l), 0.0);
  }

  const HierarchyConfig& hierarchy() const { return cfg_; }
  int channels() const { return channels_; }
  SlotRange range() const { return range_; }
  const std::string& provenance() const { return provenance_; }
  void set_provenance(std::string p) { provenance_ = std::move(p); }

  size_t index(int layer, int channel, int slot, int row, int col) const {
    return ((static_cast<size_t>(channel) * range_.length() + (slot - range_.begin)) *
                cfg_.layer_height(layer) + row) * cfg_.layer_width(layer) + col;
  }

  double at(int layer, int channel, int slot, int row, int col) const {
    if (!range_.contains(slot))
      raise(ErrorKind::NotFound, "slot " + std::to_string(slot) + " outside store range");
    return data_[layer][index(layer, channel, slot, row, col)];
  }
  double& ref(int layer, int channel, int slot, int row, int col) {
    return data_[layer][index(layer, channel, slot, row, col)];
  }

  const std::vector<double>& layer_data(int layer) const { return data_[layer]; }
  std::vector<double>& layer_data(int layer) { return data_[layer]; }

  uint64_t digest() const {
    Fnv1a64 h;
    for (const auto& d : data_) h.update(d.data(), d.size() * sizeof(double));
    h.update_scalar(range_.begin);
    h.update_scalar(range_.end);
    return h.digest();
  }

  bool operator==(const PredictionStore& o) const {
    return cfg_ == o.cfg_ && channels_ == o.channels_ &&
           range_.begin == o.range_.begin && range_.end == o.range_.end &&
           data_ == o.data_;
  }

private:
  HierarchyConfig cfg_;
  int channels_ = 0;
  SlotRange range_{0, 0};
  std::string provenance_;
  std::vector<std::vector<double>> data_;
};

enum class BaselineKind { HistoryMean, LagLeastSquares };

inline const char* baseline_name(BaselineKind k) {
  return k == BaselineKind::HistoryMean ? "history-mean" : "lag-least-squares";
}

struct BaselineModel {
  BaselineKind kind = BaselineKind::HistoryMean;
  TemporalFeatureSpec spec;
  ScaleNormalizer normalizer;                 // lag-least-squares only
  std::vector<std::vector<double>> weights;   // per layer (lag-least-squares)
};

inline constexpr double kRidgeLambda = 1e-3;

// history-mean: per-cell mean of the lag values. lag-least-squares: one
// ridge-regularized weight vector per scale over normalized lag features.
inline BaselineModel fit_baseline(const FlowSeries& fs,
                                  const TemporalFeatureSpec& spec, SlotRange train,
                                  BaselineKind kind) {
  spec.validate();
  BaselineModel model;
  model.kind = kind;
  model.spec = spec;
  if (kind == BaselineKind::HistoryMean) return model;

  if (train.end <= spec.min_slot())
    raise(ErrorKind::Horizon, "training range shorter than the longest lag");
  model.normalizer = ScaleNormalizer::fit(fs, train);

  const auto offsets = spec.lag_offsets();
  const int f = static_cast<int>(offsets.size());
  const auto& cfg = fs.hierarchy();
  model.weights.resize(cfg.layers());
  std::vector<double> row(f);
  for (int l = 0; l < cfg.layers(); ++l) {
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(f, f);
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(f);
    Eigen::VectorXd feat(f);
    for (int c = 0; c < fs.channels(); ++c)
      for (int t = std::max(train.begin, spec.min_slot()); t < train.end; ++t)
        for (int r = 0; r < cfg.layer_height(l); ++r)
          for (int cc = 0; cc < cfg.layer_width(l); ++cc) {
            temporal_feature_row(fs, l, c, r, cc, t, offsets, row.data());
            for (int i = 0; i < f; ++i)
              feat(i) = model.normalizer.normalize(l, row[i]);
            const double y =
                model.normalizer.normalize(l, fs.at(l, c, t, r, cc));
            xtx.selfadjointView<Eigen::Lower>().rankUpdate(feat);
            xty += y * feat;
          }
    xtx = xtx.selfadjointView<Eigen::Lower>();
    xtx.diagonal().array() += kRidgeLambda;
    Eigen::LDLT<Eigen::MatrixXd> solver(xtx);
    if (solver.info() != Eigen::Success)
      raise(ErrorKind::Numeric,
            "singular normal matrix at scale " + std::to_string(cfg.scale(l)));
    const Eigen::VectorXd w = solver.solve(xty);
    if (!w.allFinite())
      raise(ErrorKind::Numeric,
            "non-finite solution at scale " + std::to_string(cfg.scale(l)));
    model.weights[l].assign(w.data(), w.data() + f);
  }
  return model;
}

inline double predict_cell(const BaselineModel& model, const FlowSeries& fs,
                           int layer, int channel, int row, int col, int t) {
  const auto offsets = model.spec.lag_offsets();
  std::vector<double> raw(offsets.size());
  temporal_feature_row(fs, layer, channel, row, col, t, offsets, raw.data());
  double value;
  if (model.kind == BaselineKind::HistoryMean) {
    double sum = 0.0;
    for (double x : raw) sum += x;
    value = sum / static_cast<double>(raw.size());
  } else {
    double z = 0.0;
    for (size_t i = 0; i < raw.size(); ++i)
      z += model.weights[layer][i] * model.normalizer.normalize(layer, raw[i]);
    value = model.normalizer.denormalize(layer, z);
  }
  return std::max(0.0, value);
}

inline PredictionStore predict_store(const BaselineModel& model,
                                     const FlowSeries& fs, SlotRange range) {
  if (range.begin < model.spec.min_slot())
    raise(ErrorKind::Horizon, "prediction range starts before lags are available");
  if (range.end > fs.slots())
    raise(ErrorKind::IncompleteStore, "prediction range beyond the series");
  const auto& cfg = fs.hierarchy();
  PredictionStore store(cfg, fs.channels(), range, baseline_name(model.kind));
  const auto offsets = model.spec.lag_offsets();
  std::vector<double> raw(offsets.size());
  for (int l = 0; l < cfg.layers(); ++l)
    for (int c = 0; c < fs.channels(); ++c)
      for (int t = range.begin; t < range.end; ++t)
        for (int r = 0; r < cfg.layer_height(l); ++r)
          for (int cc = 0; cc < cfg.layer_width(l); ++cc)
            store.ref(l, c, t, r, cc) = predict_cell(model, fs, l, c, r, cc, t);
  return store;
}

struct MultiscaleLoss {
  std::vector<double> per_scale;  // MSE per layer
  double total = 0.0;             // unweighted sum
};

// Per-scale MSE of the store against the truth over `range`; normalized
// values when a normalizer is supplied, raw flows otherwise.
inline MultiscaleLoss multiscale_loss(const PredictionStore& store,
                                      const FlowSeries& truth, SlotRange range,
                                      const ScaleNormalizer* normalizer = nullptr) {
  if (range.begin < store.range().begin || range.end > store.range().end)
    raise(ErrorKind::IncompleteStore, "store does not cover the loss range");
  const auto& cfg = truth.hierarchy();
  MultiscaleLoss out;
  out.per_scale.resize(cfg.layers(), 0.0);
  for (int l = 0; l < cfg.layers(); ++l) {
    double sse = 0.0;
    size_t count = 0;
    for (int c = 0; c < truth.channels(); ++c)
      for (int t = range.begin; t < range.end; ++t)
        for (int r = 0; r < cfg.layer_height(l); ++r)
          for (int cc = 0; cc < cfg.layer_width(l); ++cc) {
            double pred = store.at(l, c, t, r, cc);
            double tru = truth.at(l, c, t, r, cc);
            if (normalizer) {
              pred = normalizer->normalize(l, pred);
              tru = normalizer->normalize(l, tru);
            }
            const double d = pred - tru;
            sse += d * d;
            ++count;
          }
    out.per_scale[l] = sse / static_cast<double>(count);
    out.total += out.per_scale[l];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Import / export.
// CSV: header `scale,row,col,channel,slot,value`, one row per key,
// duplicates forbidden; coverage over an inferred contiguous slot range.

inline void export_predictions_csv(const PredictionStore& store, std::ostream& out) {
  const auto& cfg = store.hierarchy();
  out << "scale,row,col,channel,slot,value\n";
  out.precision(17);
  for (int l = 0; l < cfg.layers(); ++l)
    for (int r = 0; r < cfg.layer_height(l); ++r)
      for (int cc = 0; cc < cfg.layer_width(l); ++cc)
        for (int c = 0; c < store.channels(); ++c)
          for (int t = store.range().begin; t < store.range().end; ++t)
            out << cfg.scale(l) << ',' << r << ',' << cc << ',' << c << ',' << t
                << ',' << store.at(l, c, t, r, cc) << '\n';
}

inline PredictionStore import_predictions_csv(std::istream& in,
                                              const HierarchyConfig& cfg,
                                              int channels,
                                              const std::string& provenance) {
  std::string line;
  if (!std::getline(in, line))
    raise(ErrorKind::IncompleteStore, "empty prediction file");
  using Key = std::tuple<int, int, int, int, int>;  // layer,row,col,channel,slot
  std::map<Key, double> values;
  int min_slot = INT32_MAX, max_slot = INT32_MIN;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    int scale, row, col, channel, slot;
    double value;
    char comma;
    ss >> scale >> comma >> row >> comma >> col >> comma >> channel >> comma >>
        slot >> comma >> value;
    if (ss.fail())
      raise(ErrorKind::Schema, "bad prediction row at line " + std::to_string(lineno));
    const int layer = cfg.layer_of_scale(scale);  // Schema error if unknown
    if (row < 0 || col < 0 || row >= cfg.layer_height(layer) ||
        col >= cfg.layer_width(layer) || channel < 0 || channel >= channels)
      raise(ErrorKind::Schema, "key out of range at line " + std::to_string(lineno));
    const Key key{layer, row, col, channel, slot};
    if (values.count(key))
      raise(ErrorKind::Schema, "duplicate key at line " + std::to_string(lineno));
    values[key] = value;
    min_slot = std::min(min_slot, slot);
    max_slot = std::max(max_slot, slot);
  }
  if (values.empty())
    raise(ErrorKind::IncompleteStore, "prediction file has no entries");

  const SlotRange range{min_slot, max_slot + 1};
  PredictionStore store(cfg, channels, range, provenance);
  std::vector<std::string> gaps;
  for (int l = 0; l < cfg.layers(); ++l)
    for (int r = 0; r < cfg.layer_height(l); ++r)
      for (int cc = 0; cc < cfg.layer_width(l); ++cc)
        for (int c = 0; c < channels; ++c)
          for (int t = range.begin; t < range.end; ++t) {
            const auto it = values.find({l, r, cc, c, t});
            if (it == values.end()) {
              if (gaps.size() < 10)
                gaps.push_back("scale=" + std::to_string(cfg.scale(l)) +
                               " row=" + std::to_string(r) +
                               " col=" + std::to_string(cc) +
                               " channel=" + std::to_string(c) +
                               " slot=" + std::to_string(t));
              continue;
            }
            store.ref(l, c, t, r, cc) = it->second;
          }
  if (!gaps.empty()) {
    std::string msg = "incomplete prediction store; first gaps:";
    for (const auto& g : gaps) msg += "\n  " + g;
    raise(ErrorKind::IncompleteStore, msg);
  }
  return store;
}

inline PredictionStore import_predictions_csv_file(const std::string& path,
                                                   const HierarchyConfig& cfg,
                                                   int channels) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::Io, "cannot open prediction file: " + path);
  return import_predictions_csv(in, cfg, channels,
                                "import:" + hex_digest(digest_file(path)));
}

// Columnar binary variant: flow-file style header plus a float payload.
namespace pred_io {
inline constexpr char kMagic[16] = {'O', '4', 'A', 'S', 'T', 'P', 'R', 'E',
                                    'D', 'S', 'T', 'O', 'R', 'E', '\0', '\0'};
inline constexpr uint32_t kVersion = 1;
}  // namespace pred_io

inline void save_prediction_store(const PredictionStore& store,
                                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::Io, "cannot write prediction file: " + path);
  write_bytes(out, pred_io::kMagic, sizeof(pred_io::kMagic));
  write_scalar<uint32_t>(out, pred_io::kVersion);
  const auto& cfg = store.hierarchy();
  write_scalar<uint32_t>(out, static_cast<uint32_t>(cfg.raw_height()));
  write_scalar<uint32_t>(out, static_cast<uint32_t>(cfg.raw_width()));
  write_scalar<uint32_t>(out, static_cast<uint32_t>(cfg.windows().size()));
  for (int k : cfg.windows()) write_scalar<uint32_t>(out, static_cast<uint32_t>(k));
  write_scalar<uint32_t>(out, static_cast<uint32_t>(store.channels()));
  write_scalar<int32_t>(out, store.range().begin);
  write_scalar<int32_t>(out, store.range().end);
  write_string(out, store.provenance());
  for (int l = 0; l < cfg.layers(); ++l) {
    const auto& d = store.layer_data(l);
    write_bytes(out, d.data(), d.size() * sizeof(double));
  }
  if (!out) raise(ErrorKind::Io, "write failed: " + path);
}

inline PredictionStore load_prediction_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::Io, "cannot open prediction file: " + path);
  char magic[16];
  read_bytes(in, magic, sizeof(magic), "magic");
  if (std::memcmp(magic, pred_io::kMagic, sizeof(magic)) != 0)
    raise(ErrorKind::Format, "bad magic in prediction file: " + path);
  if (read_scalar<uint32_t>(in, "version") != pred_io::kVersion)
    raise(ErrorKind::Format, "unsupported prediction file version");
  const int raw_h = static_cast<int>(read_scalar<uint32_t>(in, "height"));
  const int raw_w = static_cast<int>(read_scalar<uint32_t>(in, "width"));
  const int nw = static_cast<int>(read_scalar<uint32_t>(in, "window count"));
  if (nw < 1 || nw > 32) raise(ErrorKind::Corruption, "implausible window count");
  std::vector<int> windows(nw);
  for (int i = 0; i < nw; ++i)
    windows[i] = static_cast<int>(read_scalar<uint32_t>(in, "window"));
  const int channels = static_cast<int>(read_scalar<uint32_t>(in, "channels"));
  const int begin = read_scalar<int32_t>(in, "range begin");
  const int end = read_scalar<int32_t>(in, "range end");
  const std::string provenance = read_string(in, "provenance");
  PredictionStore store(HierarchyConfig(raw_h, raw_w, windows), channels,
                        {begin, end}, provenance);
  for (int l = 0; l < store.hierarchy().layers(); ++l) {
    auto& d = store.layer_data(l);
    read_bytes(in, d.data(), d.size() * sizeof(double), "prediction values");
  }
  return store;
}

// Baseline model file: kind, feature spec, per-scale stats and weights.
namespace model_io {
inline constexpr char kMagic[16] = {'O', '4', 'A', 'S', 'T', 'B', 'A', 'S',
                                    'E', 'M', 'O', 'D', 'E', 'L', '\0', '\0'};
inline constexpr uint32_t kVersion = 1;
}  // namespace model_io

inline void save_baseline_model(const BaselineModel& model, int layers,
                                const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::Io, "cannot write model file: " + path);
  write_bytes(out, model_io::kMagic, sizeof(model_io::kMagic));
  write_scalar<uint32_t>(out, model_io::kVersion);
  write_scalar<uint8_t>(out, model.kind == BaselineKind::HistoryMean ? 0 : 1);
  write_scalar<int32_t>(out, model.spec.closeness);
  write_scalar<int32_t>(out, model.spec.daily);
  write_scalar<int32_t>(out, model.spec.weekly);
  write_scalar<int32_t>(out, model.spec.slots_per_day);
  write_scalar<int32_t>(out, model.spec.slots_per_week);
  const bool fitted = model.kind == BaselineKind::LagLeastSquares;
  write_scalar<uint32_t>(out, fitted ? static_cast<uint32_t>(layers) : 0u);
  for (int l = 0; fitted && l < layers; ++l) {
    const auto& s = model.normalizer.stats(l);
    write_scalar<double>(out, s.mean);
    write_scalar<double>(out, s.variance);
    write_scalar<uint8_t>(out, s.degenerate ? 1 : 0);
    const auto& w = model.weights.at(static_cast<size_t>(l));
    write_scalar<uint32_t>(out, static_cast<uint32_t>(w.size()));
    write_bytes(out, w.data(), w.size() * sizeof(double));
  }
  if (!out) raise(ErrorKind::Io, "write failed: " + path);
}

inline BaselineModel load_baseline_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::Io, "cannot open model file: " + path);
  char magic[16];
  read_bytes(in, magic, sizeof(magic), "magic");
  if (std::memcmp(magic, model_io::kMagic, sizeof(magic)) != 0)
    raise(ErrorKind::Format, "bad magic in model file: " + path);
  if (read_scalar<uint32_t>(in, "version") != model_io::kVersion)
    raise(ErrorKind::Format, "unsupported model file version");
  BaselineModel model;
  model.kind = read_scalar<uint8_t>(in, "kind") == 0
                   ? BaselineKind::HistoryMean
                   : BaselineKind::LagLeastSquares;
  model.spec.closeness = read_scalar<int32_t>(in, "closeness");
  model.spec.daily = read_scalar<int32_t>(in, "daily");
  model.spec.weekly = read_scalar<int32_t>(in, "weekly");
  model.spec.slots_per_day = read_scalar<int32_t>(in, "slots_per_day");
  model.spec.slots_per_week = read_scalar<int32_t>(in, "slots_per_week");
  const uint32_t layers = read_scalar<uint32_t>(in, "layer count");
  if (layers > 64) raise(ErrorKind::Corruption, "implausible layer count");
  std::vector<ScaleStats> stats(layers);
  model.weights.resize(layers);
  for (uint32_t l = 0; l < layers; ++l) {
    stats[l].mean = read_scalar<double>(in, "mean");
    stats[l].variance = read_scalar<double>(in, "variance");
    stats[l].degenerate = read_scalar<uint8_t>(in, "degenerate flag") != 0;
    const uint32_t n = read_scalar<uint32_t>(in, "weight count");
    if (n > (1u << 20)) raise(ErrorKind::Corruption, "implausible weight count");
    model.weights[l].resize(n);
    read_bytes(in, model.weights[l].data(), n * sizeof(double), "weights");
  }
  model.normalizer = ScaleNormalizer::from_stats(std::move(stats));
  return model;
}

}  // namespace o4ast
