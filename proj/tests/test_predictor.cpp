#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "helpers.hpp"
#include "o4ast/predictor.hpp"

using namespace o4ast;

namespace {

TemporalFeatureSpec short_spec() {
  TemporalFeatureSpec spec;
  spec.closeness = 3;
  spec.daily = 2;
  spec.weekly = 0;
  spec.slots_per_day = 10;
  spec.slots_per_week = 70;
  return spec;
}

// Reference least-squares solver: Gaussian elimination with partial
// pivoting on the ridge normal equations, independent of Eigen.
std::vector<double> solve_normal_equations(std::vector<std::vector<double>> a,
                                           std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return x;
}

}  // namespace

TEST_CASE("history-mean predicts the mean of the lag values") {
  HierarchyConfig cfg(4, 4, {2});
  const FlowSeries fs = testing::make_series(
      cfg, 1, 40, [](int, int t, int r, int c) {
        return static_cast<uint32_t>(t + 3 * r + c);
      });
  const auto spec = short_spec();
  const auto model = fit_baseline(fs, spec, {0, 30}, BaselineKind::HistoryMean);
  // Lags at t=30 for cell (1,2): slots 27,28,29 (closeness) and 10,20 (daily).
  const double expected = (32.0 + 33.0 + 34.0 + 15.0 + 25.0) / 5.0;
  CHECK(predict_cell(model, fs, 0, 0, 1, 2, 30) == Catch::Approx(expected));
}

TEST_CASE("lag least squares matches an independent normal-equation solve") {
  HierarchyConfig cfg(4, 4, {2});
  const FlowSeries fs = testing::random_series(cfg, 1, 60, 21, 20);
  const auto spec = short_spec();
  const SlotRange train{0, 45};
  const auto model = fit_baseline(fs, spec, train, BaselineKind::LagLeastSquares);

  const auto offsets = spec.lag_offsets();
  const int f = static_cast<int>(offsets.size());
  for (int l = 0; l < cfg.layers(); ++l) {
    std::vector<std::vector<double>> xtx(f, std::vector<double>(f, 0.0));
    std::vector<double> xty(f, 0.0);
    std::vector<double> row(f);
    for (int t = spec.min_slot(); t < train.end; ++t)
      for (int r = 0; r < cfg.layer_height(l); ++r)
        for (int c = 0; c < cfg.layer_width(l); ++c) {
          temporal_feature_row(fs, l, 0, r, c, t, offsets, row.data());
          for (double& v : row) v = model.normalizer.normalize(l, v);
          const double y = model.normalizer.normalize(l, fs.at(l, 0, t, r, c));
          for (int i = 0; i < f; ++i) {
            xty[i] += y * row[i];
            for (int j = 0; j < f; ++j) xtx[i][j] += row[i] * row[j];
          }
        }
    for (int i = 0; i < f; ++i) xtx[i][i] += kRidgeLambda;
    const auto reference = solve_normal_equations(xtx, xty);
    for (int i = 0; i < f; ++i)
      CHECK(model.weights[l][i] == Catch::Approx(reference[i]).margin(1e-8));
  }
}

TEST_CASE("lag least squares recovers an exact autoregression") {
  HierarchyConfig cfg(4, 4, {2});
  // x_t = x_{t-1} + 1 exactly, different intercept trajectory per cell.
  const FlowSeries fs = testing::make_series(
      cfg, 1, 60, [](int, int t, int r, int c) {
        return static_cast<uint32_t>(t + 5 * r + 2 * c);
      });
  TemporalFeatureSpec spec;
  spec.closeness = 2;
  spec.daily = 0;
  spec.weekly = 0;
  spec.slots_per_day = 10;
  spec.slots_per_week = 70;
  const auto model = fit_baseline(fs, spec, {0, 45}, BaselineKind::LagLeastSquares);
  const auto store = predict_store(model, fs, {45, 60});
  for (int t = 45; t < 60; ++t)
    CHECK(store.at(0, 0, t, 2, 1) ==
          Catch::Approx(fs.at(0, 0, t, 2, 1)).epsilon(1e-3));
}

TEST_CASE("predictions are clamped at zero") {
  HierarchyConfig cfg(4, 4, {2});
  const FlowSeries fs = testing::random_series(cfg, 1, 40, 2, 3);
  auto model = fit_baseline(fs, short_spec(), {0, 30}, BaselineKind::LagLeastSquares);
  // Force strongly negative weights; output must still be >= 0.
  for (auto& w : model.weights)
    for (double& v : w) v = -10.0;
  const auto store = predict_store(model, fs, {30, 35});
  for (int t = 30; t < 35; ++t)
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) CHECK(store.at(0, 0, t, r, c) >= 0.0);
}

TEST_CASE("multiscale loss total is the per-scale sum") {
  HierarchyConfig cfg(8, 8, {2, 2});
  const FlowSeries fs = testing::random_series(cfg, 1, 30, 31, 12);
  const PredictionStore store = testing::noisy_store(fs, {10, 30}, 4, 1.0);
  const MultiscaleLoss loss = multiscale_loss(store, fs, {10, 30});
  double sum = 0.0;
  for (double s : loss.per_scale) sum += s;
  CHECK(std::abs(loss.total - sum) < 1e-12);
  CHECK(loss.per_scale.size() == 3);
}

TEST_CASE("prediction CSV export/import round-trip") {
  HierarchyConfig cfg(4, 4, {2});
  const FlowSeries fs = testing::random_series(cfg, 2, 20, 8, 10);
  const PredictionStore store = testing::noisy_store(fs, {5, 12}, 1, 0.5);
  std::stringstream csv;
  export_predictions_csv(store, csv);
  const PredictionStore back =
      import_predictions_csv(csv, cfg, 2, store.provenance());
  CHECK(back == store);
}

TEST_CASE("prediction CSV import rejects bad inputs") {
  HierarchyConfig cfg(4, 4, {2});
  const std::string header = "scale,row,col,channel,slot,value\n";
  auto kind_of = [&](const std::string& body) {
    std::istringstream in(header + body);
    try {
      import_predictions_csv(in, cfg, 1, "test");
      return std::string("none");
    } catch (const Error& e) {
      switch (e.kind()) {
        case ErrorKind::Schema: return std::string("schema");
        case ErrorKind::IncompleteStore: return std::string("incomplete");
        default: return std::string("other");
      }
    }
  };
  // Duplicate key.
  CHECK(kind_of("1,0,0,0,5,1\n1,0,0,0,5,2\n") == "schema");
  // Unknown scale.
  CHECK(kind_of("3,0,0,0,5,1\n") == "schema");
  // Coverage gap: one atomic cell present, the rest missing.
  CHECK(kind_of("1,0,0,0,5,1\n") == "incomplete");
}

TEST_CASE("prediction store binary round-trip and model persistence") {
  HierarchyConfig cfg(6, 6, {2, 3});
  const FlowSeries fs = testing::random_series(cfg, 1, 50, 12, 8);
  const auto spec = short_spec();
  const auto model = fit_baseline(fs, spec, {0, 40}, BaselineKind::LagLeastSquares);
  const auto store = predict_store(model, fs, {40, 50});

  const auto dir = std::filesystem::temp_directory_path();
  const std::string spath = (dir / "o4ast_test_store.bin").string();
  const std::string mpath = (dir / "o4ast_test_model.bin").string();
  save_prediction_store(store, spath);
  CHECK(load_prediction_store(spath) == store);

  save_baseline_model(model, cfg.layers(), mpath);
  const auto mback = load_baseline_model(mpath);
  CHECK(mback.kind == model.kind);
  CHECK(mback.spec.lag_offsets() == spec.lag_offsets());
  for (int l = 0; l < cfg.layers(); ++l) {
    CHECK(mback.weights[l] == model.weights[l]);
    CHECK(mback.normalizer.stats(l).mean == model.normalizer.stats(l).mean);
  }
  std::filesystem::remove(spath);
  std::filesystem::remove(mpath);
}
