#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "o4ast/features.hpp"
#include "o4ast/normalize.hpp"

using namespace o4ast;

TEST_CASE("default lag layout: 6 closeness + 7 daily + 4 weekly") {
  TemporalFeatureSpec spec;
  CHECK(spec.count() == 17);
  CHECK(spec.min_slot() == 4 * 168);
  const auto offsets = spec.lag_offsets();
  REQUIRE(offsets.size() == 17);
  CHECK(offsets == std::vector<int>{6, 5, 4, 3, 2, 1, 168, 144, 120, 96, 72, 48,
                                    24, 672, 504, 336, 168});
}

TEST_CASE("feature rows carry the lagged values") {
  HierarchyConfig cfg(4, 4, {2});
  // Cell value encodes the slot so lags are directly visible.
  const FlowSeries fs = testing::make_series(
      cfg, 1, 40, [](int, int t, int r, int c) {
        return static_cast<uint32_t>(10 * t + r + c);
      });
  TemporalFeatureSpec spec;
  spec.closeness = 3;
  spec.daily = 2;
  spec.weekly = 0;
  spec.slots_per_day = 10;
  spec.slots_per_week = 70;
  const auto offsets = spec.lag_offsets();
  CHECK(offsets == std::vector<int>{3, 2, 1, 20, 10});
  std::vector<double> row(offsets.size());
  temporal_feature_row(fs, 0, 0, 1, 2, 25, offsets, row.data());
  CHECK(row == std::vector<double>{223, 233, 243, 53, 153});
}

TEST_CASE("bulk features reject insufficient history") {
  HierarchyConfig cfg(4, 4, {2});
  const FlowSeries fs = testing::random_series(cfg, 1, 30, 1);
  TemporalFeatureSpec spec;
  spec.closeness = 2;
  spec.daily = 1;
  spec.weekly = 0;
  spec.slots_per_day = 10;
  spec.slots_per_week = 70;
  CHECK(build_temporal_features(fs, 0, spec, 10).size() == 16);
  try {
    build_temporal_features(fs, 0, spec, 9);
    FAIL("expected horizon error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Horizon);
  }
}

TEST_CASE("invalid feature specs are rejected") {
  TemporalFeatureSpec spec;
  spec.closeness = 0;
  spec.daily = 0;
  spec.weekly = 0;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = TemporalFeatureSpec{};
  spec.slots_per_week = spec.slots_per_day;
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("scale normalization yields unit train statistics") {
  HierarchyConfig cfg(8, 8, {2, 2});
  const FlowSeries fs = testing::random_series(cfg, 1, 60, 9, 30);
  const SlotRange train{0, 40};
  const ScaleNormalizer n = ScaleNormalizer::fit(fs, train);
  for (int l = 0; l < cfg.layers(); ++l) {
    double sum = 0.0, sumsq = 0.0;
    size_t count = 0;
    for (int t = train.begin; t < train.end; ++t)
      for (int r = 0; r < cfg.layer_height(l); ++r)
        for (int c = 0; c < cfg.layer_width(l); ++c) {
          const double z = n.normalize(l, fs.at(l, 0, t, r, c));
          sum += z;
          sumsq += z * z;
          ++count;
        }
    const double mean = sum / count;
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(sumsq / count - mean * mean - 1.0) < 1e-6);
  }
}

TEST_CASE("degenerate scales pass through as zeros") {
  HierarchyConfig cfg(4, 4, {2});
  const FlowSeries fs =
      testing::make_series(cfg, 1, 10, [](int, int, int, int) { return 7u; });
  const ScaleNormalizer n = ScaleNormalizer::fit(fs, {0, 10});
  CHECK(n.stats(0).degenerate);
  CHECK(n.normalize(0, 7.0) == 0.0);
  CHECK(n.denormalize(0, 0.0) == 7.0);
}

TEST_CASE("normalize/denormalize round-trip") {
  HierarchyConfig cfg(8, 8, {2, 2});
  const FlowSeries fs = testing::random_series(cfg, 1, 50, 13, 100);
  const ScaleNormalizer n = ScaleNormalizer::fit(fs, {0, 35});
  for (int l = 0; l < cfg.layers(); ++l)
    for (double x : {0.0, 1.5, 99.0, 1234.5})
      CHECK(std::abs(n.denormalize(l, n.normalize(l, x)) - x) < 1e-9);
}
