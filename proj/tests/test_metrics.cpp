#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "o4ast/metrics.hpp"

using namespace o4ast;

TEST_CASE("rmse and mape hand fixtures") {
  const Metrics m = compute_metrics({1.0, 2.0}, {3.0, 2.0});
  CHECK(m.rmse == Catch::Approx(std::sqrt(2.0)));
  CHECK(m.entries == 2);
  CHECK(m.mape_defined);
  CHECK(m.mape_entries == 2);
  CHECK(m.mape == Catch::Approx((2.0 / 3.0 + 0.0) / 2.0));
}

TEST_CASE("mape skips below-threshold truth and can be undefined") {
  // Truth 0.5 sits below the count threshold of 1.
  const Metrics partial = compute_metrics({1.0, 4.0}, {0.5, 2.0});
  CHECK(partial.mape_entries == 1);
  CHECK(partial.mape == Catch::Approx(1.0));

  const Metrics none = compute_metrics({1.0, 1.0}, {0.0, 0.5});
  CHECK_FALSE(none.mape_defined);
  CHECK(none.mape_entries == 0);
  CHECK(none.rmse == Catch::Approx(std::sqrt((1.0 + 0.25) / 2.0)));
}

TEST_CASE("metrics input validation") {
  CHECK_THROWS_AS(compute_metrics({1.0}, {1.0, 2.0}), Error);
  CHECK_THROWS_AS(compute_metrics({}, {}), Error);
}

TEST_CASE("sample acf of a periodic series is near one at its period") {
  std::vector<double> x(480);
  for (size_t t = 0; t < x.size(); ++t)
    x[t] = 10.0 + 5.0 * std::sin(2.0 * M_PI * static_cast<double>(t) / 24.0);
  CHECK(sample_acf(x, 24) == Catch::Approx(1.0).margin(0.06));
  CHECK(sample_acf(x, 12) == Catch::Approx(-1.0).margin(0.06));
}

TEST_CASE("sample acf is invariant under affine transforms") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(300), y(300);
  for (size_t t = 0; t < x.size(); ++t) {
    x[t] = n(rng);
    y[t] = 7.0 - 3.5 * x[t];
  }
  for (int lag : {1, 5, 24})
    CHECK(sample_acf(y, lag) == Catch::Approx(sample_acf(x, lag)).margin(1e-9));
}

TEST_CASE("white-noise acf stays within the sampling bound") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(4000);
  for (double& v : x) v = n(rng);
  for (int lag : {1, 7, 24, 100})
    CHECK(std::abs(sample_acf(x, lag)) < 3.0 / std::sqrt(4000.0));
}

TEST_CASE("sample acf edge cases") {
  std::vector<double> flat(50, 4.0);
  CHECK(std::isnan(sample_acf(flat, 5)));
  std::vector<double> x{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(sample_acf(x, 0), Error);
  CHECK_THROWS_AS(sample_acf(x, 3), Error);
}

TEST_CASE("acf profile skips padding and counts degenerate grids") {
  // 3x3 raster with a window of 2 pads to 4x4; the padded column/row cells
  // are excluded, so layer 0 uses 9 grids, layer 1 uses 4.
  HierarchyConfig cfg(3, 3, {2});
  const FlowSeries fs = testing::make_series(
      cfg, 1, 96, [](int, int t, int r, int c) {
        if (r == 0 && c == 0) return 5u;  // constant -> degenerate
        return static_cast<uint32_t>(3 + (t % 24) + r + c);
      });
  const auto profile = acf_profile(fs, {1, 24});
  REQUIRE(profile.size() == 2);
  CHECK(profile[0].grids_used + profile[0].grids_degenerate == 9);
  CHECK(profile[0].grids_degenerate == 1);
  CHECK(profile[0].defined);
  CHECK(profile[1].grids_used + profile[1].grids_degenerate == 4);
  CHECK(profile[1].defined);
}

TEST_CASE("acf profile of a fully constant series is undefined") {
  HierarchyConfig cfg(4, 4, {2});
  const FlowSeries fs =
      testing::make_series(cfg, 1, 50, [](int, int, int, int) { return 2u; });
  for (const auto& prof : acf_profile(fs, {1})) {
    CHECK_FALSE(prof.defined);
    CHECK(prof.grids_used == 0);
  }
}

TEST_CASE("aggregation smooths noise: coarser scales have higher daily acf") {
  HierarchyConfig cfg(16, 16, {2, 2});
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<uint32_t> noise(0, 6);
  const FlowSeries fs = testing::make_series(
      cfg, 1, 240, [&](int, int t, int r, int c) {
        const uint32_t seasonal = static_cast<uint32_t>(4 + 3 * ((t / 12) % 2));
        return seasonal + noise(rng) + static_cast<uint32_t>((r + c) % 2);
      });
  const auto profile = acf_profile(fs, {24});
  REQUIRE(profile.size() == 3);
  CHECK(profile[0].mean_acf <= profile[1].mean_acf);
  CHECK(profile[1].mean_acf <= profile[2].mean_acf);
}
