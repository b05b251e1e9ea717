#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "helpers.hpp"
#include "o4ast/brute_force.hpp"
#include "o4ast/search.hpp"

using namespace o4ast;

namespace {

// acc[entry] perturbations let each test dial in which grids predict well.
PredictionStore store_from(const FlowSeries& fs, SlotRange range,
                           const std::function<double(int l, int t, int r, int c)>& bias) {
  const auto& cfg = fs.hierarchy();
  PredictionStore store(cfg, fs.channels(), range, "test-bias");
  for (int l = 0; l < cfg.layers(); ++l)
    for (int t = range.begin; t < range.end; ++t)
      for (int r = 0; r < cfg.layer_height(l); ++r)
        for (int c = 0; c < cfg.layer_width(l); ++c)
          store.ref(l, 0, t, r, c) = fs.at(l, 0, t, r, c) + bias(l, t, r, c);
  return store;
}

}  // namespace

TEST_CASE("combination_value sums signed store entries") {
  HierarchyConfig cfg(4, 4, {2});
  const FlowSeries fs = testing::make_series(
      cfg, 1, 5, [](int, int t, int r, int c) {
        return static_cast<uint32_t>(10 * r + c + t);
      });
  PredictionStore store = testing::noisy_store(fs, {0, 5}, 1, 0.0);
  Combination combo;
  combo.add(1, 0, 0, +1).add(0, 1, 1, -1);
  const double expected = fs.at(1, 0, 3, 0, 0) - static_cast<double>(fs.at(0, 0, 3, 1, 1));
  CHECK(combination_value(store, combo, 0, 3) == Catch::Approx(expected));
}

TEST_CASE("combination_loss hand fixture") {
  HierarchyConfig cfg(4, 4, {2});
  const FlowSeries fs =
      testing::make_series(cfg, 1, 4, [](int, int, int, int) { return 2u; });
  // Store off by +1 on one atomic cell; region = that single cell.
  PredictionStore store = store_from(fs, {0, 4}, [](int l, int, int r, int c) {
    return (l == 0 && r == 0 && c == 0) ? 1.0 : 0.0;
  });
  SignedGrid mask(4, 4);
  mask.at(0, 0) = 1;
  Combination combo;
  combo.add(0, 0, 0, +1);
  CHECK(combination_loss(cfg, combo, store, fs, mask, {0, 4}) == Catch::Approx(1.0));

  // A combination with a double-counted cell must be rejected.
  Combination bad;
  bad.add(0, 0, 0, +1).add(0, 0, 0, +1);
  CHECK_THROWS_AS(combination_loss(cfg, bad, store, fs, mask, {0, 4}), Error);
}

TEST_CASE("dp union search prefers accurate children and ties go direct") {
  HierarchyConfig cfg(4, 4, {2, 2});
  const FlowSeries fs = testing::random_series(cfg, 1, 20, 5, 8);
  // Atomic layer is exact; coarser layers are biased: children must win
  // everywhere above layer 0.
  PredictionStore noisy = store_from(fs, {0, 20}, [](int l, int, int, int) {
    return l == 0 ? 0.0 : 3.0;
  });
  CombinationTable table = dp_union_search(noisy, fs, {0, 20});
  const auto& top = table.entries.at(code_of(cfg, 2, 0, 0));
  CHECK(top.best_trace == CombinationTrace::UnionOfChildren);
  CHECK(top.best.terms.size() == 16);
  for (const auto& t : top.best.terms) CHECK(t.layer == 0);
  CHECK(top.best_loss == Catch::Approx(0.0).margin(1e-18));

  // Exact store everywhere: every loss ties at zero, direct wins.
  PredictionStore exact = store_from(fs, {0, 20}, [](int, int, int, int) { return 0.0; });
  table = dp_union_search(exact, fs, {0, 20});
  for (const auto& [code, e] : table.entries)
    CHECK(e.best_trace == CombinationTrace::Direct);
}

TEST_CASE("dp entries always dominate the direct prediction") {
  HierarchyConfig cfg(8, 8, {2, 2});
  const FlowSeries fs = testing::random_series(cfg, 1, 30, 77, 10);
  const PredictionStore store = testing::noisy_store(fs, {0, 30}, 3, 1.5);
  const CombinationTable table = dp_union_search(store, fs, {0, 30});
  for (int l = 0; l < cfg.layers(); ++l)
    for (int r = 0; r < cfg.layer_height(l); ++r)
      for (int c = 0; c < cfg.layer_width(l); ++c) {
        const auto& e = table.entries.at(code_of(cfg, l, r, c));
        Combination direct;
        direct.add(l, r, c, +1);
        const double direct_loss = search_detail::combo_loss_against_cells(
            store, direct, fs, l, {{r, c}}, {0, 30});
        CHECK(e.best_loss <= direct_loss + 1e-12);
      }
}

TEST_CASE("brute force never loses to the dp on unions") {
  HierarchyConfig cfg(4, 4, {2, 2});
  const FlowSeries fs = testing::random_series(cfg, 1, 25, 11, 9);
  const PredictionStore store = testing::noisy_store(fs, {0, 25}, 9, 1.0);
  const CombinationTable table = dp_union_search(store, fs, {0, 25});
  for (int l = 0; l < cfg.layers(); ++l)
    for (int r = 0; r < cfg.layer_height(l); ++r)
      for (int c = 0; c < cfg.layer_width(l); ++c) {
        const int s = cfg.scale(l);
        SignedGrid region(cfg.height(), cfg.width());
        for (int i = r * s; i < (r + 1) * s; ++i)
          for (int j = c * s; j < (c + 1) * s; ++j) region.at(i, j) = 1;
        const auto bf = brute_force_union_search(cfg, region, store, fs, {0, 25});
        const auto& e = table.entries.at(code_of(cfg, l, r, c));
        CHECK(bf.best_loss <= e.best_loss + 1e-12);
      }
}

TEST_CASE("subtraction search dominates unions and can strictly win") {
  HierarchyConfig cfg(4, 4, {2});
  const FlowSeries fs = testing::random_series(cfg, 1, 40, 13, 8);
  // Parent predictions and single-cell (0,0) predictions are exact; all
  // other atomic predictions carry heavy noise. For the triomino 'J'
  // (omits A) parent-minus-A is then exact while the member union is not.
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 4.0);
  PredictionStore store = store_from(fs, {0, 40}, [&](int l, int, int r, int c) {
    if (l == 1) return 0.0;
    if (l == 0 && r == 0 && c == 0) return 0.0;
    return n(rng);
  });
  CombinationTable table = dp_union_search(store, fs, {0, 40});
  subtraction_search(table, store, fs, {0, 40});

  bool strict_win = false;
  for (const auto& code : enumerate_multi_codes(cfg)) {
    const auto& e = table.entries.at(code);
    CHECK(e.best_loss <= e.union_loss + 1e-12);
    if (e.best_trace == CombinationTrace::ParentMinusComplement &&
        e.best_loss < e.union_loss - 1e-9)
      strict_win = true;
  }
  CHECK(strict_win);

  const auto& j = table.entries.at(multi_code_of(cfg, 0, 0, 0, 'J'));
  CHECK(j.best_trace == CombinationTrace::ParentMinusComplement);
  CHECK(j.best_loss == Catch::Approx(0.0).margin(1e-18));
}

TEST_CASE("multi-grid entries stay valid combinations") {
  HierarchyConfig cfg(8, 8, {2, 2});
  const FlowSeries fs = testing::random_series(cfg, 1, 20, 17, 7);
  const PredictionStore store = testing::noisy_store(fs, {0, 20}, 8, 2.0);
  CombinationTable table = dp_union_search(store, fs, {0, 20});
  subtraction_search(table, store, fs, {0, 20});
  for (const auto& code : enumerate_multi_codes(cfg)) {
    const auto& e = table.entries.at(code);
    const DecodedCode d = decode(cfg, code);
    SignedGrid mask(cfg.height(), cfg.width());
    const int s = cfg.scale(d.layer);
    for (const auto& [r, c] : d.cells)
      for (int i = r * s; i < (r + 1) * s; ++i)
        for (int j = c * s; j < (c + 1) * s; ++j) mask.at(i, j) = 1;
    CHECK(combination_valid_for(cfg, e.best.simplified(), mask));
    CHECK(combination_valid_for(cfg, e.union_best.simplified(), mask));
  }
}

TEST_CASE("search count closed form matches the double sum") {
  for (int k = 2; k <= 4; ++k)
    for (int layers = 2; layers <= 5; ++layers) {
      long long n_atomic = 1;
      for (int i = 0; i < layers - 1; ++i) n_atomic *= static_cast<long long>(k) * k;
      CHECK(search_count_closed_form(n_atomic, k, layers) ==
            search_count_double_sum(n_atomic, k, layers));
    }
  // 8x8 with three window-2 layers: 16 + (16 + 4) + ... spot value.
  CHECK(search_count_double_sum(64, 2, 3) == 16 + 16 + 4);
}

TEST_CASE("combination table round-trips through its binary file") {
  HierarchyConfig cfg(8, 8, {2, 2});
  const FlowSeries fs = testing::random_series(cfg, 1, 15, 29, 6);
  const PredictionStore store = testing::noisy_store(fs, {0, 15}, 2, 1.0);
  CombinationTable table = dp_union_search(store, fs, {0, 15});
  subtraction_search(table, store, fs, {0, 15});

  const auto path =
      (std::filesystem::temp_directory_path() / "o4ast_test_table.bin").string();
  save_combination_table(table, path);
  const CombinationTable back = load_combination_table(path);
  REQUIRE(back.entries.size() == table.entries.size());
  for (const auto& [code, e] : table.entries) {
    const auto& b = back.entries.at(code);
    CHECK(b.best == e.best);
    CHECK(b.best_loss == e.best_loss);
    CHECK(b.best_trace == e.best_trace);
    CHECK(b.union_best == e.union_best);
    CHECK(b.union_loss == e.union_loss);
    CHECK(b.union_trace == e.union_trace);
  }

  // Corrupt the magic: load must fail with a format error.
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.put('X');
  }
  CHECK_THROWS_AS(load_combination_table(path), Error);
  std::filesystem::remove(path);
}
