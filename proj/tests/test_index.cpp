#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "o4ast/index.hpp"

using namespace o4ast;

namespace {

CombinationTable small_table(const HierarchyConfig& cfg, uint64_t seed) {
  const FlowSeries fs = testing::random_series(cfg, 1, 20, seed, 8);
  const PredictionStore store = testing::noisy_store(fs, {0, 20}, seed + 1, 1.0);
  CombinationTable table = dp_union_search(store, fs, {0, 20});
  subtraction_search(table, store, fs, {0, 20});
  return table;
}

}  // namespace

TEST_CASE("index structure counts for an 8x8 two-window raster") {
  HierarchyConfig cfg(8, 8, {2, 2});
  const CombinationTable table = small_table(cfg, 41);
  const CombinationIndex index = CombinationIndex::build(table);
  CHECK(index.root_count() == 4);
  CHECK(index.node_count() == 84 + 160);

  const auto stats = index.scale_stats();
  REQUIRE(stats.size() == 3);
  CHECK(stats[0].scale == 1);
  CHECK(stats[0].singles == 64);
  CHECK(stats[0].multis == 8 * 16);
  CHECK(stats[1].singles == 16);
  CHECK(stats[1].multis == 8 * 4);
  CHECK(stats[2].singles == 4);
  CHECK(stats[2].multis == 0);
}

TEST_CASE("lookup agrees with a linear scan and visits few nodes") {
  HierarchyConfig cfg(8, 8, {2, 2});
  const CombinationTable table = small_table(cfg, 42);
  const CombinationIndex index = CombinationIndex::build(table);
  for (const auto& [code, entry] : table.entries) {
    const IndexLookup hit = index.lookup(code);
    REQUIRE(hit.entry != nullptr);
    CHECK(hit.entry->best == entry.best);
    CHECK(hit.entry->best_loss == entry.best_loss);
    CHECK(hit.nodes_visited <= cfg.layers() + 1);
    CHECK(hit.nodes_visited ==
          static_cast<int>(code.size()) - root_address_length(cfg) + 1);
  }
}

TEST_CASE("lookup failure modes") {
  HierarchyConfig cfg(8, 8, {2, 2});
  const CombinationIndex index = CombinationIndex::build(small_table(cfg, 43));
  CHECK(index.contains("A"));
  CHECK(index.contains("AAL"));
  CHECK_THROWS_AS(index.lookup("AZ"), Error);    // malformed
  CHECK_THROWS_AS(index.lookup("AAAA"), Error);  // below the atomic layer
  CHECK_THROWS_AS(index.lookup(""), Error);      // no empty root address
}

TEST_CASE("build rejects an incomplete table") {
  HierarchyConfig cfg(8, 8, {2, 2});
  CombinationTable table = small_table(cfg, 44);
  const GridCode victim = "AAL";
  table.entries.erase(victim);
  try {
    CombinationIndex::build(table);
    FAIL("expected an incomplete-table error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IncompleteTable);
    CHECK(std::string(e.what()).find(victim) != std::string::npos);
  }
}

TEST_CASE("index persistence round-trip and corruption detection") {
  HierarchyConfig cfg(8, 8, {2, 2});
  const CombinationTable table = small_table(cfg, 45);
  const CombinationIndex index = CombinationIndex::build(table);
  const auto path =
      (std::filesystem::temp_directory_path() / "o4ast_test_index.bin").string();
  save_index(index, path);

  const CombinationIndex back = load_index(path);
  CHECK(back.node_count() == index.node_count());
  CHECK(back.root_count() == index.root_count());
  const auto a = index.all_entries();
  const auto b = back.all_entries();
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].first == b[i].first);
    CHECK(a[i].second->best == b[i].second->best);
    CHECK(a[i].second->best_loss == b[i].second->best_loss);
    CHECK(a[i].second->union_loss == b[i].second->union_loss);
  }

  // Flip one payload byte: the checksum must catch it.
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekg(0, std::ios::end);
    const auto end = static_cast<long long>(f.tellg());
    f.seekg(end / 2);
    const char byte = static_cast<char>(f.get());
    f.seekp(end / 2);
    f.put(static_cast<char>(byte ^ 0x5a));
  }
  try {
    load_index(path);
    FAIL("expected a corruption error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Corruption);
  }

  // Wrong magic is a format error, not corruption.
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("WRONGMAG", 8);
  }
  try {
    load_index(path);
    FAIL("expected a format error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Format);
  }
  std::filesystem::remove(path);
}

TEST_CASE("to_table reproduces the source table") {
  HierarchyConfig cfg(4, 4, {2});
  const CombinationTable table = small_table(cfg, 46);
  const CombinationTable back = CombinationIndex::build(table).to_table();
  REQUIRE(back.entries.size() == table.entries.size());
  for (const auto& [code, e] : table.entries) {
    CHECK(back.entries.at(code).best == e.best);
    CHECK(back.entries.at(code).best_loss == e.best_loss);
  }
}
