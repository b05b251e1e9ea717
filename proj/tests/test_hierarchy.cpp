#include <catch2/catch_amalgamated.hpp>

#include "o4ast/hierarchy.hpp"

using namespace o4ast;

TEST_CASE("scales are cumulative window products") {
  HierarchyConfig cfg(8, 8, {2, 2});
  REQUIRE(cfg.layers() == 3);
  CHECK(cfg.scale(0) == 1);
  CHECK(cfg.scale(1) == 2);
  CHECK(cfg.scale(2) == 4);
  CHECK(cfg.window(0) == 2);
  CHECK(cfg.window(1) == 2);

  HierarchyConfig mixed(36, 36, {2, 3});
  CHECK(mixed.scale(2) == 6);
}

TEST_CASE("raster is padded to the coarsest scale") {
  HierarchyConfig cfg(10, 13, {2, 2});
  CHECK(cfg.raw_height() == 10);
  CHECK(cfg.raw_width() == 13);
  CHECK(cfg.height() == 12);
  CHECK(cfg.width() == 16);
  CHECK(cfg.layer_height(2) == 3);
  CHECK(cfg.layer_width(2) == 4);
  CHECK_FALSE(cfg.is_padding(9, 12));
  CHECK(cfg.is_padding(10, 0));
  CHECK(cfg.is_padding(0, 13));
}

TEST_CASE("layer dimensions divide exactly") {
  HierarchyConfig cfg(32, 32, {2, 2, 2});
  for (int l = 0; l < cfg.layers(); ++l) {
    CHECK(cfg.layer_height(l) * cfg.scale(l) == cfg.height());
    CHECK(cfg.layer_width(l) * cfg.scale(l) == cfg.width());
  }
}

TEST_CASE("layer_of_scale resolves members of P and rejects others") {
  HierarchyConfig cfg(32, 32, {2, 2, 2});
  CHECK(cfg.layer_of_scale(1) == 0);
  CHECK(cfg.layer_of_scale(4) == 2);
  CHECK(cfg.layer_of_scale(8) == 3);
  CHECK_THROWS_AS(cfg.layer_of_scale(3), Error);
  try {
    cfg.layer_of_scale(16);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Schema);
  }
}

TEST_CASE("multi grids exist only at window-2 layers below the top") {
  HierarchyConfig cfg(36, 36, {2, 3});
  CHECK(cfg.multi_enabled(0));       // window 2 into layer 1
  CHECK_FALSE(cfg.multi_enabled(1)); // window 3
  CHECK_FALSE(cfg.multi_enabled(2)); // top layer

  HierarchyConfig coarse(9, 9, {3});
  CHECK(coarse.layers() == 2);
  CHECK_FALSE(coarse.multi_enabled(0));
  CHECK_FALSE(coarse.multi_enabled(1));
}

TEST_CASE("invalid configurations are rejected") {
  CHECK_THROWS_AS(HierarchyConfig(0, 8, {2}), Error);
  CHECK_THROWS_AS(HierarchyConfig(8, 8, {1}), Error);
  CHECK_THROWS_AS(HierarchyConfig(8, 8, {0, 2}), Error);
  CHECK_THROWS_AS(HierarchyConfig(8, 8, std::vector<int>{}), Error);
}
