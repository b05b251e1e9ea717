#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "combination.hpp"
#include "error.hpp"
#include "grid_code.hpp"
#include "hierarchy.hpp"

namespace o4ast {

enum class GridKind { Single, Multi };

// One decomposed hierarchical grid: a single cell or, at window-2 layers,
// 2-3 edge-adjacent cells sharing one parent.
struct HierarchicalGrid {
  GridCode code;
  int layer = 0;
  GridKind kind = GridKind::Single;
  char multi_letter = 0;
  std::vector<std::pair<int, int>> cells;  // (row, col) at `layer`

  Combination direct_combination() const {
    Combination c;
    for (const auto& [r, cc] : cells) c.add(layer, r, cc, +1);
    return c;
  }
};

namespace decompose_detail {

inline char letter_of_ordinals(const std::vector<int>& ordinals) {
  int bits = 0;
  for (int o : ordinals) bits |= 1 << o;
  switch (bits) {
    case 0b0011: return 'E';  // A+B
    case 0b1100: return 'F';  // C+D
    case 0b0101: return 'G';  // A+C
    case 0b1010: return 'H';  // B+D
    case 0b0111: return 'I';  // omits D
    case 0b1110: return 'J';  // omits A
    case 0b1101: return 'K';  // omits B
    case 0b1011: return 'L';  // omits C
  }
  raise(ErrorKind::MalformedCode, "cell set is not a coded multi-grid");
}

// Scale-layer cell fully contained in the atomic mask.
inline bool cell_contained(const SignedGrid& mask, int scale, int row, int col) {
  for (int i = row * scale; i < (row + 1) * scale; ++i)
    for (int j = col * scale; j < (col + 1) * scale; ++j)
      if (mask.at(i, j) != 1) return false;
  return true;
}

inline void clear_cell(SignedGrid& mask, int scale, int row, int col) {
  for (int i = row * scale; i < (row + 1) * scale; ++i)
    for (int j = col * scale; j < (col + 1) * scale; ++j)
      mask.at(i, j) = 0;
}

}  // namespace decompose_detail

// Connected components of the layer's cells fully contained in the mask.
// Edges join edge-adjacent cells that share the same parent, and only at
// window-2 layers where multi-grid coding is defined; elsewhere every
// matched cell is its own component.
inline std::vector<std::vector<std::pair<int, int>>> match_scale(
    const SignedGrid& mask, const HierarchyConfig& cfg, int layer) {
  const int s = cfg.scale(layer);
  const int lh = cfg.layer_height(layer), lw = cfg.layer_width(layer);
  std::vector<int> contained(static_cast<size_t>(lh) * lw, 0);
  for (int r = 0; r < lh; ++r)
    for (int c = 0; c < lw; ++c)
      if (decompose_detail::cell_contained(mask, s, r, c))
        contained[static_cast<size_t>(r) * lw + c] = 1;

  const bool join = cfg.multi_enabled(layer);
  const int k = join ? cfg.window(layer) : 0;
  std::vector<int> seen(contained.size(), 0);
  std::vector<std::vector<std::pair<int, int>>> components;
  for (int r = 0; r < lh; ++r)
    for (int c = 0; c < lw; ++c) {
      const size_t id = static_cast<size_t>(r) * lw + c;
      if (!contained[id] || seen[id]) continue;
      std::vector<std::pair<int, int>> comp;
      std::vector<std::pair<int, int>> stack{{r, c}};
      seen[id] = 1;
      while (!stack.empty()) {
        const auto [cr, ccc] = stack.back();
        stack.pop_back();
        comp.emplace_back(cr, ccc);
        if (!join) continue;
        static const int dr[4] = {-1, 1, 0, 0};
        static const int dc[4] = {0, 0, -1, 1};
        for (int d = 0; d < 4; ++d) {
          const int nr = cr + dr[d], nc = ccc + dc[d];
          if (nr < 0 || nc < 0 || nr >= lh || nc >= lw) continue;
          if (nr / k != cr / k || nc / k != ccc / k) continue;  // other parent
          const size_t nid = static_cast<size_t>(nr) * lw + nc;
          if (!contained[nid] || seen[nid]) continue;
          seen[nid] = 1;
          stack.emplace_back(nr, nc);
        }
      }
      std::sort(comp.begin(), comp.end());
      components.push_back(std::move(comp));
    }
  return components;
}

// Coarse-to-fine decomposition: matched components are appended and their
// area removed before descending, so no returned subset can be merged
// into a coarser grid or multi-grid.
inline std::vector<HierarchicalGrid> hierarchical_decompose(
    const RasterRegion& region, const HierarchyConfig& cfg) {
  if (region.mask.rows != cfg.height() || region.mask.cols != cfg.width())
    raise(ErrorKind::Shape, "region mask does not match the padded raster");
  if (region.empty()) raise(ErrorKind::EmptyRegion, "empty region");

  SignedGrid remaining = region.mask;
  std::vector<HierarchicalGrid> out;
  for (int layer = cfg.layers() - 1; layer >= 0; --layer) {
    const int s = cfg.scale(layer);
    for (auto& comp : match_scale(remaining, cfg, layer)) {
      HierarchicalGrid grid;
      grid.layer = layer;
      grid.cells = comp;
      if (comp.size() == 1) {
        grid.kind = GridKind::Single;
        grid.code = code_of(cfg, layer, comp[0].first, comp[0].second);
      } else {
        grid.kind = GridKind::Multi;
        const int pr = comp[0].first / 2, pc = comp[0].second / 2;
        std::vector<int> ordinals;
        for (const auto& [r, c] : comp)
          ordinals.push_back((r % 2) * 2 + (c % 2));
        grid.multi_letter = decompose_detail::letter_of_ordinals(ordinals);
        grid.code = multi_code_of(cfg, layer, pr, pc, grid.multi_letter);
      }
      for (const auto& [r, c] : comp) decompose_detail::clear_cell(remaining, s, r, c);
      out.push_back(std::move(grid));
    }
  }
  return out;
}

}  // namespace o4ast
