#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "hierarchy.hpp"

namespace o4ast {

// A grid code is a letter path descending the hierarchy. The leading
// letters address a coarsest-layer cell (one letter when the coarsest
// layer is at most 2x2, more letters via virtual 2x2 grouping above it);
// each following letter selects a child within the parent's window.
// Single children at a window-2 layer are A..D row-major (A top-left,
// B top-right, C bottom-left, D bottom-right). Only the terminal letter
// may denote a multi-grid: E..H are the two-cell dominoes (E=AB, F=CD,
// G=AC, H=BD) and I..L the three-cell triominoes (I omits D, J omits A,
// K omits B, L omits C). Multi letters are valid only at window-2 layers.
using GridCode = std::string;

namespace code_detail {

// Child ordinals within a 2x2 window: A=0 TL, B=1 TR, C=2 BL, D=3 BR.
inline const std::vector<int>& multi_members(char letter) {
  static const std::vector<int> table[8] = {
      {0, 1},     // E = AB
      {2, 3},     // F = CD
      {0, 2},     // G = AC
      {1, 3},     // H = BD
      {0, 1, 2},  // I omits D
      {1, 2, 3},  // J omits A
      {0, 2, 3},  // K omits B
      {0, 1, 3},  // L omits C
  };
  if (letter < 'E' || letter > 'L')
    raise(ErrorKind::MalformedCode, std::string("not a multi letter: ") + letter);
  return table[letter - 'E'];
}

// Complement within the parent: the opposite domino for dominoes, the
// omitted single child for triominoes.
inline char multi_complement(char letter) {
  switch (letter) {
    case 'E': return 'F';
    case 'F': return 'E';
    case 'G': return 'H';
    case 'H': return 'G';
    case 'I': return 'D';
    case 'J': return 'A';
    case 'K': return 'B';
    case 'L': return 'C';
  }
  raise(ErrorKind::MalformedCode, std::string("not a multi letter: ") + letter);
}

inline bool is_multi_letter(char c) { return c >= 'E' && c <= 'L'; }

}  // namespace code_detail

// Letters needed to address a coarsest-layer cell.
inline int root_address_length(const HierarchyConfig& cfg) {
  const int top = cfg.layers() - 1;
  const int dim = std::max(cfg.layer_height(top), cfg.layer_width(top));
  int bits = 0;
  while ((1 << bits) < dim) ++bits;
  return bits;
}

namespace code_detail {

inline void check_codable(const HierarchyConfig& cfg) {
  for (int k : cfg.windows())
    if (k * k > 12)
      raise(ErrorKind::Config, "grid coding supports windows up to 3");
}

inline void append_root(const HierarchyConfig& cfg, int row, int col,
                        std::string& out) {
  const int r = root_address_length(cfg);
  for (int i = r - 1; i >= 0; --i) {
    const int rb = (row >> i) & 1;
    const int cb = (col >> i) & 1;
    out.push_back(static_cast<char>('A' + rb * 2 + cb));
  }
}

}  // namespace code_detail

// Code of the single grid (row, col) at `layer` (0 = atomic).
inline GridCode code_of(const HierarchyConfig& cfg, int layer, int row, int col) {
  code_detail::check_codable(cfg);
  if (layer < 0 || layer >= cfg.layers() || row < 0 || col < 0 ||
      row >= cfg.layer_height(layer) || col >= cfg.layer_width(layer))
    raise(ErrorKind::MalformedCode, "cell out of range for layer");
  const int top = cfg.layers() - 1;
  // Ancestor coordinates from the coarsest layer down to `layer`.
  std::vector<std::pair<int, int>> anc(top - layer + 1);
  int r = row, c = col;
  for (int l = layer; l <= top; ++l) {
    anc[top - l] = {r, c};
    if (l < top) {
      r /= cfg.window(l);
      c /= cfg.window(l);
    }
  }
  std::string out;
  code_detail::append_root(cfg, anc[0].first, anc[0].second, out);
  for (size_t i = 1; i < anc.size(); ++i) {
    const int child_layer = top - static_cast<int>(i);
    const int k = cfg.window(child_layer);
    const int dr = anc[i].first % k;
    const int dc = anc[i].second % k;
    out.push_back(static_cast<char>('A' + dr * k + dc));
  }
  return out;
}

// Code of the multi-grid `letter` whose members live at `member_layer`
// inside parent cell (parent_row, parent_col) at member_layer + 1.
inline GridCode multi_code_of(const HierarchyConfig& cfg, int member_layer,
                              int parent_row, int parent_col, char letter) {
  if (!cfg.multi_enabled(member_layer))
    raise(ErrorKind::MalformedCode, "multi-grids need a window-2 layer");
  code_detail::multi_members(letter);  // validates the letter
  GridCode parent = code_of(cfg, member_layer + 1, parent_row, parent_col);
  parent.push_back(letter);
  return parent;
}

struct DecodedCode {
  int layer = 0;  // layer of the denoted cells
  bool multi = false;
  char multi_letter = 0;                    // 'E'..'L' when multi
  int parent_row = 0, parent_col = 0;       // parent cell when multi
  std::vector<std::pair<int, int>> cells;   // (row, col) at `layer`
};

inline DecodedCode decode(const HierarchyConfig& cfg, const GridCode& code) {
  code_detail::check_codable(cfg);
  const int top = cfg.layers() - 1;
  const int r = root_address_length(cfg);
  if (static_cast<int>(code.size()) < r)
    raise(ErrorKind::MalformedCode, "code shorter than root address: " + code);
  int row = 0, col = 0;
  for (int i = 0; i < r; ++i) {
    const char ch = code[i];
    if (ch < 'A' || ch > 'D')
      raise(ErrorKind::MalformedCode, "bad root letter in code: " + code);
    row = row * 2 + (ch - 'A') / 2;
    col = col * 2 + (ch - 'A') % 2;
  }
  if (row >= cfg.layer_height(top) || col >= cfg.layer_width(top))
    raise(ErrorKind::MalformedCode, "root address out of range: " + code);
  int layer = top;
  for (size_t i = r; i < code.size(); ++i) {
    const char ch = code[i];
    if (layer == 0)
      raise(ErrorKind::MalformedCode, "code descends below the atomic layer: " + code);
    const int child_layer = layer - 1;
    const int k = cfg.window(child_layer);
    if (code_detail::is_multi_letter(ch) && k == 2) {
      if (i + 1 != code.size())
        raise(ErrorKind::MalformedCode, "multi letter before end of code: " + code);
      if (!cfg.multi_enabled(child_layer))
        raise(ErrorKind::MalformedCode, "multi letter at a non-window-2 layer: " + code);
      DecodedCode out;
      out.layer = child_layer;
      out.multi = true;
      out.multi_letter = ch;
      out.parent_row = row;
      out.parent_col = col;
      for (int ord : code_detail::multi_members(ch))
        out.cells.emplace_back(row * 2 + ord / 2, col * 2 + ord % 2);
      return out;
    }
    const int ord = ch - 'A';
    if (ord < 0 || ord >= k * k)
      raise(ErrorKind::MalformedCode, "child letter out of window range: " + code);
    row = row * k + ord / k;
    col = col * k + ord % k;
    layer = child_layer;
  }
  DecodedCode out;
  out.layer = layer;
  out.cells.emplace_back(row, col);
  return out;
}

// All single codes, finest layers last within each root subtree order is
// not guaranteed; callers that care should sort.
inline std::vector<GridCode> enumerate_single_codes(const HierarchyConfig& cfg) {
  std::vector<GridCode> out;
  for (int l = cfg.layers() - 1; l >= 0; --l)
    for (int row = 0; row < cfg.layer_height(l); ++row)
      for (int col = 0; col < cfg.layer_width(l); ++col)
        out.push_back(code_of(cfg, l, row, col));
  return out;
}

inline std::vector<GridCode> enumerate_multi_codes(const HierarchyConfig& cfg) {
  std::vector<GridCode> out;
  for (int l = 0; l + 1 < cfg.layers(); ++l) {
    if (!cfg.multi_enabled(l)) continue;
    const int pl = l + 1;
    for (int row = 0; row < cfg.layer_height(pl); ++row)
      for (int col = 0; col < cfg.layer_width(pl); ++col)
        for (char m = 'E'; m <= 'L'; ++m)
          out.push_back(multi_code_of(cfg, l, row, col, m));
  }
  return out;
}

}  // namespace o4ast
