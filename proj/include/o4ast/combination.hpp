#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include "error.hpp"
#include "hierarchy.hpp"

namespace o4ast {

// Dense row-major integer grid; used for region masks (0/1) and for
// atomic-resolution signed sums (-1/0/+1 when a combination is valid).
struct SignedGrid {
  int rows = 0;
  int cols = 0;
  std::vector<int> v;

  SignedGrid() = default;
  SignedGrid(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0) {}

  int& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  int at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }

  bool operator==(const SignedGrid& o) const {
    return rows == o.rows && cols == o.cols && v == o.v;
  }
};

// Binary assignment matrix of a rasterized query region, at padded atomic
// resolution. Padding cells are always zero.
struct RasterRegion {
  SignedGrid mask;

  bool empty() const {
    return std::all_of(mask.v.begin(), mask.v.end(), [](int x) { return x == 0; });
  }
  long long cell_count() const {
    long long n = 0;
    for (int x : mask.v) n += x;
    return n;
  }
};

// One signed grid selection: +1 union, -1 subtraction.
struct CombinationTerm {
  int layer = 0;
  int row = 0;
  int col = 0;
  int sign = 1;

  bool operator==(const CombinationTerm& o) const {
    return layer == o.layer && row == o.row && col == o.col && sign == o.sign;
  }
};

// A set of per-scale signed selections whose atomic sum is a {0,1} mask.
struct Combination {
  std::vector<CombinationTerm> terms;

  Combination& add(int layer, int row, int col, int sign) {
    terms.push_back({layer, row, col, sign});
    return *this;
  }

  Combination negated() const {
    Combination out = *this;
    for (auto& t : out.terms) t.sign = -t.sign;
    return out;
  }

  Combination concat(const Combination& o) const {
    Combination out = *this;
    out.terms.insert(out.terms.end(), o.terms.begin(), o.terms.end());
    return out;
  }

  // Merge duplicate (layer, row, col) keys and drop cancelled terms.
  Combination simplified() const {
    std::map<std::tuple<int, int, int>, int> acc;
    for (const auto& t : terms) acc[{t.layer, t.row, t.col}] += t.sign;
    Combination out;
    for (const auto& [key, sign] : acc) {
      if (sign == 0) continue;
      out.terms.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), sign});
    }
    return out;
  }

  bool operator==(const Combination& o) const { return terms == o.terms; }
};

// A^s_{i,j} = lambda^s_{floor(i/s), floor(j/s)}: every atomic cell
// inherits the sign of its covering scale-s cell.
inline SignedGrid map_to_atomic(const HierarchyConfig& cfg, const SignedGrid& lambda,
                                int layer) {
  if (lambda.rows != cfg.layer_height(layer) || lambda.cols != cfg.layer_width(layer))
    raise(ErrorKind::Shape, "lambda dimensions do not match layer");
  const int s = cfg.scale(layer);
  SignedGrid out(cfg.height(), cfg.width());
  for (int i = 0; i < out.rows; ++i)
    for (int j = 0; j < out.cols; ++j)
      out.at(i, j) = lambda.at(i / s, j / s);
  return out;
}

// Element-wise sum of all terms mapped to atomic resolution.
inline SignedGrid combination_sum(const HierarchyConfig& cfg, const Combination& c) {
  SignedGrid out(cfg.height(), cfg.width());
  for (const auto& t : c.terms) {
    const int s = cfg.scale(t.layer);
    for (int i = t.row * s; i < (t.row + 1) * s; ++i)
      for (int j = t.col * s; j < (t.col + 1) * s; ++j)
        out.at(i, j) += t.sign;
  }
  return out;
}

inline bool combination_valid_for(const HierarchyConfig& cfg, const Combination& c,
                                  const SignedGrid& mask) {
  return combination_sum(cfg, c) == mask;
}

}  // namespace o4ast
