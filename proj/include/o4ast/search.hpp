#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "combination.hpp"
#include "decompose.hpp"
#include "error.hpp"
#include "flow_series.hpp"
#include "grid_code.hpp"
#include "io_util.hpp"
#include "predictor.hpp"

namespace o4ast {

enum class CombinationTrace : uint8_t {
  Direct = 0,
  UnionOfChildren = 1,
  ParentMinusComplement = 2,
};

inline const char* trace_name(CombinationTrace t) {
  switch (t) {
    case CombinationTrace::Direct: return "direct";
    case CombinationTrace::UnionOfChildren: return "union-of-children";
    case CombinationTrace::ParentMinusComplement: return "parent-minus-complement";
  }
  return "?";
}

// Optimal combination for one grid code. The union variant is the best
// combination reachable with union operations only; best additionally
// admits the subtraction candidates for multi-grids.
struct TableEntry {
  Combination best;
  double best_loss = 0.0;
  CombinationTrace best_trace = CombinationTrace::Direct;
  Combination union_best;
  double union_loss = 0.0;
  CombinationTrace union_trace = CombinationTrace::Direct;
};

struct CombinationTable {
  HierarchyConfig cfg;
  std::unordered_map<GridCode, TableEntry> entries;
};

// Signed sum of stored predictions over the combination's terms.
inline double combination_value(const PredictionStore& store, const Combination& c,
                                int channel, int slot) {
  double v = 0.0;
  for (const auto& t : c.terms)
    v += t.sign * store.at(t.layer, channel, slot, t.row, t.col);
  return v;
}

namespace search_detail {

// MSE of a combination's series against the truth series of a cell set at
// one layer, summed over channels.
inline double combo_loss_against_cells(
    const PredictionStore& store, const Combination& combo, const FlowSeries& truth,
    int layer, const std::vector<std::pair<int, int>>& cells, SlotRange range) {
  const int slots = range.length();
  double loss = 0.0;
  for (int ch = 0; ch < truth.channels(); ++ch) {
    double sse = 0.0;
    for (int t = range.begin; t < range.end; ++t) {
      double tru = 0.0;
      for (const auto& [r, c] : cells) tru += truth.at(layer, ch, t, r, c);
      const double d = combination_value(store, combo, ch, t) - tru;
      sse += d * d;
    }
    loss += sse / static_cast<double>(slots);
  }
  return loss;
}

}  // namespace search_detail

// Loss of a combination for an arbitrary region mask: MSE between the
// combined prediction series and the truth series aggregated from the
// mask's atomic cells, summed over channels.
inline double combination_loss(const HierarchyConfig& cfg, const Combination& combo,
                               const PredictionStore& store, const FlowSeries& truth,
                               const SignedGrid& mask, SlotRange range,
                               bool validate = true) {
  if (range.length() <= 0) raise(ErrorKind::Config, "empty loss range");
  if (validate) {
    const SignedGrid sum = combination_sum(cfg, combo);
    for (int x : sum.v)
      if (x != 0 && x != 1)
        raise(ErrorKind::Validity, "combination sum has entries outside {0,1}");
  }
  std::vector<std::pair<int, int>> cells;
  for (int r = 0; r < mask.rows; ++r)
    for (int c = 0; c < mask.cols; ++c)
      if (mask.at(r, c)) cells.emplace_back(r, c);
  return search_detail::combo_loss_against_cells(store, combo, truth, 0, cells, range);
}

// Bottom-up union search: atomic grids are their own combination; each
// coarser single grid keeps the cheaper of its direct prediction and the
// concatenation of its children's optima (direct wins ties). A union
// candidate is scored as the sum of its member grids' own losses, which is
// what makes the bottom-up pass exact: the objective decomposes over the
// disjoint children, so per-child optima compose into the parent optimum.
inline CombinationTable dp_union_search(const PredictionStore& store,
                                        const FlowSeries& truth, SlotRange range) {
  if (range.length() <= 0) raise(ErrorKind::Config, "empty validation range");
  const auto& cfg = truth.hierarchy();
  CombinationTable table;
  table.cfg = cfg;
  for (int l = 0; l < cfg.layers(); ++l) {
    for (int r = 0; r < cfg.layer_height(l); ++r)
      for (int c = 0; c < cfg.layer_width(l); ++c) {
        const std::vector<std::pair<int, int>> self{{r, c}};
        Combination direct;
        direct.add(l, r, c, +1);
        const double direct_loss = search_detail::combo_loss_against_cells(
            store, direct, truth, l, self, range);
        TableEntry entry;
        if (l == 0) {
          entry.best = direct;
          entry.best_loss = direct_loss;
          entry.best_trace = CombinationTrace::Direct;
        } else {
          const int k = cfg.window(l - 1);
          Combination children;
          double children_loss = 0.0;
          for (int dr = 0; dr < k; ++dr)
            for (int dc = 0; dc < k; ++dc) {
              const GridCode child = code_of(cfg, l - 1, r * k + dr, c * k + dc);
              const TableEntry& ce = table.entries.at(child);
              children = children.concat(ce.best);
              children_loss += ce.best_loss;
            }
          children = children.simplified();
          if (direct_loss <= children_loss) {
            entry.best = direct;
            entry.best_loss = direct_loss;
            entry.best_trace = CombinationTrace::Direct;
          } else {
            entry.best = children;
            entry.best_loss = children_loss;
            entry.best_trace = CombinationTrace::UnionOfChildren;
          }
        }
        entry.union_best = entry.best;
        entry.union_loss = entry.best_loss;
        entry.union_trace = entry.best_trace;
        table.entries.emplace(code_of(cfg, l, r, c), std::move(entry));
      }
  }
  return table;
}

// Subtraction extension: for every window-2 multi-grid, compare the union
// of its members' optima against the parent's optimum minus the
// complement's (the omitted single for triominoes, the opposite domino
// for dominoes). Ties keep the union candidate.
inline void subtraction_search(CombinationTable& table, const PredictionStore& store,
                               const FlowSeries& truth, SlotRange range) {
  const auto& cfg = table.cfg;
  auto member_union = [&](int layer, int pr, int pc, char letter) {
    Combination combo;
    for (int o : code_detail::multi_members(letter)) {
      const GridCode code =
          code_of(cfg, layer, pr * 2 + o / 2, pc * 2 + o % 2);
      combo = combo.concat(table.entries.at(code).best);
    }
    return combo.simplified();
  };

  for (int l = 0; l + 1 < cfg.layers(); ++l) {
    if (!cfg.multi_enabled(l)) continue;
    const int pl = l + 1;
    for (int pr = 0; pr < cfg.layer_height(pl); ++pr)
      for (int pc = 0; pc < cfg.layer_width(pl); ++pc) {
        const Combination parent_best =
            table.entries.at(code_of(cfg, pl, pr, pc)).best;
        for (char m = 'E'; m <= 'L'; ++m) {
          std::vector<std::pair<int, int>> members;
          for (int o : code_detail::multi_members(m))
            members.emplace_back(pr * 2 + o / 2, pc * 2 + o % 2);

          const Combination union_cand = member_union(l, pr, pc, m);
          const double union_loss = search_detail::combo_loss_against_cells(
              store, union_cand, truth, l, members, range);

          const char cl = code_detail::multi_complement(m);
          Combination complement;
          if (cl >= 'A' && cl <= 'D') {
            const int o = cl - 'A';
            complement = table.entries
                             .at(code_of(cfg, l, pr * 2 + o / 2, pc * 2 + o % 2))
                             .best;
          } else {
            complement = member_union(l, pr, pc, cl);
          }
          const Combination sub_cand =
              parent_best.concat(complement.negated()).simplified();
          const double sub_loss = search_detail::combo_loss_against_cells(
              store, sub_cand, truth, l, members, range);

          TableEntry entry;
          entry.union_best = union_cand;
          entry.union_loss = union_loss;
          entry.union_trace = CombinationTrace::UnionOfChildren;
          if (sub_loss < union_loss) {
            entry.best = sub_cand;
            entry.best_loss = sub_loss;
            entry.best_trace = CombinationTrace::ParentMinusComplement;
          } else {
            entry.best = union_cand;
            entry.best_loss = union_loss;
            entry.best_trace = CombinationTrace::UnionOfChildren;
          }
          table.entries[multi_code_of(cfg, l, pr, pc, m)] = std::move(entry);
        }
      }
  }
}

// ---------------------------------------------------------------------------
// Search-count diagnostics for a uniform window K and n layers.

inline long long search_count_double_sum(long long n_atomic, int k, int layers) {
  long long total = 0;
  for (int l = 2; l <= layers; ++l) {
    long long denom = 1;
    for (int j = 1; j <= l - 1; ++j) {
      denom *= static_cast<long long>(k) * k;
      total += n_atomic / denom;
    }
  }
  return total;
}

inline long long search_count_closed_form(long long n_atomic, int k, int layers) {
  const __int128 m = static_cast<__int128>(k) * k;
  const __int128 a = m - 1;
  __int128 q = 1;
  for (int i = 0; i < layers - 1; ++i) q *= m;
  const __int128 numerator =
      static_cast<__int128>(n_atomic) * ((layers - 1) * a * q - q + 1);
  const __int128 denominator = a * a * q;
  if (numerator % denominator != 0)
    raise(ErrorKind::Numeric, "search count is not integral for this (N, K, n)");
  return static_cast<long long>(numerator / denominator);
}

// ---------------------------------------------------------------------------
// Persistence. Versioned binary file; entries sorted by code for
// byte-stable output.

namespace table_io {
inline constexpr char kMagic[16] = {'O', '4', 'A', 'S', 'T', 'C', 'O', 'M',
                                    'B', 'T', 'A', 'B', 'L', 'E', '\0', '\0'};
inline constexpr uint32_t kVersion = 1;
}  // namespace table_io

namespace search_detail {

inline void write_combination(std::ostream& out, const HierarchyConfig& cfg,
                              const Combination& c, double loss,
                              CombinationTrace trace) {
  write_scalar<double>(out, loss);
  write_scalar<uint8_t>(out, static_cast<uint8_t>(trace));
  write_scalar<uint32_t>(out, static_cast<uint32_t>(c.terms.size()));
  for (const auto& t : c.terms) {
    write_scalar<uint32_t>(out, static_cast<uint32_t>(cfg.scale(t.layer)));
    write_scalar<int32_t>(out, t.row);
    write_scalar<int32_t>(out, t.col);
    write_scalar<int8_t>(out, static_cast<int8_t>(t.sign));
  }
}

inline void read_combination(std::istream& in, const HierarchyConfig& cfg,
                             Combination& c, double& loss, CombinationTrace& trace) {
  loss = read_scalar<double>(in, "loss");
  trace = static_cast<CombinationTrace>(read_scalar<uint8_t>(in, "trace"));
  const uint32_t n = read_scalar<uint32_t>(in, "term count");
  if (n > (1u << 24)) raise(ErrorKind::Corruption, "implausible term count");
  c.terms.clear();
  c.terms.reserve(n);
  for (uint32_t i = 0; i < n; ++i) {
    const int scale = static_cast<int>(read_scalar<uint32_t>(in, "term scale"));
    const int row = read_scalar<int32_t>(in, "term row");
    const int col = read_scalar<int32_t>(in, "term col");
    const int sign = read_scalar<int8_t>(in, "term sign");
    c.terms.push_back({cfg.layer_of_scale(scale), row, col, sign});
  }
}

}  // namespace search_detail

inline void save_combination_table(const CombinationTable& table,
                                   const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::Io, "cannot write table file: " + path);
  write_bytes(out, table_io::kMagic, sizeof(table_io::kMagic));
  write_scalar<uint32_t>(out, table_io::kVersion);
  const auto& cfg = table.cfg;
  write_scalar<uint32_t>(out, static_cast<uint32_t>(cfg.raw_height()));
  write_scalar<uint32_t>(out, static_cast<uint32_t>(cfg.raw_width()));
  write_scalar<uint32_t>(out, static_cast<uint32_t>(cfg.windows().size()));
  for (int k : cfg.windows()) write_scalar<uint32_t>(out, static_cast<uint32_t>(k));
  std::vector<GridCode> codes;
  codes.reserve(table.entries.size());
  for (const auto& [code, _] : table.entries) codes.push_back(code);
  std::sort(codes.begin(), codes.end());
  write_scalar<uint32_t>(out, static_cast<uint32_t>(codes.size()));
  for (const auto& code : codes) {
    const auto& e = table.entries.at(code);
    write_string(out, code);
    search_detail::write_combination(out, cfg, e.best, e.best_loss, e.best_trace);
    search_detail::write_combination(out, cfg, e.union_best, e.union_loss,
                                     e.union_trace);
  }
  if (!out) raise(ErrorKind::Io, "write failed: " + path);
}

inline CombinationTable load_combination_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::Io, "cannot open table file: " + path);
  char magic[16];
  read_bytes(in, magic, sizeof(magic), "magic");
  if (std::memcmp(magic, table_io::kMagic, sizeof(magic)) != 0)
    raise(ErrorKind::Format, "bad magic in table file: " + path);
  if (read_scalar<uint32_t>(in, "version") != table_io::kVersion)
    raise(ErrorKind::Format, "unsupported table file version");
  const int raw_h = static_cast<int>(read_scalar<uint32_t>(in, "height"));
  const int raw_w = static_cast<int>(read_scalar<uint32_t>(in, "width"));
  const int nw = static_cast<int>(read_scalar<uint32_t>(in, "window count"));
  if (nw < 1 || nw > 32) raise(ErrorKind::Corruption, "implausible window count");
  std::vector<int> windows(nw);
  for (int i = 0; i < nw; ++i)
    windows[i] = static_cast<int>(read_scalar<uint32_t>(in, "window"));
  CombinationTable table;
  table.cfg = HierarchyConfig(raw_h, raw_w, windows);
  const uint32_t count = read_scalar<uint32_t>(in, "entry count");
  for (uint32_t i = 0; i < count; ++i) {
    const GridCode code = read_string(in, "code");
    TableEntry e;
    search_detail::read_combination(in, table.cfg, e.best, e.best_loss, e.best_trace);
    search_detail::read_combination(in, table.cfg, e.union_best, e.union_loss,
                                    e.union_trace);
    if (!table.entries.emplace(code, std::move(e)).second)
      raise(ErrorKind::IncompleteTable, "duplicate code in table file: " + code);
  }
  return table;
}

}  // namespace o4ast
