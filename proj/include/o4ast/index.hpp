#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "error.hpp"
#include "grid_code.hpp"
#include "io_util.hpp"
#include "search.hpp"

namespace o4ast {

// Extended quad-tree: one node per grid code, up to 12 children per node
// (A-D singles, E-H dominoes, I-L triominoes). Roots form a forest keyed by
// the code's root address, held in a hash map; resolving the root address
// counts as one node visit.
struct IndexNode {
  GridCode code;
  TableEntry entry;
  std::array<std::unique_ptr<IndexNode>, 12> children;  // slot = letter - 'A'

  IndexNode* child(char letter) const {
    return children[static_cast<size_t>(letter - 'A')].get();
  }
};

struct IndexLookup {
  const TableEntry* entry = nullptr;
  int nodes_visited = 0;
};

struct IndexScaleStats {
  int scale = 0;
  int singles = 0;
  int multis = 0;
};

class CombinationIndex {
 public:
  CombinationIndex() = default;

  const HierarchyConfig& hierarchy() const { return cfg_; }
  int root_count() const { return static_cast<int>(roots_.size()); }
  size_t node_count() const { return node_count_; }

  // Build from a complete combination table: every enumerable single and
  // multi code must be present.
  static CombinationIndex build(const CombinationTable& table) {
    CombinationIndex index;
    index.cfg_ = table.cfg;
    std::vector<GridCode> codes = enumerate_single_codes(table.cfg);
    const std::vector<GridCode> multis = enumerate_multi_codes(table.cfg);
    codes.insert(codes.end(), multis.begin(), multis.end());
    for (const auto& code : codes) {
      const auto it = table.entries.find(code);
      if (it == table.entries.end())
        raise(ErrorKind::IncompleteTable,
              "combination table is missing code: " + code);
      index.insert(code, it->second);
    }
    return index;
  }

  IndexLookup lookup(const GridCode& code) const {
    decode(cfg_, code);  // malformed-code errors surface here
    const auto rlen = static_cast<size_t>(root_address_length(cfg_));
    if (code.size() < rlen)
      raise(ErrorKind::MalformedCode, "code shorter than root address: " + code);
    const auto it = roots_.find(code.substr(0, rlen));
    IndexLookup out;
    out.nodes_visited = 1;
    if (it == roots_.end())
      raise(ErrorKind::NotFound, "no indexed root for code: " + code);
    const IndexNode* node = it->second.get();
    for (size_t i = rlen; i < code.size(); ++i) {
      node = node->child(code[i]);
      ++out.nodes_visited;
      if (!node) raise(ErrorKind::NotFound, "code not indexed: " + code);
    }
    out.entry = &node->entry;
    return out;
  }

  bool contains(const GridCode& code) const {
    try {
      lookup(code);
      return true;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::NotFound) return false;
      throw;
    }
  }

  std::vector<IndexScaleStats> scale_stats() const {
    std::vector<IndexScaleStats> stats(static_cast<size_t>(cfg_.layers()));
    for (int l = 0; l < cfg_.layers(); ++l)
      stats[static_cast<size_t>(l)].scale = cfg_.scale(l);
    for (const auto& [code, entry] : all_entries()) {
      const DecodedCode d = decode(cfg_, code);
      auto& s = stats[static_cast<size_t>(d.layer)];
      if (d.multi)
        ++s.multis;
      else
        ++s.singles;
    }
    return stats;
  }

  // Flat view of all indexed codes and entries, sorted by code.
  std::vector<std::pair<GridCode, const TableEntry*>> all_entries() const {
    std::vector<std::pair<GridCode, const TableEntry*>> out;
    out.reserve(node_count_);
    for (const auto& [root, node] : roots_) collect(node.get(), out);
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
  }

  // Rebuild a combination table view of the index contents.
  CombinationTable to_table() const {
    CombinationTable table;
    table.cfg = cfg_;
    for (const auto& [code, entry] : all_entries())
      table.entries.emplace(code, *entry);
    return table;
  }

 private:
  void insert(const GridCode& code, const TableEntry& entry) {
    const auto rlen = static_cast<size_t>(root_address_length(cfg_));
    auto& root = roots_[code.substr(0, rlen)];
    if (!root) {
      root = std::make_unique<IndexNode>();
      root->code = code.substr(0, rlen);
      ++node_count_;
    }
    IndexNode* node = root.get();
    for (size_t i = rlen; i < code.size(); ++i) {
      auto& slot = node->children[static_cast<size_t>(code[i] - 'A')];
      if (!slot) {
        slot = std::make_unique<IndexNode>();
        slot->code = code.substr(0, i + 1);
        ++node_count_;
      }
      node = slot.get();
    }
    node->entry = entry;
  }

  static void collect(const IndexNode* node,
                      std::vector<std::pair<GridCode, const TableEntry*>>& out) {
    out.emplace_back(node->code, &node->entry);
    for (const auto& child : node->children)
      if (child) collect(child.get(), out);
  }

  HierarchyConfig cfg_;
  std::unordered_map<std::string, std::unique_ptr<IndexNode>> roots_;
  size_t node_count_ = 0;
};

// ---------------------------------------------------------------------------
// Persistence: 8-byte magic, version, payload, trailing FNV-1a checksum of
// the payload bytes.

namespace index_io {
inline constexpr char kMagic[8] = {'O', '4', 'A', 'S', 'T', 'I', 'D', 'X'};
inline constexpr uint32_t kVersion = 1;
}  // namespace index_io

inline void save_index(const CombinationIndex& index, const std::string& path) {
  std::ostringstream payload(std::ios::binary);
  const auto& cfg = index.hierarchy();
  write_scalar<uint32_t>(payload, static_cast<uint32_t>(cfg.raw_height()));
  write_scalar<uint32_t>(payload, static_cast<uint32_t>(cfg.raw_width()));
  write_scalar<uint32_t>(payload, static_cast<uint32_t>(cfg.windows().size()));
  for (int k : cfg.windows())
    write_scalar<uint32_t>(payload, static_cast<uint32_t>(k));
  const auto entries = index.all_entries();
  write_scalar<uint64_t>(payload, entries.size());
  for (const auto& [code, entry] : entries) {
    write_string(payload, code);
    search_detail::write_combination(payload, cfg, entry->best, entry->best_loss,
                                     entry->best_trace);
    search_detail::write_combination(payload, cfg, entry->union_best,
                                     entry->union_loss, entry->union_trace);
  }
  const std::string bytes = payload.str();
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::Io, "cannot write index file: " + path);
  write_bytes(out, index_io::kMagic, sizeof(index_io::kMagic));
  write_scalar<uint32_t>(out, index_io::kVersion);
  write_scalar<uint64_t>(out, bytes.size());
  write_bytes(out, bytes.data(), bytes.size());
  write_scalar<uint64_t>(out, digest_bytes(bytes.data(), bytes.size()));
  if (!out) raise(ErrorKind::Io, "write failed: " + path);
}

inline CombinationIndex load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::Io, "cannot open index file: " + path);
  char magic[8];
  read_bytes(in, magic, sizeof(magic), "magic");
  if (std::memcmp(magic, index_io::kMagic, sizeof(magic)) != 0)
    raise(ErrorKind::Format, "bad magic in index file: " + path);
  if (read_scalar<uint32_t>(in, "version") != index_io::kVersion)
    raise(ErrorKind::Format, "unsupported index file version");
  const uint64_t size = read_scalar<uint64_t>(in, "payload size");
  if (size > (1ull << 34))
    raise(ErrorKind::Corruption, "implausible index payload size");
  std::string bytes(static_cast<size_t>(size), '\0');
  read_bytes(in, bytes.data(), bytes.size(), "payload");
  const uint64_t stored = read_scalar<uint64_t>(in, "checksum");
  const uint64_t actual = digest_bytes(bytes.data(), bytes.size());
  if (stored != actual)
    raise(ErrorKind::Corruption, "index checksum mismatch in " + path);

  std::istringstream payload(bytes, std::ios::binary);
  const int raw_h = static_cast<int>(read_scalar<uint32_t>(payload, "height"));
  const int raw_w = static_cast<int>(read_scalar<uint32_t>(payload, "width"));
  const int nw = static_cast<int>(read_scalar<uint32_t>(payload, "window count"));
  if (nw < 1 || nw > 32) raise(ErrorKind::Corruption, "implausible window count");
  std::vector<int> windows(static_cast<size_t>(nw));
  for (auto& k : windows)
    k = static_cast<int>(read_scalar<uint32_t>(payload, "window"));
  CombinationTable table;
  table.cfg = HierarchyConfig(raw_h, raw_w, windows);
  const uint64_t count = read_scalar<uint64_t>(payload, "entry count");
  for (uint64_t i = 0; i < count; ++i) {
    const GridCode code = read_string(payload, "code");
    TableEntry e;
    search_detail::read_combination(payload, table.cfg, e.best, e.best_loss,
                                    e.best_trace);
    search_detail::read_combination(payload, table.cfg, e.union_best,
                                    e.union_loss, e.union_trace);
    if (!table.entries.emplace(code, std::move(e)).second)
      raise(ErrorKind::Corruption, "duplicate code in index file: " + code);
  }
  return CombinationIndex::build(table);
}

}  // namespace o4ast
