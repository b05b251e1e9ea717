#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "hierarchy.hpp"
#include "io_util.hpp"

namespace o4ast {

// Per-scale, per-grid, per-channel time-indexed flow counts. Values are
// unsigned integers so that the parent = sum-of-children conservation
// invariant can be checked exactly.
class FlowSeries {
public:
  FlowSeries() = default;

  FlowSeries(HierarchyConfig cfg, int channels, int slots, long long slot_seconds,
             long long t0 = 0)
      : cfg_(std::move(cfg)), channels_(channels), slots_(slots),
        slot_seconds_(slot_seconds), t0_(t0) {
    if (channels_ < 1) raise(ErrorKind::Config, "channels must be >= 1");
    if (slots_ < 0) raise(ErrorKind::Config, "negative slot count");
    data_.resize(cfg_.layers());
    for (int l = 0; l < cfg_.layers(); ++l)
      data_[l].assign(static_cast<size_t>(channels_) * slots_ * cfg_.cell_count(l), 0);
  }

  const HierarchyConfig& hierarchy() const { return cfg_; }
  int channels() const { return channels_; }
  int slots() const { return slots_; }
  long long slot_seconds() const { return slot_seconds_; }
  long long t0() const { return t0_; }

  size_t index(int layer, int channel, int slot, int row, int col) const {
    return ((static_cast<size_t>(channel) * slots_ + slot) * cfg_.layer_height(layer) +
            row) * cfg_.layer_width(layer) + col;
  }

  uint32_t at(int layer, int channel, int slot, int row, int col) const {
    return data_[layer][index(layer, channel, slot, row, col)];
  }
  uint32_t& at(int layer, int channel, int slot, int row, int col) {
    return data_[layer][index(layer, channel, slot, row, col)];
  }

  const std::vector<uint32_t>& layer_data(int layer) const { return data_[layer]; }
  std::vector<uint32_t>& layer_data(int layer) { return data_[layer]; }

  long long dropped_records() const { return dropped_; }
  void set_dropped_records(long long n) { dropped_ = n; }

  bool operator==(const FlowSeries& o) const {
    return cfg_ == o.cfg_ && channels_ == o.channels_ && slots_ == o.slots_ &&
           slot_seconds_ == o.slot_seconds_ && t0_ == o.t0_ && data_ == o.data_;
  }

private:
  HierarchyConfig cfg_;
  int channels_ = 0;
  int slots_ = 0;
  long long slot_seconds_ = 0;
  long long t0_ = 0;
  long long dropped_ = 0;
  std::vector<std::vector<uint32_t>> data_;  // per layer: (channel, slot, row, col)
};

namespace flow_io {

inline constexpr char kMagic[16] = {'O', '4', 'A', 'S', 'T', 'F', 'L', 'O',
                                    'W', 'S', 'E', 'R', 'I', 'E', 'S', '\0'};
inline constexpr uint32_t kVersion = 1;

}  // namespace flow_io

inline void save_flow_series(const FlowSeries& fs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::Io, "cannot write flow file: " + path);
  write_bytes(out, flow_io::kMagic, sizeof(flow_io::kMagic));
  write_scalar<uint32_t>(out, flow_io::kVersion);
  const auto& cfg = fs.hierarchy();
  write_scalar<uint32_t>(out, static_cast<uint32_t>(cfg.raw_height()));
  write_scalar<uint32_t>(out, static_cast<uint32_t>(cfg.raw_width()));
  write_scalar<uint32_t>(out, static_cast<uint32_t>(cfg.windows().size()));
  for (int k : cfg.windows()) write_scalar<uint32_t>(out, static_cast<uint32_t>(k));
  write_scalar<uint32_t>(out, static_cast<uint32_t>(fs.channels()));
  write_scalar<uint32_t>(out, static_cast<uint32_t>(fs.slots()));
  write_scalar<int64_t>(out, fs.slot_seconds());
  write_scalar<int64_t>(out, fs.t0());
  write_scalar<int64_t>(out, fs.dropped_records());
  for (int l = 0; l < cfg.layers(); ++l) {
    const auto& d = fs.layer_data(l);
    write_bytes(out, d.data(), d.size() * sizeof(uint32_t));
  }
  if (!out) raise(ErrorKind::Io, "write failed: " + path);
}

inline FlowSeries load_flow_series(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::Io, "cannot open flow file: " + path);
  char magic[16];
  read_bytes(in, magic, sizeof(magic), "magic");
  if (std::memcmp(magic, flow_io::kMagic, sizeof(magic)) != 0)
    raise(ErrorKind::Format, "bad magic in flow file: " + path);
  const auto version = read_scalar<uint32_t>(in, "version");
  if (version != flow_io::kVersion)
    raise(ErrorKind::Format, "unsupported flow file version");
  const int raw_h = static_cast<int>(read_scalar<uint32_t>(in, "height"));
  const int raw_w = static_cast<int>(read_scalar<uint32_t>(in, "width"));
  const int nw = static_cast<int>(read_scalar<uint32_t>(in, "window count"));
  if (nw < 1 || nw > 32) raise(ErrorKind::Corruption, "implausible window count");
  std::vector<int> windows(nw);
  for (int i = 0; i < nw; ++i)
    windows[i] = static_cast<int>(read_scalar<uint32_t>(in, "window"));
  const int channels = static_cast<int>(read_scalar<uint32_t>(in, "channels"));
  const int slots = static_cast<int>(read_scalar<uint32_t>(in, "slots"));
  const auto slot_seconds = read_scalar<int64_t>(in, "slot seconds");
  const auto t0 = read_scalar<int64_t>(in, "t0");
  const auto dropped = read_scalar<int64_t>(in, "dropped counter");
  FlowSeries fs(HierarchyConfig(raw_h, raw_w, windows), channels, slots,
                slot_seconds, t0);
  fs.set_dropped_records(dropped);
  for (int l = 0; l < fs.hierarchy().layers(); ++l) {
    auto& d = fs.layer_data(l);
    read_bytes(in, d.data(), d.size() * sizeof(uint32_t), "flow values");
  }
  return fs;
}

}  // namespace o4ast
