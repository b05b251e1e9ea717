#pragma once

#include <string>
#include <vector>

#include "error.hpp"

namespace o4ast {

// Hierarchical grid geometry. Layer 0 is the atomic raster; layer l+1 is
// built from layer l by merging windows[l] x windows[l] blocks. scale(l)
// is the side length of a layer-l cell measured in atomic cells.
class HierarchyConfig {
public:
  HierarchyConfig() = default;

  HierarchyConfig(int height, int width, std::vector<int> windows)
      : raw_height_(height), raw_width_(width), windows_(std::move(windows)) {
    if (raw_height_ < 1 || raw_width_ < 1)
      raise(ErrorKind::Config, "raster dimensions must be >= 1");
    if (windows_.empty())
      raise(ErrorKind::Config, "at least one merging window required");
    scales_.push_back(1);
    for (int k : windows_) {
      if (k < 2) raise(ErrorKind::Config, "merging window must be >= 2");
      scales_.push_back(scales_.back() * k);
    }
    const int coarsest = scales_.back();
    height_ = ((raw_height_ + coarsest - 1) / coarsest) * coarsest;
    width_ = ((raw_width_ + coarsest - 1) / coarsest) * coarsest;
  }

  int raw_height() const { return raw_height_; }
  int raw_width() const { return raw_width_; }
  int height() const { return height_; }
  int width() const { return width_; }
  bool padded() const { return height_ != raw_height_ || width_ != raw_width_; }

  // True for atomic cells introduced by the bottom/right zero padding.
  bool is_padding(int row, int col) const {
    return row >= raw_height_ || col >= raw_width_;
  }

  int layers() const { return static_cast<int>(scales_.size()); }
  const std::vector<int>& scales() const { return scales_; }
  int scale(int layer) const { return scales_.at(layer); }

  // Window merging layer `layer` into layer `layer + 1`.
  int window(int layer) const { return windows_.at(layer); }
  const std::vector<int>& windows() const { return windows_; }

  int layer_height(int layer) const { return height_ / scale(layer); }
  int layer_width(int layer) const { return width_ / scale(layer); }
  long long cell_count(int layer) const {
    return static_cast<long long>(layer_height(layer)) * layer_width(layer);
  }

  // Layer of a given scale factor; Schema error when absent from P.
  int layer_of_scale(int s) const {
    for (int l = 0; l < layers(); ++l)
      if (scales_[l] == s) return l;
    raise(ErrorKind::Schema, "scale " + std::to_string(s) + " not in hierarchy");
  }

  // Multi-grid coding is defined only where the merging window is 2.
  bool multi_enabled(int layer) const {
    return layer + 1 < layers() && window(layer) == 2;
  }

  bool operator==(const HierarchyConfig& o) const {
    return raw_height_ == o.raw_height_ && raw_width_ == o.raw_width_ &&
           windows_ == o.windows_;
  }

private:
  int raw_height_ = 0;
  int raw_width_ = 0;
  std::vector<int> windows_;
  std::vector<int> scales_;
  int height_ = 0;
  int width_ = 0;
};

inline HierarchyConfig build_hierarchy(int height, int width,
                                       const std::vector<int>& windows) {
  return HierarchyConfig(height, width, windows);
}

}  // namespace o4ast
