#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "geo.hpp"
#include "hierarchy.hpp"

namespace o4ast {

// Declarative dataset configuration: georeference, hierarchy and slotting.
//
//   origin_lat   = 40.75
//   origin_lng   = -74.0
//   cell_meters  = 150
//   height       = 32
//   width        = 32
//   windows      = 2,2,2
//   slot_seconds = 3600
//
// Lines starting with '#' are comments.
struct DatasetConfig {
  Georef geo;
  int height = 0;
  int width = 0;
  std::vector<int> windows;
  int channels = 1;
  long long slot_seconds = 3600;

  HierarchyConfig hierarchy() const {
    return HierarchyConfig(height, width, windows);
  }
};

namespace config_detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

}  // namespace config_detail

inline DatasetConfig parse_dataset_config(std::istream& in) {
  DatasetConfig cfg;
  bool have_h = false, have_w = false, have_windows = false;
  std::string line;
  while (std::getline(in, line)) {
    line = config_detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      raise(ErrorKind::Config, "expected key = value, got: " + line);
    const std::string key = config_detail::trim(line.substr(0, eq));
    const std::string val = config_detail::trim(line.substr(eq + 1));
    try {
      if (key == "origin_lat") cfg.geo.origin_lat = std::stod(val);
      else if (key == "origin_lng") cfg.geo.origin_lng = std::stod(val);
      else if (key == "cell_meters") cfg.geo.cell_meters = std::stod(val);
      else if (key == "height") { cfg.height = std::stoi(val); have_h = true; }
      else if (key == "width") { cfg.width = std::stoi(val); have_w = true; }
      else if (key == "windows") { cfg.windows = config_detail::parse_int_list(val); have_windows = true; }
      else if (key == "channels") cfg.channels = std::stoi(val);
      else if (key == "slot_seconds") cfg.slot_seconds = std::stoll(val);
      else raise(ErrorKind::Config, "unknown config key: " + key);
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      raise(ErrorKind::Config, "bad value for " + key + ": " + val);
    }
  }
  if (!have_h || !have_w || !have_windows)
    raise(ErrorKind::Config, "config requires height, width and windows");
  if (cfg.channels < 1) raise(ErrorKind::Config, "channels must be >= 1");
  if (cfg.slot_seconds <= 0) raise(ErrorKind::Config, "slot_seconds must be > 0");
  return cfg;
}

inline DatasetConfig load_dataset_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::Io, "cannot open config file: " + path);
  return parse_dataset_config(in);
}

}  // namespace o4ast
