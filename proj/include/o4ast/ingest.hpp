#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "error.hpp"
#include "flow_series.hpp"
#include "geo.hpp"
#include "hierarchy.hpp"

namespace o4ast {

struct EventRecord {
  long long timestamp = 0;  // seconds since epoch
  double lat = 0.0;
  double lng = 0.0;
  int channel = 0;
};

struct SlotRange {
  int begin = 0;
  int end = 0;  // half-open

  int length() const { return end - begin; }
  bool contains(int slot) const { return slot >= begin && slot < end; }
};

struct SplitRanges {
  SlotRange train, validation, test;
};

namespace ingest_detail {

inline std::optional<long long> parse_timestamp(const std::string& raw) {
  if (raw.empty()) return std::nullopt;
  // Unix seconds.
  if (raw.find_first_not_of("0123456789-") == std::string::npos) {
    try {
      return std::stoll(raw);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  // ISO-8601 "YYYY-MM-DDTHH:MM:SS" (optional trailing Z, space accepted).
  std::tm tm{};
  std::string s = raw;
  if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.pop_back();
  std::replace(s.begin(), s.end(), ' ', 'T');
  std::istringstream in(s);
  in >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%S");
  if (in.fail()) return std::nullopt;
  return static_cast<long long>(timegm(&tm));
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  // RFC 4180 fields; quoted fields supported, embedded quotes doubled.
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(field);
  return out;
}

}  // namespace ingest_detail

// CSV with header `timestamp,lat,lng,channel`. Unparseable rows are
// dropped and counted.
inline std::vector<EventRecord> read_event_csv(std::istream& in,
                                               long long* malformed = nullptr) {
  std::vector<EventRecord> records;
  std::string line;
  if (!std::getline(in, line)) raise(ErrorKind::Format, "empty event CSV");
  long long bad = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = ingest_detail::split_csv_line(line);
    if (fields.size() < 4) {
      ++bad;
      continue;
    }
    const auto ts = ingest_detail::parse_timestamp(fields[0]);
    if (!ts) {
      ++bad;
      continue;
    }
    try {
      EventRecord r;
      r.timestamp = *ts;
      r.lat = std::stod(fields[1]);
      r.lng = std::stod(fields[2]);
      r.channel = std::stoi(fields[3]);
      if (!std::isfinite(r.lat) || !std::isfinite(r.lng) || r.channel < 0) {
        ++bad;
        continue;
      }
      records.push_back(r);
    } catch (const std::exception&) {
      ++bad;
    }
  }
  if (malformed) *malformed = bad;
  return records;
}

inline std::vector<EventRecord> read_event_csv_file(const std::string& path,
                                                    long long* malformed = nullptr) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::Io, "cannot open event CSV: " + path);
  return read_event_csv(in, malformed);
}

inline void write_event_csv(const std::vector<EventRecord>& records,
                            std::ostream& out) {
  out << "timestamp,lat,lng,channel\n";
  out.precision(9);
  out << std::fixed;
  for (const auto& r : records)
    out << r.timestamp << ',' << r.lat << ',' << r.lng << ',' << r.channel << '\n';
}

// Bin events into the atomic layer. Coarser layers stay zero until
// aggregate_scales. Records outside the raster, outside [t0, t0+slots),
// or with channel >= channels are dropped and counted.
inline FlowSeries slot_records(const std::vector<EventRecord>& records,
                               const HierarchyConfig& cfg, const Georef& geo,
                               long long slot_seconds, int channels,
                               std::optional<long long> t0 = std::nullopt,
                               std::optional<int> slots = std::nullopt) {
  if (slot_seconds <= 0) raise(ErrorKind::Config, "slot duration must be > 0");
  if (records.empty()) raise(ErrorKind::EmptyDataset, "no input records");

  long long start = 0;
  if (t0) {
    start = *t0;
  } else {
    long long tmin = std::numeric_limits<long long>::max();
    for (const auto& r : records) tmin = std::min(tmin, r.timestamp);
    start = (tmin / slot_seconds) * slot_seconds;
    if (tmin < 0 && start > tmin) start -= slot_seconds;
  }
  int total_slots = 0;
  if (slots) {
    total_slots = *slots;
  } else {
    long long tmax = std::numeric_limits<long long>::min();
    for (const auto& r : records) tmax = std::max(tmax, r.timestamp);
    total_slots = static_cast<int>((tmax - start) / slot_seconds) + 1;
  }

  FlowSeries fs(cfg, channels, total_slots, slot_seconds, start);
  long long dropped = 0;
  long long kept = 0;
  for (const auto& r : records) {
    const long long slot = (r.timestamp - start) / slot_seconds;
    const auto [row, col] =
        geo.cell_of(r.lat, r.lng, cfg.raw_height(), cfg.raw_width());
    if (row < 0 || r.timestamp < start || slot >= total_slots ||
        r.channel >= channels) {
      ++dropped;
      continue;
    }
    ++fs.at(0, r.channel, static_cast<int>(slot), row, col);
    ++kept;
  }
  if (kept == 0)
    raise(ErrorKind::EmptyDataset, "no records inside raster and time window");
  fs.set_dropped_records(dropped);
  return fs;
}

// Exact integer roll-up: every coarser cell is the sum of its children.
inline void aggregate_scales(FlowSeries& fs) {
  const auto& cfg = fs.hierarchy();
  for (int l = 1; l < cfg.layers(); ++l) {
    const int k = cfg.window(l - 1);
    const int ph = cfg.layer_height(l), pw = cfg.layer_width(l);
    for (int c = 0; c < fs.channels(); ++c)
      for (int t = 0; t < fs.slots(); ++t)
        for (int r = 0; r < ph; ++r)
          for (int cc = 0; cc < pw; ++cc) {
            uint64_t sum = 0;
            for (int dr = 0; dr < k; ++dr)
              for (int dc = 0; dc < k; ++dc)
                sum += fs.at(l - 1, c, t, r * k + dr, cc * k + dc);
            fs.at(l, c, t, r, cc) = static_cast<uint32_t>(sum);
          }
  }
}

// Contiguous chronological split: floor(train) then floor(validation),
// remainder test.
inline SplitRanges split_dataset(int total_slots, double train_ratio = 0.7,
                                 double validation_ratio = 0.1) {
  const int train = static_cast<int>(std::floor(total_slots * train_ratio));
  const int validation = static_cast<int>(std::floor(total_slots * validation_ratio));
  const int test = total_slots - train - validation;
  if (train < 1 || validation < 1 || test < 1)
    raise(ErrorKind::Config, "dataset too small for a " +
                                 std::to_string(train_ratio) + "/" +
                                 std::to_string(validation_ratio) + " split");
  SplitRanges s;
  s.train = {0, train};
  s.validation = {train, train + validation};
  s.test = {train + validation, total_slots};
  return s;
}

}  // namespace o4ast
