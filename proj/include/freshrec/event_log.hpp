#pragma once

#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "freshrec/types.hpp"

namespace freshrec {

// Synthetic catalog: each item gets a sparse mixture of 1-3 active genres,
// normalized to unit length, and a release day in the year before the
// simulated epoch. Deterministic for a fixed seed.
Catalog generate_catalog(std::size_t item_count, int genre_count,
                         std::uint64_t seed);

void write_catalog(const std::string& path, const Catalog& catalog);
Catalog read_catalog(const std::string& path);

// Line format: user_id,item_id,timestamp,watch_duration_s,completion_fraction
// (completion with 6 decimals).
std::string format_event(const WatchEvent& e);
WatchEvent parse_event(std::string_view line);

// Appends one record per line; the batch must be sorted by timestamp
// ascending (ties allowed). Returns the number written. An empty batch
// leaves the file untouched.
std::size_t append_events(const std::string& path,
                          const std::vector<WatchEvent>& events);

// Returns events with from_ts <= timestamp < to_ts in file order.
// A malformed line raises an Error naming the line number; a missing file
// raises a distinct "cannot open" Error.
std::vector<WatchEvent> read_events(const std::string& path,
                                    std::int64_t from_ts, std::int64_t to_ts);

// Incremental single-writer used by the simulator and the serving layer.
// Enforces non-decreasing timestamps over the life of the log.
class EventLogWriter {
 public:
  explicit EventLogWriter(std::string path, bool truncate = false);

  void append(const WatchEvent& e);
  void flush();

  std::size_t written() const { return written_; }

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t written_ = 0;
  std::int64_t last_ts_ = std::numeric_limits<std::int64_t>::min();
};

}  // namespace freshrec
