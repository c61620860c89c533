#include "freshrec/event_log.hpp"

#include <algorithm>
#include <cmath>

#include "freshrec/rng.hpp"
#include "freshrec/strings.hpp"

namespace freshrec {

Catalog generate_catalog(std::size_t item_count, int genre_count,
                         std::uint64_t seed) {
  if (item_count < 1) fail("item_count must be >= 1");
  if (genre_count < 2) fail("genre_count must be >= 2");

  std::mt19937_64 rng = substream(seed, "catalog");
  Catalog catalog(genre_count);
  std::vector<int> genres(static_cast<std::size_t>(genre_count));
  for (int g = 0; g < genre_count; ++g) genres[static_cast<std::size_t>(g)] = g;

  for (std::size_t i = 0; i < item_count; ++i) {
    const std::size_t active =
        std::min<std::size_t>(1 + uniform_index(rng, 3),
                              static_cast<std::size_t>(genre_count));
    // Partial Fisher-Yates to pick `active` distinct genres.
    for (std::size_t k = 0; k < active; ++k) {
      const std::size_t j =
          k + uniform_index(rng, static_cast<std::uint64_t>(genres.size() - k));
      std::swap(genres[k], genres[j]);
    }
    Item item;
    item.item_id = "i" + std::to_string(i);
    item.genre_vector.assign(static_cast<std::size_t>(genre_count), 0.0);
    // One dominant genre plus faint secondary flavors. Keeps every genre's
    // pool of strongly-aligned titles deep relative to what a user can watch.
    item.genre_vector[static_cast<std::size_t>(genres[0])] = 1.0;
    for (std::size_t k = 1; k < active; ++k) {
      item.genre_vector[static_cast<std::size_t>(genres[k])] =
          uniform_range(rng, 0.08, 0.3);
    }
    const double norm = l2_norm(item.genre_vector);
    for (double& g : item.genre_vector) g /= norm;
    // Catalog predates the simulated epoch so candidate ages are
    // non-negative from day zero.
    item.release_day = -static_cast<std::int64_t>(uniform_index(rng, 365));
    catalog.add(std::move(item));
  }
  return catalog;
}

void write_catalog(const std::string& path, const Catalog& catalog) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail("cannot open '" + path + "' for writing");
  out << "genre_count=" << catalog.genre_count() << "\n";
  for (const Item& item : catalog.items()) {
    out << item.item_id << ',' << item.release_day;
    for (double g : item.genre_vector) out << ',' << full_precision(g);
    out << '\n';
  }
  if (!out.flush()) fail("failed writing catalog to '" + path + "'");
}

Catalog read_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open catalog '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) fail("catalog '" + path + "' is empty");
  const std::string_view header = line;
  if (header.rfind("genre_count=", 0) != 0) {
    fail("catalog '" + path + "' line 1: expected genre_count header");
  }
  const int genre_count =
      static_cast<int>(parse_i64(header.substr(12), "genre_count"));
  Catalog catalog(genre_count);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2 + static_cast<std::size_t>(genre_count)) {
      fail("catalog '" + path + "' line " + std::to_string(line_no) +
           ": wrong field count");
    }
    Item item;
    item.item_id = std::string(fields[0]);
    item.release_day = parse_i64(fields[1], "release_day");
    item.genre_vector.reserve(static_cast<std::size_t>(genre_count));
    for (int g = 0; g < genre_count; ++g) {
      item.genre_vector.push_back(
          parse_f64(fields[2 + static_cast<std::size_t>(g)], "genre entry"));
    }
    catalog.add(std::move(item));
  }
  return catalog;
}

std::string format_event(const WatchEvent& e) {
  std::string line;
  line.reserve(e.user_id.size() + e.item_id.size() + 40);
  line += e.user_id;
  line += ',';
  line += e.item_id;
  line += ',';
  line += std::to_string(e.timestamp);
  line += ',';
  line += std::to_string(e.watch_duration_s);
  line += ',';
  line += fixed(e.completion_fraction, 6);
  return line;
}

WatchEvent parse_event(std::string_view line) {
  const auto fields = split(line, ',');
  if (fields.size() != 5) fail("expected 5 comma-separated fields");
  WatchEvent e;
  e.user_id = std::string(fields[0]);
  e.item_id = std::string(fields[1]);
  e.timestamp = parse_i64(fields[2], "timestamp");
  e.watch_duration_s = parse_i64(fields[3], "watch_duration_s");
  e.completion_fraction = parse_f64(fields[4], "completion_fraction");
  validate_event(e);
  return e;
}

std::size_t append_events(const std::string& path,
                          const std::vector<WatchEvent>& events) {
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    if (events[i].timestamp > events[i + 1].timestamp) {
      fail("unsorted events: timestamp " + std::to_string(events[i + 1].timestamp) +
           " follows " + std::to_string(events[i].timestamp));
    }
  }
  if (events.empty()) return 0;
  std::ofstream out(path, std::ios::app);
  if (!out) fail("cannot open '" + path + "' for append");
  for (const WatchEvent& e : events) {
    validate_event(e);
    out << format_event(e) << '\n';
  }
  if (!out.flush()) fail("failed appending events to '" + path + "'");
  return events.size();
}

std::vector<WatchEvent> read_events(const std::string& path,
                                    std::int64_t from_ts, std::int64_t to_ts) {
  if (from_ts > to_ts) fail("invalid range: from_ts > to_ts");
  std::ifstream in(path);
  if (!in) fail("cannot open event log '" + path + "'");
  std::vector<WatchEvent> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    WatchEvent e;
    try {
      e = parse_event(line);
    } catch (const Error& err) {
      fail("'" + path + "' line " + std::to_string(line_no) + ": " + err.what());
    }
    if (e.timestamp >= from_ts && e.timestamp < to_ts) out.push_back(std::move(e));
  }
  return out;
}

EventLogWriter::EventLogWriter(std::string path, bool truncate)
    : path_(std::move(path)),
      out_(path_, truncate ? std::ios::trunc : std::ios::app) {
  if (!out_) fail("cannot open '" + path_ + "' for append");
}

void EventLogWriter::append(const WatchEvent& e) {
  validate_event(e);
  if (e.timestamp < last_ts_) {
    fail("unsorted events: timestamp " + std::to_string(e.timestamp) +
         " follows " + std::to_string(last_ts_));
  }
  out_ << format_event(e) << '\n';
  if (!out_) fail("failed appending events to '" + path_ + "'");
  last_ts_ = e.timestamp;
  ++written_;
}

void EventLogWriter::flush() {
  if (!out_.flush()) fail("failed flushing '" + path_ + "'");
}

}  // namespace freshrec
