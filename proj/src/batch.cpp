#include "freshrec/batch.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "freshrec/event_log.hpp"
#include "freshrec/strings.hpp"

namespace freshrec {

namespace {

// Dense pair-count matrix up to this many distinct items; hash map beyond.
constexpr std::size_t kDenseCoocLimit = 4096;

bool entry_order(const HistoryEntry& a, const HistoryEntry& b) {
  if (a.timestamp != b.timestamp) return a.timestamp > b.timestamp;
  return a.item_id < b.item_id;
}

}  // namespace

void SnapshotStore::put(HistorySnapshot snapshot) {
  by_user_[snapshot.user_id] = std::move(snapshot);
}

const HistorySnapshot* SnapshotStore::find(const UserId& user_id) const {
  auto it = by_user_.find(user_id);
  return it == by_user_.end() ? nullptr : &it->second;
}

std::vector<UserId> SnapshotStore::user_ids_sorted() const {
  std::vector<UserId> ids;
  ids.reserve(by_user_.size());
  for (const auto& [id, _] : by_user_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

void SimilarityModel::put(const ItemId& item_id, std::vector<Neighbor> neighbors) {
  by_item_[item_id] = std::move(neighbors);
}

const std::vector<Neighbor>& SimilarityModel::neighbors(const ItemId& item_id) const {
  static const std::vector<Neighbor> kEmpty;
  auto it = by_item_.find(item_id);
  return it == by_item_.end() ? kEmpty : it->second;
}

std::vector<ItemId> SimilarityModel::item_ids_sorted() const {
  std::vector<ItemId> ids;
  ids.reserve(by_item_.size());
  for (const auto& [id, _] : by_item_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

PopularityTable::PopularityTable(std::unordered_map<ItemId, std::int64_t> counts)
    : counts_(std::move(counts)) {
  for (auto it = counts_.begin(); it != counts_.end();) {
    if (it->second < 0) fail("negative popularity count for '" + it->first + "'");
    if (it->second == 0) {
      it = counts_.erase(it);
    } else {
      ++it;
    }
  }
  ranked_.reserve(counts_.size());
  for (const auto& [id, count] : counts_) {
    ranked_.emplace_back(id, count);
    max_count_ = std::max(max_count_, count);
  }
  std::sort(ranked_.begin(), ranked_.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
}

std::int64_t PopularityTable::count(const ItemId& item_id) const {
  auto it = counts_.find(item_id);
  return it == counts_.end() ? 0 : it->second;
}

BatchOutput run_batch(const std::string& log_path, const Catalog& catalog,
                      std::int64_t cutoff_ts, const BatchConfig& config) {
  if (cutoff_ts <= 0) fail("cutoff_ts must be > 0");

  const std::vector<WatchEvent> events = read_events(log_path, 0, cutoff_ts);

  // Latest event per (user, item); equal timestamps resolve to file order.
  std::unordered_map<UserId, std::unordered_map<ItemId, HistoryEntry>> latest;
  std::unordered_map<ItemId, std::int64_t> pop_counts;
  const std::int64_t pop_from =
      cutoff_ts - static_cast<std::int64_t>(config.d_pop_days) * 86400;
  for (const WatchEvent& e : events) {
    catalog.at(e.item_id);  // unknown ids abort the batch
    HistoryEntry& slot = latest[e.user_id][e.item_id];
    if (slot.item_id.empty() || e.timestamp >= slot.timestamp) {
      slot = HistoryEntry{e.item_id, e.timestamp, e.completion_fraction};
    }
    if (e.timestamp >= pop_from) ++pop_counts[e.item_id];
  }

  BatchOutput out;
  out.snapshots = SnapshotStore(cutoff_ts);

  std::vector<UserId> users;
  users.reserve(latest.size());
  for (const auto& [user, _] : latest) users.push_back(user);
  std::sort(users.begin(), users.end());

  // Snapshots keep the k_batch newest entries; the similarity model learns
  // from each user's full deduplicated pre-cutoff history, which keeps the
  // co-occurrence graph dense enough to survive neighbor-list truncation.
  std::vector<std::vector<ItemId>> histories;
  histories.reserve(users.size());
  for (const UserId& user : users) {
    HistorySnapshot snapshot;
    snapshot.user_id = user;
    snapshot.cutoff_ts = cutoff_ts;
    auto& per_item = latest[user];
    snapshot.entries.reserve(per_item.size());
    for (auto& [_, entry] : per_item) snapshot.entries.push_back(std::move(entry));
    std::sort(snapshot.entries.begin(), snapshot.entries.end(), entry_order);
    std::vector<ItemId> history;
    history.reserve(snapshot.entries.size());
    for (const HistoryEntry& entry : snapshot.entries) {
      history.push_back(entry.item_id);
    }
    if (snapshot.entries.size() > config.k_batch) {
      snapshot.entries.resize(config.k_batch);
    }
    histories.push_back(std::move(history));
    out.snapshots.put(std::move(snapshot));
  }

  out.similarity = cooccurrence_similarity(histories, config.m_neighbors);
  out.popularity = PopularityTable(std::move(pop_counts));
  return out;
}

SimilarityModel cooccurrence_similarity(
    const std::vector<std::vector<ItemId>>& histories, std::size_t m_neighbors) {
  // Dense index over the distinct items actually watched; items that appear
  // in no history have no neighbors by construction.
  std::vector<ItemId> ids;
  {
    std::unordered_map<ItemId, std::size_t> seen;
    for (const auto& history : histories) {
      for (const ItemId& id : history) seen.emplace(id, 0);
    }
    ids.reserve(seen.size());
    for (const auto& [id, _] : seen) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
  }
  std::unordered_map<ItemId, std::uint32_t> index;
  index.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    index.emplace(ids[i], static_cast<std::uint32_t>(i));
  }
  const std::size_t n = ids.size();

  std::vector<std::int64_t> item_count(n, 0);
  const bool dense = n <= kDenseCoocLimit;
  std::vector<std::uint32_t> dense_cooc;
  std::unordered_map<std::uint64_t, std::uint32_t> sparse_cooc;
  if (dense) dense_cooc.assign(n * n, 0);

  std::vector<std::uint32_t> idxs;
  for (const auto& history : histories) {
    idxs.clear();
    idxs.reserve(history.size());
    for (const ItemId& id : history) idxs.push_back(index.at(id));
    std::sort(idxs.begin(), idxs.end());
    if (std::adjacent_find(idxs.begin(), idxs.end()) != idxs.end()) {
      fail("history contains a duplicate item; histories must be sets");
    }
    for (std::uint32_t i : idxs) ++item_count[i];
    for (std::size_t a = 0; a < idxs.size(); ++a) {
      for (std::size_t b = a + 1; b < idxs.size(); ++b) {
        if (dense) {
          ++dense_cooc[static_cast<std::size_t>(idxs[a]) * n + idxs[b]];
        } else {
          ++sparse_cooc[(static_cast<std::uint64_t>(idxs[a]) << 32) | idxs[b]];
        }
      }
    }
  }

  auto pair_score = [&](std::size_t a, std::size_t b, std::uint32_t c) {
    return static_cast<double>(c) /
           std::sqrt(static_cast<double>(item_count[a]) *
                     static_cast<double>(item_count[b]));
  };

  std::vector<std::vector<Neighbor>> adjacency(n);
  if (dense) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        const std::uint32_t c = dense_cooc[a * n + b];
        if (c == 0) continue;
        const double score = pair_score(a, b, c);
        adjacency[a].push_back(Neighbor{ids[b], score});
        adjacency[b].push_back(Neighbor{ids[a], score});
      }
    }
  } else {
    for (const auto& [key, c] : sparse_cooc) {
      const std::size_t a = static_cast<std::size_t>(key >> 32);
      const std::size_t b = static_cast<std::size_t>(key & 0xffffffffu);
      const double score = pair_score(a, b, c);
      adjacency[a].push_back(Neighbor{ids[b], score});
      adjacency[b].push_back(Neighbor{ids[a], score});
    }
  }

  SimilarityModel model;
  for (std::size_t a = 0; a < n; ++a) {
    std::vector<Neighbor>& neighbors = adjacency[a];
    if (neighbors.empty()) continue;
    std::sort(neighbors.begin(), neighbors.end(),
              [](const Neighbor& x, const Neighbor& y) {
                if (x.score != y.score) return x.score > y.score;
                return x.item_id < y.item_id;
              });
    if (neighbors.size() > m_neighbors) neighbors.resize(m_neighbors);
    model.put(ids[a], std::move(neighbors));
  }
  return model;
}

void save_snapshots(const std::string& path, const SnapshotStore& store) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail("cannot open '" + path + "' for writing");
  for (const UserId& user : store.user_ids_sorted()) {
    const HistorySnapshot* snapshot = store.find(user);
    out << user << '|' << snapshot->cutoff_ts << '|';
    for (std::size_t i = 0; i < snapshot->entries.size(); ++i) {
      const HistoryEntry& e = snapshot->entries[i];
      if (i) out << ';';
      out << e.item_id << ':' << e.timestamp << ':' << fixed(e.weight, 6);
    }
    out << '\n';
  }
  if (!out.flush()) fail("failed writing snapshots to '" + path + "'");
}

SnapshotStore load_snapshots(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open snapshot store '" + path + "'");
  SnapshotStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto parts = split(line, '|');
    if (parts.size() != 3) {
      fail("'" + path + "' line " + std::to_string(line_no) + ": malformed snapshot");
    }
    HistorySnapshot snapshot;
    snapshot.user_id = std::string(parts[0]);
    snapshot.cutoff_ts = parse_i64(parts[1], "cutoff_ts");
    store.set_cutoff_ts(snapshot.cutoff_ts);
    if (!parts[2].empty()) {
      for (std::string_view chunk : split(parts[2], ';')) {
        const auto f = split(chunk, ':');
        if (f.size() != 3) {
          fail("'" + path + "' line " + std::to_string(line_no) +
               ": malformed history entry");
        }
        snapshot.entries.push_back(HistoryEntry{
            std::string(f[0]), parse_i64(f[1], "timestamp"),
            parse_f64(f[2], "weight")});
      }
    }
    store.put(std::move(snapshot));
  }
  return store;
}

void save_similarity(const std::string& path, const SimilarityModel& model) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail("cannot open '" + path + "' for writing");
  for (const ItemId& item : model.item_ids_sorted()) {
    out << item << '|';
    const auto& neighbors = model.neighbors(item);
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
      if (i) out << ';';
      out << neighbors[i].item_id << ':' << fixed(neighbors[i].score, 6);
    }
    out << '\n';
  }
  if (!out.flush()) fail("failed writing similarity to '" + path + "'");
}

SimilarityModel load_similarity(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open similarity model '" + path + "'");
  SimilarityModel model;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto parts = split(line, '|');
    if (parts.size() != 2) {
      fail("'" + path + "' line " + std::to_string(line_no) + ": malformed entry");
    }
    std::vector<Neighbor> neighbors;
    if (!parts[1].empty()) {
      for (std::string_view chunk : split(parts[1], ';')) {
        const auto f = split(chunk, ':');
        if (f.size() != 2) {
          fail("'" + path + "' line " + std::to_string(line_no) +
               ": malformed neighbor");
        }
        neighbors.push_back(Neighbor{std::string(f[0]), parse_f64(f[1], "score")});
      }
    }
    model.put(std::string(parts[0]), std::move(neighbors));
  }
  return model;
}

void save_popularity(const std::string& path, const PopularityTable& table) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail("cannot open '" + path + "' for writing");
  std::vector<std::pair<ItemId, std::int64_t>> rows = table.ranked();
  std::sort(rows.begin(), rows.end());
  for (const auto& [item, count] : rows) out << item << ',' << count << '\n';
  if (!out.flush()) fail("failed writing popularity to '" + path + "'");
}

PopularityTable load_popularity(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open popularity table '" + path + "'");
  std::unordered_map<ItemId, std::int64_t> counts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2) {
      fail("'" + path + "' line " + std::to_string(line_no) + ": malformed count");
    }
    counts[std::string(fields[0])] = parse_i64(fields[1], "count");
  }
  return PopularityTable(std::move(counts));
}

}  // namespace freshrec
