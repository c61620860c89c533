#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "freshrec/types.hpp"

namespace freshrec {

struct BatchConfig {
  std::size_t k_batch = 50;      // history entries kept per user
  std::size_t m_neighbors = 10;  // similarity neighbors kept per item
  int d_pop_days = 7;            // trailing popularity window, days
};

struct HistoryEntry {
  ItemId item_id;
  std::int64_t timestamp = 0;
  double weight = 0.0;  // completion fraction of the event
};

// Per-user batch history frozen at a daily cutoff. Entries are sorted by
// timestamp descending (ties by item_id ascending), item ids unique, every
// timestamp < cutoff_ts.
struct HistorySnapshot {
  UserId user_id;
  std::vector<HistoryEntry> entries;
  std::int64_t cutoff_ts = 0;
};

class SnapshotStore {
 public:
  SnapshotStore() = default;
  explicit SnapshotStore(std::int64_t cutoff_ts) : cutoff_ts_(cutoff_ts) {}

  void put(HistorySnapshot snapshot);
  const HistorySnapshot* find(const UserId& user_id) const;

  std::int64_t cutoff_ts() const { return cutoff_ts_; }
  void set_cutoff_ts(std::int64_t ts) { cutoff_ts_ = ts; }
  std::size_t size() const { return by_user_.size(); }
  std::vector<UserId> user_ids_sorted() const;

 private:
  std::unordered_map<UserId, HistorySnapshot> by_user_;
  std::int64_t cutoff_ts_ = 0;
};

struct Neighbor {
  ItemId item_id;
  double score = 0.0;  // in (0, 1]
};

class SimilarityModel {
 public:
  // Neighbor lists must already be score-descending (ties item ascending)
  // and must not contain the key item itself.
  void put(const ItemId& item_id, std::vector<Neighbor> neighbors);
  const std::vector<Neighbor>& neighbors(const ItemId& item_id) const;

  std::size_t size() const { return by_item_.size(); }
  std::vector<ItemId> item_ids_sorted() const;

 private:
  std::unordered_map<ItemId, std::vector<Neighbor>> by_item_;
};

class PopularityTable {
 public:
  PopularityTable() = default;
  explicit PopularityTable(std::unordered_map<ItemId, std::int64_t> counts);

  std::int64_t count(const ItemId& item_id) const;  // 0 when absent
  std::int64_t max_count() const { return max_count_; }

  // Count descending, ties by item_id ascending; zero counts are not stored.
  const std::vector<std::pair<ItemId, std::int64_t>>& ranked() const {
    return ranked_;
  }

 private:
  std::unordered_map<ItemId, std::int64_t> counts_;
  std::vector<std::pair<ItemId, std::int64_t>> ranked_;
  std::int64_t max_count_ = 0;
};

struct BatchOutput {
  SnapshotStore snapshots;
  SimilarityModel similarity;
  PopularityTable popularity;
};

// The daily offline job: consumes only events with timestamp < cutoff_ts and
// produces snapshots, the co-occurrence similarity model and popularity
// counts. Pure function of (log contents before cutoff, catalog, config).
BatchOutput run_batch(const std::string& log_path, const Catalog& catalog,
                      std::int64_t cutoff_ts, const BatchConfig& config);

// Cosine similarity over binary user-item incidence:
// score(a,b) = cooc(a,b) / sqrt(count(a) * count(b)), truncated to the top
// m_neighbors per item (score descending, ties by item_id ascending).
// Each history must be a set (no duplicate items).
SimilarityModel cooccurrence_similarity(
    const std::vector<std::vector<ItemId>>& histories, std::size_t m_neighbors);

// Flat-file persistence; writers emit keys in sorted order so outputs are
// byte-stable for identical inputs.
void save_snapshots(const std::string& path, const SnapshotStore& store);
SnapshotStore load_snapshots(const std::string& path);
void save_similarity(const std::string& path, const SimilarityModel& model);
SimilarityModel load_similarity(const std::string& path);
void save_popularity(const std::string& path, const PopularityTable& table);
PopularityTable load_popularity(const std::string& path);

}  // namespace freshrec
