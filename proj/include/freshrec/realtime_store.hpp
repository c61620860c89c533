#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "freshrec/types.hpp"

namespace freshrec {

struct RecentEntry {
  ItemId item_id;
  std::int64_t timestamp = 0;
  double weight = 0.0;
};

// A user's recent watch history at read time: sorted by timestamp descending
// (ties by item_id ascending), item ids unique, every entry within ttl_s of
// the read clock, length <= the store capacity.
struct RecentWindow {
  UserId user_id;
  std::vector<RecentEntry> entries;
  std::int64_t ttl_s = 0;
};

// In-memory real-time feature store. Thread-safe for many concurrent
// ingesters and readers; per-user operations linearize on the owning shard
// lock, and reads copy out the window so no reader observes a torn state.
//
// TTL is enforced lazily at read; evict_expired is an optional eager sweep
// that never changes what get_recent returns.
class RealtimeStore {
 public:
  struct Options {
    std::size_t capacity = 20;   // entries kept per user
    std::int64_t ttl_s = 86400;  // seconds a watch stays visible
    std::size_t shard_count = 64;
  };

  RealtimeStore();
  explicit RealtimeStore(Options options);

  // After ingest returns, a read at the same or later clock observes the
  // event unless it is displaced by capacity or expired by TTL. A second
  // event for the same item keeps only the later-timestamped entry.
  // Invalid events are rejected without state change.
  void ingest(const WatchEvent& event);

  RecentWindow get_recent(const UserId& user_id, std::int64_t now) const;

  // Physically removes entries with now - timestamp > ttl_s.
  std::size_t evict_expired(std::int64_t now);

  std::size_t total_entries() const;
  std::size_t user_count() const;
  std::int64_t ttl_s() const { return options_.ttl_s; }
  std::size_t capacity() const { return options_.capacity; }

  // Diagnostic dump, one user per line in the snapshot-store entry format
  // (the middle field carries the TTL). Users sorted by id.
  void dump(std::ostream& out) const;

 private:
  struct UserWindow {
    std::vector<RecentEntry> entries;  // timestamp desc, ties item_id asc
  };
  struct Shard {
    mutable std::mutex mu;
    std::unordered_map<UserId, UserWindow> users;
  };

  Shard& shard_for(const UserId& user_id);
  const Shard& shard_for(const UserId& user_id) const;

  Options options_;
  std::vector<std::unique_ptr<Shard>> shards_;
};

}  // namespace freshrec
