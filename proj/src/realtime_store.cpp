#include "freshrec/realtime_store.hpp"

#include <algorithm>
#include <map>

#include "freshrec/rng.hpp"
#include "freshrec/strings.hpp"

namespace freshrec {

namespace {

bool window_order(const RecentEntry& a, const RecentEntry& b) {
  if (a.timestamp != b.timestamp) return a.timestamp > b.timestamp;
  return a.item_id < b.item_id;
}

}  // namespace

RealtimeStore::RealtimeStore() : RealtimeStore(Options{}) {}

RealtimeStore::RealtimeStore(Options options) : options_(options) {
  if (options_.capacity == 0) fail("realtime store capacity must be >= 1");
  if (options_.ttl_s <= 0) fail("realtime store ttl_s must be > 0");
  if (options_.shard_count == 0) options_.shard_count = 1;
  shards_.reserve(options_.shard_count);
  for (std::size_t i = 0; i < options_.shard_count; ++i) {
    shards_.push_back(std::make_unique<Shard>());
  }
}

RealtimeStore::Shard& RealtimeStore::shard_for(const UserId& user_id) {
  return *shards_[mix64(fnv1a64(user_id)) % shards_.size()];
}

const RealtimeStore::Shard& RealtimeStore::shard_for(const UserId& user_id) const {
  return *shards_[mix64(fnv1a64(user_id)) % shards_.size()];
}

void RealtimeStore::ingest(const WatchEvent& event) {
  validate_event(event);
  Shard& shard = shard_for(event.user_id);
  const RecentEntry entry{event.item_id, event.timestamp,
                          event.completion_fraction};

  std::lock_guard<std::mutex> lock(shard.mu);
  UserWindow& window = shard.users[event.user_id];
  auto& entries = window.entries;

  auto same_item = std::find_if(
      entries.begin(), entries.end(),
      [&](const RecentEntry& e) { return e.item_id == event.item_id; });
  if (same_item != entries.end()) {
    // Latest event per item wins; an older duplicate is a no-op.
    if (same_item->timestamp > entry.timestamp) return;
    entries.erase(same_item);
  }

  auto pos = std::lower_bound(entries.begin(), entries.end(), entry, window_order);
  entries.insert(pos, entry);
  if (entries.size() > options_.capacity) entries.pop_back();
}

RecentWindow RealtimeStore::get_recent(const UserId& user_id,
                                       std::int64_t now) const {
  RecentWindow window;
  window.user_id = user_id;
  window.ttl_s = options_.ttl_s;
  const Shard& shard = shard_for(user_id);

  std::lock_guard<std::mutex> lock(shard.mu);
  auto it = shard.users.find(user_id);
  if (it == shard.users.end()) return window;
  window.entries.reserve(it->second.entries.size());
  for (const RecentEntry& e : it->second.entries) {
    if (now - e.timestamp <= options_.ttl_s) window.entries.push_back(e);
  }
  return window;
}

std::size_t RealtimeStore::evict_expired(std::int64_t now) {
  std::size_t evicted = 0;
  for (auto& shard : shards_) {
    std::lock_guard<std::mutex> lock(shard->mu);
    for (auto it = shard->users.begin(); it != shard->users.end();) {
      auto& entries = it->second.entries;
      const std::size_t before = entries.size();
      entries.erase(std::remove_if(entries.begin(), entries.end(),
                                   [&](const RecentEntry& e) {
                                     return now - e.timestamp > options_.ttl_s;
                                   }),
                    entries.end());
      evicted += before - entries.size();
      if (entries.empty()) {
        it = shard->users.erase(it);
      } else {
        ++it;
      }
    }
  }
  return evicted;
}

std::size_t RealtimeStore::total_entries() const {
  std::size_t total = 0;
  for (const auto& shard : shards_) {
    std::lock_guard<std::mutex> lock(shard->mu);
    for (const auto& [_, window] : shard->users) total += window.entries.size();
  }
  return total;
}

std::size_t RealtimeStore::user_count() const {
  std::size_t total = 0;
  for (const auto& shard : shards_) {
    std::lock_guard<std::mutex> lock(shard->mu);
    total += shard->users.size();
  }
  return total;
}

void RealtimeStore::dump(std::ostream& out) const {
  std::map<UserId, std::vector<RecentEntry>> sorted;
  for (const auto& shard : shards_) {
    std::lock_guard<std::mutex> lock(shard->mu);
    for (const auto& [user, window] : shard->users) {
      sorted.emplace(user, window.entries);
    }
  }
  for (const auto& [user, entries] : sorted) {
    out << user << '|' << options_.ttl_s << '|';
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (i) out << ';';
      out << entries[i].item_id << ':' << entries[i].timestamp << ':'
          << fixed(entries[i].weight, 6);
    }
    out << '\n';
  }
}

}  // namespace freshrec
