#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include "freshrec/realtime_store.hpp"
#include "freshrec/rng.hpp"

using namespace freshrec;

namespace {

WatchEvent make_event(const std::string& user, const std::string& item,
                      std::int64_t ts, double frac = 0.5) {
  WatchEvent e;
  e.user_id = user;
  e.item_id = item;
  e.timestamp = ts;
  e.watch_duration_s = 10;
  e.completion_fraction = frac;
  return e;
}

// Sequential reference with the same visible contract: capacity, TTL at
// read, latest-event-per-item dedup, eviction of the sort-order tail.
class ReferenceStore {
 public:
  ReferenceStore(std::size_t cap, std::int64_t ttl) : cap_(cap), ttl_(ttl) {}

  void ingest(const WatchEvent& e) {
    auto& entries = users_[e.user_id];
    auto same = std::find_if(entries.begin(), entries.end(),
                             [&](const RecentEntry& x) {
                               return x.item_id == e.item_id;
                             });
    if (same != entries.end()) {
      if (same->timestamp > e.timestamp) return;
      entries.erase(same);
    }
    RecentEntry entry{e.item_id, e.timestamp, e.completion_fraction};
    auto pos = std::find_if(entries.begin(), entries.end(),
                            [&](const RecentEntry& x) {
                              if (x.timestamp != entry.timestamp) {
                                return x.timestamp < entry.timestamp;
                              }
                              return x.item_id > entry.item_id;
                            });
    entries.insert(pos, entry);
    if (entries.size() > cap_) entries.pop_back();
  }

  std::vector<RecentEntry> get(const UserId& user, std::int64_t now) const {
    std::vector<RecentEntry> out;
    auto it = users_.find(user);
    if (it == users_.end()) return out;
    for (const RecentEntry& e : it->second) {
      if (now - e.timestamp <= ttl_) out.push_back(e);
    }
    return out;
  }

 private:
  std::size_t cap_;
  std::int64_t ttl_;
  std::map<UserId, std::vector<RecentEntry>> users_;
};

bool entries_equal(const std::vector<RecentEntry>& a,
                   const std::vector<RecentEntry>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].item_id != b[i].item_id || a[i].timestamp != b[i].timestamp ||
        a[i].weight != b[i].weight) {
      return false;
    }
  }
  return true;
}

void check_window_invariants(const RecentWindow& window, std::size_t cap,
                             std::int64_t now) {
  CHECK(window.entries.size() <= cap);
  std::vector<ItemId> ids;
  for (std::size_t i = 0; i < window.entries.size(); ++i) {
    const RecentEntry& e = window.entries[i];
    CHECK(now - e.timestamp <= window.ttl_s);
    ids.push_back(e.item_id);
    if (i > 0) {
      const RecentEntry& prev = window.entries[i - 1];
      const bool ordered = prev.timestamp > e.timestamp ||
                           (prev.timestamp == e.timestamp &&
                            prev.item_id < e.item_id);
      CHECK(ordered);
    }
  }
  std::sort(ids.begin(), ids.end());
  CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
}

}  // namespace

TEST_CASE("single ingest is visible at its own timestamp") {
  RealtimeStore store;
  store.ingest(make_event("u", "a", 100));
  const RecentWindow window = store.get_recent("u", 100);
  REQUIRE(window.entries.size() == 1);
  CHECK(window.entries[0].item_id == "a");
}

TEST_CASE("capacity keeps the newest entries") {
  RealtimeStore store(RealtimeStore::Options{3, 86400, 4});
  ReferenceStore reference(3, 86400);
  for (int i = 0; i < 4; ++i) {
    const auto e = make_event("u", "i" + std::to_string(i), i + 1);
    store.ingest(e);
    reference.ingest(e);
  }
  const RecentWindow window = store.get_recent("u", 10);
  REQUIRE(window.entries.size() == 3);
  CHECK(window.entries[0].item_id == "i3");
  CHECK(window.entries[2].item_id == "i1");
  for (const RecentEntry& e : window.entries) CHECK(e.item_id != "i0");
  CHECK(entries_equal(window.entries, reference.get("u", 10)));
}

TEST_CASE("same-item ingest keeps the later timestamp") {
  RealtimeStore store;
  store.ingest(make_event("u", "a", 10, 0.1));
  store.ingest(make_event("u", "a", 20, 0.9));
  RecentWindow window = store.get_recent("u", 100);
  REQUIRE(window.entries.size() == 1);
  CHECK(window.entries[0].timestamp == 20);
  CHECK(window.entries[0].weight == doctest::Approx(0.9));

  // An older duplicate arriving late does not roll the entry back.
  store.ingest(make_event("u", "a", 5, 0.5));
  window = store.get_recent("u", 100);
  REQUIRE(window.entries.size() == 1);
  CHECK(window.entries[0].timestamp == 20);
}

TEST_CASE("unknown user reads empty; invalid events are rejected") {
  RealtimeStore store;
  CHECK(store.get_recent("nobody", 0).entries.empty());
  WatchEvent bad = make_event("u", "a", 10);
  bad.completion_fraction = 2.0;
  CHECK_THROWS_AS(store.ingest(bad), Error);
  CHECK(store.get_recent("u", 10).entries.empty());  // no state change
}

TEST_CASE("ttl boundary: exactly ttl old is included, one past is not") {
  RealtimeStore store(RealtimeStore::Options{20, 86400, 4});
  store.ingest(make_event("u", "a", 0));
  CHECK(store.get_recent("u", 86400).entries.size() == 1);
  CHECK(store.get_recent("u", 86401).entries.empty());
}

TEST_CASE("oracle: random op sequences match the sequential reference") {
  std::mt19937_64 rng = substream(21, "store-oracle");
  for (int schedule = 0; schedule < 500; ++schedule) {
    const std::size_t cap = 1 + uniform_index(rng, 5);
    const std::int64_t ttl = 10 + static_cast<std::int64_t>(uniform_index(rng, 200));
    RealtimeStore store(RealtimeStore::Options{cap, ttl, 2});
    ReferenceStore reference(cap, ttl);
    const int ops = 1 + static_cast<int>(uniform_index(rng, 40));
    std::int64_t clock = 0;
    for (int op = 0; op < ops; ++op) {
      clock += static_cast<std::int64_t>(uniform_index(rng, 40));
      const std::string user = "u" + std::to_string(uniform_index(rng, 3));
      if (uniform01(rng) < 0.7) {
        const auto e = make_event(
            user, "i" + std::to_string(uniform_index(rng, 8)),
            std::max<std::int64_t>(0, clock - static_cast<std::int64_t>(
                                                  uniform_index(rng, 60))),
            uniform01(rng));
        store.ingest(e);
        reference.ingest(e);
      } else {
        const RecentWindow window = store.get_recent(user, clock);
        CHECK(entries_equal(window.entries, reference.get(user, clock)));
        check_window_invariants(window, cap, clock);
      }
    }
    // Final sweep over all users and a few clocks.
    for (const char* user : {"u0", "u1", "u2"}) {
      for (std::int64_t now : {clock, clock + 50, clock + 1000}) {
        CHECK(entries_equal(store.get_recent(user, now).entries,
                            reference.get(user, now)));
      }
    }
  }
}

TEST_CASE("concurrent ingest/read schedules match the reference per user") {
  // Each thread owns a disjoint set of users, so per-user operation order is
  // program order; cross-user traffic hammers the shared shards.
  std::mt19937_64 rng = substream(22, "store-concurrent");
  constexpr int kThreads = 4;
  constexpr int kUsersPerThread = 3;
  constexpr int kOpsPerUser = 120;

  struct UserPlan {
    UserId user;
    std::vector<WatchEvent> events;
  };

  RealtimeStore store(RealtimeStore::Options{5, 300, 8});
  std::vector<std::vector<UserPlan>> plans(kThreads);
  for (int t = 0; t < kThreads; ++t) {
    for (int u = 0; u < kUsersPerThread; ++u) {
      UserPlan plan;
      plan.user = "t" + std::to_string(t) + "_u" + std::to_string(u);
      std::int64_t clock = 0;
      for (int i = 0; i < kOpsPerUser; ++i) {
        clock += static_cast<std::int64_t>(uniform_index(rng, 20));
        plan.events.push_back(make_event(
            plan.user, "i" + std::to_string(uniform_index(rng, 9)), clock,
            uniform01(rng)));
      }
      plans[t].push_back(std::move(plan));
    }
  }

  std::vector<std::thread> threads;
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&, t] {
      for (const UserPlan& plan : plans[t]) {
        for (const WatchEvent& e : plan.events) {
          store.ingest(e);
          // Interleave reads; invariants must hold mid-stream.
          const RecentWindow window = store.get_recent(plan.user, e.timestamp);
          check_window_invariants(window, 5, e.timestamp);
        }
      }
    });
  }
  for (std::thread& t : threads) t.join();

  for (int t = 0; t < kThreads; ++t) {
    for (const UserPlan& plan : plans[t]) {
      ReferenceStore reference(5, 300);
      std::int64_t last = 0;
      for (const WatchEvent& e : plan.events) {
        reference.ingest(e);
        last = std::max(last, e.timestamp);
      }
      CHECK(entries_equal(store.get_recent(plan.user, last).entries,
                          reference.get(plan.user, last)));
    }
  }
}

TEST_CASE("eager eviction never changes reads") {
  std::mt19937_64 rng = substream(23, "store-evict");
  for (int round = 0; round < 1000; ++round) {
    const std::size_t cap = 1 + uniform_index(rng, 6);
    const std::int64_t ttl = 5 + static_cast<std::int64_t>(uniform_index(rng, 100));
    RealtimeStore lazy(RealtimeStore::Options{cap, ttl, 2});
    RealtimeStore eager(RealtimeStore::Options{cap, ttl, 2});
    const int n = static_cast<int>(uniform_index(rng, 25));
    std::int64_t max_ts = 0;
    for (int i = 0; i < n; ++i) {
      const auto e = make_event(
          "u" + std::to_string(uniform_index(rng, 2)),
          "i" + std::to_string(uniform_index(rng, 6)),
          static_cast<std::int64_t>(uniform_index(rng, 300)), uniform01(rng));
      lazy.ingest(e);
      eager.ingest(e);
      max_ts = std::max(max_ts, e.timestamp);
    }
    const std::int64_t sweep_at =
        static_cast<std::int64_t>(uniform_index(rng, 400));
    eager.evict_expired(sweep_at);
    for (const char* user : {"u0", "u1"}) {
      for (std::int64_t now = sweep_at; now < sweep_at + 40; now += 13) {
        CHECK(entries_equal(lazy.get_recent(user, now).entries,
                            eager.get_recent(user, now).entries));
      }
    }
  }
}

TEST_CASE("evict_expired counts and removes exactly the expired entries") {
  RealtimeStore store(RealtimeStore::Options{10, 100, 2});
  CHECK(store.evict_expired(1000) == 0);
  store.ingest(make_event("u", "a", 10));
  store.ingest(make_event("u", "b", 20));
  store.ingest(make_event("u", "c", 30));
  store.ingest(make_event("v", "d", 500));
  store.ingest(make_event("v", "e", 510));
  // At now=600: a,b,c are expired (600-30 > 100), d,e are live.
  const auto before_u = store.get_recent("u", 600);
  const auto before_v = store.get_recent("v", 600);
  CHECK(store.evict_expired(600) == 3);
  CHECK(entries_equal(store.get_recent("u", 600).entries, before_u.entries));
  CHECK(entries_equal(store.get_recent("v", 600).entries, before_v.entries));
  CHECK(store.total_entries() == 2);
}

TEST_CASE("monotone ttl: once excluded, always excluded") {
  RealtimeStore store(RealtimeStore::Options{10, 50, 2});
  store.ingest(make_event("u", "a", 100));
  bool seen_excluded = false;
  for (std::int64_t now = 100; now <= 200; ++now) {
    const bool visible = !store.get_recent("u", now).entries.empty();
    if (seen_excluded) CHECK(!visible);
    if (!visible) seen_excluded = true;
  }
  CHECK(seen_excluded);
}

TEST_CASE("bounded memory: entries never exceed users * capacity") {
  std::mt19937_64 rng = substream(24, "store-bound");
  RealtimeStore store(RealtimeStore::Options{4, 1000, 4});
  std::set<std::string> users;
  for (int i = 0; i < 500; ++i) {
    const std::string user = "u" + std::to_string(uniform_index(rng, 7));
    users.insert(user);
    store.ingest(make_event(user, "i" + std::to_string(uniform_index(rng, 40)),
                            static_cast<std::int64_t>(i)));
    CHECK(store.total_entries() <= users.size() * 4);
  }
  CHECK(store.user_count() == users.size());
}

TEST_CASE("dump renders sorted users in the snapshot line format") {
  RealtimeStore store(RealtimeStore::Options{4, 600, 2});
  store.ingest(make_event("ub", "x", 10, 0.25));
  store.ingest(make_event("ua", "y", 20, 1.0));
  std::ostringstream out;
  store.dump(out);
  CHECK(out.str() == "ua|600|y:20:1.000000\nub|600|x:10:0.250000\n");
}
