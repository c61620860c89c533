#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "freshrec/batch.hpp"
#include "freshrec/realtime_store.hpp"

namespace freshrec {

enum class Arm { control, treatment };

std::string_view arm_name(Arm arm);
Arm parse_arm(std::string_view name);

enum class HistorySource { batch, recent };

struct MergedEntry {
  ItemId item_id;
  std::int64_t timestamp = 0;
  double weight = 0.0;
  HistorySource source = HistorySource::batch;
};

// The inference-time union of batch snapshot and recent window. Downstream
// stages consume it through the same shape as batch history: timestamp
// descending (ties item_id ascending), unique item ids, capped length.
struct MergedHistory {
  UserId user_id;
  std::vector<MergedEntry> entries;
};

// Deduplicates by item id — the later timestamp wins, and the recent side
// wins exact-timestamp ties — then sorts and keeps the k_merge newest.
// An absent snapshot (nullptr) is treated as empty. The recent window must
// already be TTL-filtered by its reader.
MergedHistory merge_history(const HistorySnapshot* snapshot,
                            const RecentWindow& recent,
                            std::size_t k_merge = 50);

// Deterministic salted-hash A/B split over a fixed user population.
class ExperimentAssignment {
 public:
  ExperimentAssignment() = default;
  ExperimentAssignment(const std::vector<UserId>& users, double split_ratio,
                       const std::string& salt);

  // The underlying rule; treatment iff the salted hash of the user id falls
  // below split_ratio.
  static Arm hash_arm(const UserId& user_id, double split_ratio,
                      std::string_view salt);

  Arm arm_of(const UserId& user_id) const;  // Error for users outside the table

  std::size_t size() const { return arms_.size(); }
  std::size_t count(Arm arm) const;

 private:
  std::unordered_map<UserId, Arm> arms_;
};

}  // namespace freshrec
