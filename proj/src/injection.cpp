#include "freshrec/injection.hpp"

#include <algorithm>

#include "freshrec/rng.hpp"

namespace freshrec {

std::string_view arm_name(Arm arm) {
  return arm == Arm::control ? "control" : "treatment";
}

Arm parse_arm(std::string_view name) {
  if (name == "control") return Arm::control;
  if (name == "treatment") return Arm::treatment;
  fail("unknown arm '" + std::string(name) + "'");
}

MergedHistory merge_history(const HistorySnapshot* snapshot,
                            const RecentWindow& recent, std::size_t k_merge) {
  MergedHistory merged;
  merged.user_id = recent.user_id.empty() && snapshot ? snapshot->user_id
                                                      : recent.user_id;

  std::vector<MergedEntry>& out = merged.entries;
  out.reserve(recent.entries.size() +
              (snapshot ? snapshot->entries.size() : 0));
  std::unordered_map<ItemId, std::size_t> by_item;
  by_item.reserve(out.capacity());

  for (const RecentEntry& e : recent.entries) {
    by_item.emplace(e.item_id, out.size());
    out.push_back(MergedEntry{e.item_id, e.timestamp, e.weight,
                              HistorySource::recent});
  }
  if (snapshot) {
    for (const HistoryEntry& e : snapshot->entries) {
      auto [it, inserted] = by_item.emplace(e.item_id, out.size());
      if (inserted) {
        out.push_back(MergedEntry{e.item_id, e.timestamp, e.weight,
                                  HistorySource::batch});
      } else {
        // Only a strictly later batch timestamp displaces a recent entry;
        // ties stay with the recent side.
        MergedEntry& existing = out[it->second];
        if (e.timestamp > existing.timestamp) {
          existing = MergedEntry{e.item_id, e.timestamp, e.weight,
                                 HistorySource::batch};
        }
      }
    }
  }

  std::sort(out.begin(), out.end(), [](const MergedEntry& a, const MergedEntry& b) {
    if (a.timestamp != b.timestamp) return a.timestamp > b.timestamp;
    return a.item_id < b.item_id;
  });
  if (out.size() > k_merge) out.resize(k_merge);
  return merged;
}

ExperimentAssignment::ExperimentAssignment(const std::vector<UserId>& users,
                                           double split_ratio,
                                           const std::string& salt) {
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) {
    fail("split_ratio must be in (0,1)");
  }
  arms_.reserve(users.size());
  for (const UserId& user : users) {
    arms_[user] = hash_arm(user, split_ratio, salt);
  }
}

Arm ExperimentAssignment::hash_arm(const UserId& user_id, double split_ratio,
                                   std::string_view salt) {
  std::string key;
  key.reserve(salt.size() + user_id.size() + 1);
  key.append(salt);
  key.push_back('|');
  key.append(user_id);
  const double u = static_cast<double>(mix64(fnv1a64(key)) >> 11) * 0x1.0p-53;
  return u < split_ratio ? Arm::treatment : Arm::control;
}

Arm ExperimentAssignment::arm_of(const UserId& user_id) const {
  auto it = arms_.find(user_id);
  if (it == arms_.end()) {
    fail("user '" + user_id + "' has no experiment assignment");
  }
  return it->second;
}

std::size_t ExperimentAssignment::count(Arm arm) const {
  std::size_t n = 0;
  for (const auto& [_, a] : arms_) n += (a == arm) ? 1 : 0;
  return n;
}

}  // namespace freshrec
