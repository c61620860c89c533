#include "freshrec/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace freshrec {

namespace {

std::unordered_set<ItemId> watched_items(const MergedHistory& history) {
  std::unordered_set<ItemId> watched;
  watched.reserve(history.entries.size());
  for (const MergedEntry& e : history.entries) watched.insert(e.item_id);
  return watched;
}

void sort_scored(std::vector<ScoredItem>& items) {
  std::sort(items.begin(), items.end(), [](const ScoredItem& a, const ScoredItem& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.item_id < b.item_id;
  });
}

}  // namespace

double recency_decay(std::int64_t delta_s, std::int64_t halflife_s) {
  if (delta_s <= 0) return 1.0;
  return std::exp2(-static_cast<double>(delta_s) /
                   static_cast<double>(halflife_s));
}

std::vector<ScoredItem> primary_recall(const MergedHistory& history,
                                       const SimilarityModel& sim,
                                       std::size_t limit, std::int64_t now,
                                       const RetrievalConfig& config) {
  if (limit < 1) fail("recall limit must be >= 1");
  if (history.entries.empty()) return {};

  const auto watched = watched_items(history);
  std::unordered_map<ItemId, double> scores;
  const std::size_t seed_count = std::min(config.h_seed, history.entries.size());
  for (std::size_t i = 0; i < seed_count; ++i) {
    const MergedEntry& seed = history.entries[i];
    const double decay = recency_decay(now - seed.timestamp, config.halflife_s);
    for (const Neighbor& neighbor : sim.neighbors(seed.item_id)) {
      if (watched.count(neighbor.item_id)) continue;
      scores[neighbor.item_id] += neighbor.score * decay;
    }
  }

  std::vector<ScoredItem> out;
  out.reserve(scores.size());
  for (const auto& [item, score] : scores) out.push_back(ScoredItem{item, score});
  sort_scored(out);
  if (out.size() > limit) out.resize(limit);
  return out;
}

std::vector<ScoredItem> popularity_recall(const PopularityTable& pop,
                                          const MergedHistory& history,
                                          std::size_t limit) {
  if (limit < 1) fail("recall limit must be >= 1");
  if (pop.max_count() == 0) return {};

  const auto watched = watched_items(history);
  const double max_count = static_cast<double>(pop.max_count());
  std::vector<ScoredItem> out;
  out.reserve(limit);
  for (const auto& [item, count] : pop.ranked()) {
    if (watched.count(item)) continue;
    out.push_back(ScoredItem{item, static_cast<double>(count) / max_count});
    if (out.size() == limit) break;
  }
  return out;
}

CandidateSet build_candidates(const MergedHistory& history,
                              const SimilarityModel& sim,
                              const PopularityTable& pop, std::int64_t now,
                              const RetrievalConfig& config) {
  CandidateSet set;
  const auto primary = primary_recall(history, sim, config.m_primary, now, config);
  const auto popular = popularity_recall(pop, history, config.m_pop);

  set.candidates.reserve(primary.size() + popular.size());
  std::unordered_set<ItemId> seen;
  seen.reserve(primary.size() + popular.size());
  for (const ScoredItem& s : primary) {
    seen.insert(s.item_id);
    set.candidates.push_back(
        Candidate{s.item_id, s.score, CandidateOrigin::primary});
  }
  for (const ScoredItem& s : popular) {
    if (!seen.insert(s.item_id).second) continue;  // primary origin wins
    set.candidates.push_back(
        Candidate{s.item_id, s.score, CandidateOrigin::popularity});
  }
  if (set.candidates.size() > config.c_max) set.candidates.resize(config.c_max);
  return set;
}

}  // namespace freshrec
