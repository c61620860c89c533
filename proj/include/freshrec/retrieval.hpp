#pragma once

#include <cstdint>
#include <vector>

#include "freshrec/batch.hpp"
#include "freshrec/injection.hpp"

namespace freshrec {

struct RetrievalConfig {
  std::size_t h_seed = 10;       // newest history entries used as seeds
  std::size_t m_primary = 100;   // primary recaller limit
  std::size_t m_pop = 20;        // popularity recaller limit
  std::size_t c_max = 100;       // candidate pool cap
  // Six hours: history decay anchors scoring on the latest few watches, so
  // injected events can restyle the list before the next batch lands.
  std::int64_t halflife_s = 21600;
};

// 0.5^(delta/halflife); deltas clamp at zero so a not-yet-released candidate
// scores like a brand new one.
double recency_decay(std::int64_t delta_s, std::int64_t halflife_s);

struct ScoredItem {
  ItemId item_id;
  double score = 0.0;
};

enum class CandidateOrigin { primary, popularity };

struct Candidate {
  ItemId item_id;
  double recall_score = 0.0;
  CandidateOrigin origin = CandidateOrigin::primary;
};

// Union of both recallers: unique item ids, primary origin wins overlaps,
// nothing the user has already watched.
struct CandidateSet {
  std::vector<Candidate> candidates;
};

// Seeds the similarity model with the newest history entries; candidate
// score is sum over seeds of sim(seed, candidate) * decay(now - seed.ts).
// Watched items are excluded; the top `limit` by score (ties item_id
// ascending) are returned.
std::vector<ScoredItem> primary_recall(const MergedHistory& history,
                                       const SimilarityModel& sim,
                                       std::size_t limit, std::int64_t now,
                                       const RetrievalConfig& config);

// Top `limit` unwatched items by trailing-window count, score normalized by
// the table's max count. Zero-count items never appear.
std::vector<ScoredItem> popularity_recall(const PopularityTable& pop,
                                          const MergedHistory& history,
                                          std::size_t limit);

CandidateSet build_candidates(const MergedHistory& history,
                              const SimilarityModel& sim,
                              const PopularityTable& pop, std::int64_t now,
                              const RetrievalConfig& config);

}  // namespace freshrec
