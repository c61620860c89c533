#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "freshrec/injection.hpp"
#include "freshrec/ranking.hpp"
#include "freshrec/realtime_store.hpp"
#include "freshrec/retrieval.hpp"

namespace freshrec {

struct ServingConfig {
  std::size_t list_length = 10;  // L_list, also the requested_count ceiling
  std::size_t k_merge = 50;
  RetrievalConfig retrieval;
};

struct RecRequest {
  UserId user_id;
  std::int64_t now = 0;
  std::size_t requested_count = 0;  // in [1, list_length]
};

struct Impression {
  RecRequest request;
  Arm arm = Arm::control;
  std::vector<RankedEntry> items;
  std::int64_t served_at = 0;
};

// Audit-log line: user,now,requested_count,arm,rank:item:score;...
std::string format_impression(const Impression& impression);

using ImpressionSink = std::function<void(const Impression&)>;

// One recommendation request end to end: resolve arm, fetch snapshot, fetch
// the recent window (treatment only), merge, retrieve, rank, log.
//
// Batch artifacts and the model are immutable while requests are in flight;
// the realtime store carries its own concurrency contract. swap_artifacts is
// for the simulator's day rollover and must not race requests.
class Engine {
 public:
  struct Artifacts {
    const Catalog* catalog = nullptr;
    const SnapshotStore* snapshots = nullptr;
    const SimilarityModel* similarity = nullptr;
    const PopularityTable* popularity = nullptr;
    const RankerModel* model = nullptr;
  };

  Engine(Artifacts artifacts, const RealtimeStore* store,
         const ExperimentAssignment* assignment, ServingConfig config,
         ImpressionSink sink = nullptr);

  struct Detail {
    Arm arm = Arm::control;
    RankedList list;
    std::vector<FeatureVector> features;  // aligned with list entries
  };

  RankedList recommend(const RecRequest& request);
  Detail recommend_detailed(const RecRequest& request);

  void swap_artifacts(Artifacts artifacts);
  void swap_model(const RankerModel* model);

  // Bootstrap phase runs every request through the control path.
  void set_arm_override(std::optional<Arm> arm) { arm_override_ = arm; }
  // False disables the treatment merge (A/A experiments).
  void set_injection_enabled(bool enabled) { injection_enabled_ = enabled; }

  const ServingConfig& config() const { return config_; }

 private:
  Artifacts artifacts_;
  const RealtimeStore* store_;
  const ExperimentAssignment* assignment_;
  ServingConfig config_;
  ImpressionSink sink_;
  std::optional<FeatureBuilder> builder_;
  std::optional<Arm> arm_override_;
  bool injection_enabled_ = true;
};

// Wire format of a recommendation response: one `rank,item_id,score` line
// per entry and a final `arm=<control|treatment>` summary line.
std::string format_response(const RankedList& list, Arm arm);

}  // namespace freshrec
