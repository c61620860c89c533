#include "freshrec/serving.hpp"

#include "freshrec/strings.hpp"

namespace freshrec {

std::string format_impression(const Impression& impression) {
  std::string line;
  line += impression.request.user_id;
  line += ',';
  line += std::to_string(impression.request.now);
  line += ',';
  line += std::to_string(impression.request.requested_count);
  line += ',';
  line += arm_name(impression.arm);
  line += ',';
  for (std::size_t i = 0; i < impression.items.size(); ++i) {
    if (i) line += ';';
    line += std::to_string(i + 1);
    line += ':';
    line += impression.items[i].item_id;
    line += ':';
    line += fixed(impression.items[i].score, 6);
  }
  return line;
}

Engine::Engine(Artifacts artifacts, const RealtimeStore* store,
               const ExperimentAssignment* assignment, ServingConfig config,
               ImpressionSink sink)
    : artifacts_(artifacts),
      store_(store),
      assignment_(assignment),
      config_(std::move(config)),
      sink_(std::move(sink)) {
  if (!artifacts_.catalog || !artifacts_.snapshots || !artifacts_.similarity ||
      !artifacts_.popularity || !artifacts_.model) {
    fail("engine requires catalog, batch artifacts and a model at startup");
  }
  if (!store_) fail("engine requires a realtime store");
  if (!assignment_) fail("engine requires an experiment assignment");
  builder_.emplace(*artifacts_.catalog, *artifacts_.popularity,
                   config_.retrieval.halflife_s);
}

void Engine::swap_artifacts(Artifacts artifacts) {
  if (!artifacts.catalog || !artifacts.snapshots || !artifacts.similarity ||
      !artifacts.popularity || !artifacts.model) {
    fail("cannot swap in incomplete artifacts");
  }
  artifacts_ = artifacts;
  builder_.emplace(*artifacts_.catalog, *artifacts_.popularity,
                   config_.retrieval.halflife_s);
}

void Engine::swap_model(const RankerModel* model) {
  if (!model) fail("cannot swap in a null model");
  artifacts_.model = model;
}

RankedList Engine::recommend(const RecRequest& request) {
  return recommend_detailed(request).list;
}

Engine::Detail Engine::recommend_detailed(const RecRequest& request) {
  if (request.requested_count < 1) fail("requested_count must be >= 1");
  if (request.requested_count > config_.list_length) {
    fail("requested_count exceeds list_length " +
         std::to_string(config_.list_length));
  }

  Detail detail;
  detail.arm = arm_override_ ? *arm_override_
                             : assignment_->arm_of(request.user_id);

  const HistorySnapshot* snapshot = artifacts_.snapshots->find(request.user_id);
  RecentWindow recent;
  recent.user_id = request.user_id;
  recent.ttl_s = store_->ttl_s();
  if (detail.arm == Arm::treatment && injection_enabled_) {
    recent = store_->get_recent(request.user_id, request.now);
  }
  const MergedHistory merged =
      merge_history(snapshot, recent, config_.k_merge);

  const CandidateSet candidates =
      build_candidates(merged, *artifacts_.similarity, *artifacts_.popularity,
                       request.now, config_.retrieval);

  RankOutput ranked =
      rank_with_features(*artifacts_.model, *builder_, merged, candidates,
                         request.now, request.requested_count);
  detail.list = std::move(ranked.list);
  detail.features = std::move(ranked.features);

  if (sink_) {
    Impression impression;
    impression.request = request;
    impression.arm = detail.arm;
    impression.items = detail.list.entries;
    impression.served_at = request.now;
    sink_(impression);
  }
  return detail;
}

std::string format_response(const RankedList& list, Arm arm) {
  std::string out;
  for (std::size_t i = 0; i < list.entries.size(); ++i) {
    out += std::to_string(i + 1);
    out += ',';
    out += list.entries[i].item_id;
    out += ',';
    out += fixed(list.entries[i].score, 6);
    out += '\n';
  }
  out += "arm=";
  out += arm_name(arm);
  out += '\n';
  return out;
}

}  // namespace freshrec
