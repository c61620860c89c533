#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "freshrec/retrieval.hpp"
#include "freshrec/types.hpp"

namespace freshrec {

inline constexpr std::size_t kFeatureCount = 8;

// Slot order is part of the model file format and fixed across training and
// serving.
enum FeatureSlot : std::size_t {
  kAffinity = 0,
  kGenreOverlap = 1,
  kPopularityNorm = 2,
  kRecencyOfHistory = 3,
  kCandidateAge = 4,
  kHourOfDaySin = 5,
  kHourOfDayCos = 6,
  kBias = 7,
};

extern const std::array<std::string_view, kFeatureCount> kFeatureNames;

struct FeatureVector {
  std::array<double, kFeatureCount> values{};
};

struct TrainConfig {
  double learning_rate = 1.0;
  int epochs = 2000;
  double l2 = 1e-4;
  std::size_t min_examples = 100;
};

struct RankerModel {
  std::vector<double> weights;  // dimension kFeatureCount
  std::int64_t trained_at = 0;  // cutoff of the training data
  TrainConfig hyper;
};

// Affinity-only scorer used to bootstrap training data before a model
// exists; the logistic is monotone so this ranks purely by affinity.
RankerModel heuristic_model();

struct TrainingExample {
  FeatureVector features;
  int label = 0;  // clicked in {0,1}
};

// Per-request feature construction over merged history, item metadata and
// request context.
class FeatureBuilder {
 public:
  FeatureBuilder(const Catalog& catalog, const PopularityTable& popularity,
                 std::int64_t halflife_s);

  struct RequestContext {
    bool has_history = false;
    std::vector<double> history_genre_mean;  // decay-weighted mean, dim G
    const Item* newest_item = nullptr;
    double recency_of_history = 0.0;
    double hour_sin = 0.0;
    double hour_cos = 0.0;
    std::int64_t now = 0;
  };

  RequestContext context(const MergedHistory& history, std::int64_t now) const;
  FeatureVector build(const RequestContext& ctx, const Item& candidate) const;

  // Convenience single-shot path.
  FeatureVector build_features(const MergedHistory& history,
                               const Item& candidate, std::int64_t now) const;

  const Catalog& catalog() const { return *catalog_; }

 private:
  const Catalog* catalog_;
  const PopularityTable* popularity_;
  std::int64_t halflife_s_;
};

// logistic(dot(weights, values)); Error on weight dimension mismatch.
double score(const RankerModel& model, const FeatureVector& features);

double sigmoid(double z);

struct RankedEntry {
  ItemId item_id;
  double score = 0.0;  // in (0,1)
};

// Sorted by score descending, ties by item_id ascending; unique item ids.
struct RankedList {
  std::vector<RankedEntry> entries;
};

RankedList rank(const RankerModel& model, const FeatureBuilder& builder,
                const MergedHistory& history, const CandidateSet& candidates,
                std::int64_t now, std::size_t limit);

// Same as rank but also returns the feature vectors aligned with the final
// list order, for impression logging during the bootstrap phase.
struct RankOutput {
  RankedList list;
  std::vector<FeatureVector> features;
};

RankOutput rank_with_features(const RankerModel& model,
                              const FeatureBuilder& builder,
                              const MergedHistory& history,
                              const CandidateSet& candidates, std::int64_t now,
                              std::size_t limit);

// Regularized mean log-loss and its analytic gradient, shared by the
// training loop and the finite-difference check.
double log_loss(const std::vector<double>& weights,
                const std::vector<TrainingExample>& examples, double l2);
void loss_gradient(const std::vector<double>& weights,
                   const std::vector<TrainingExample>& examples, double l2,
                   std::vector<double>& grad_out);

struct TrainResult {
  RankerModel model;
  double final_log_loss = 0.0;
  double train_accuracy = 0.0;
};

// Full-batch gradient descent from zero weights; deterministic. Fewer than
// min_examples examples is an error.
TrainResult train_ranker(const std::vector<TrainingExample>& examples,
                         const TrainConfig& config, std::int64_t trained_at);

// Model file: slot_name=<value, 9 decimals> per line, plus trained_at=<ts>.
void save_model(const std::string& path, const RankerModel& model);
RankerModel load_model(const std::string& path);

// Training impressions: label,f0,...,f7 per line (9 decimals).
void save_training_examples(const std::string& path,
                            const std::vector<TrainingExample>& examples);
std::vector<TrainingExample> load_training_examples(const std::string& path);

}  // namespace freshrec
