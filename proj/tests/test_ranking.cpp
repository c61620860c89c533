#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "freshrec/ranking.hpp"
#include "freshrec/rng.hpp"
#include "support/temp_dir.hpp"

using namespace freshrec;
using freshrec::testing::TempDir;

namespace {

Catalog feature_catalog() {
  Catalog catalog(4);
  catalog.add(Item{"X", {1.0, 0.0, 0.0, 0.0}, -2});
  catalog.add(Item{"H1", {0.0, 1.0, 0.0, 0.0}, 0});
  catalog.add(Item{"H2", {0.6, 0.8, 0.0, 0.0}, 0});
  catalog.add(Item{"M", {0.0, 1.0, 0.0, 0.0}, 0});
  return catalog;
}

PopularityTable feature_popularity() {
  std::unordered_map<ItemId, std::int64_t> counts{{"X", 5}, {"H1", 10}};
  return PopularityTable(std::move(counts));
}

MergedHistory history_of(
    const std::vector<std::pair<ItemId, std::int64_t>>& entries) {
  MergedHistory history;
  history.user_id = "u";
  for (const auto& [item, ts] : entries) {
    history.entries.push_back(MergedEntry{item, ts, 0.5, HistorySource::batch});
  }
  std::sort(history.entries.begin(), history.entries.end(),
            [](const MergedEntry& a, const MergedEntry& b) {
              if (a.timestamp != b.timestamp) return a.timestamp > b.timestamp;
              return a.item_id < b.item_id;
            });
  return history;
}

FeatureVector fv_affinity(double affinity) {
  FeatureVector fv;
  fv.values[kAffinity] = affinity;
  fv.values[kBias] = 1.0;
  return fv;
}

std::vector<TrainingExample> separable_set(std::size_t per_class) {
  std::vector<TrainingExample> examples;
  for (std::size_t i = 0; i < per_class; ++i) {
    examples.push_back(TrainingExample{fv_affinity(1.0), 1});
    examples.push_back(TrainingExample{fv_affinity(0.0), 0});
  }
  return examples;
}

}  // namespace

TEST_CASE("features: empty history zeroes the history slots") {
  const Catalog catalog = feature_catalog();
  const PopularityTable pop = feature_popularity();
  const FeatureBuilder builder(catalog, pop, 86400);
  const FeatureVector fv =
      builder.build_features(history_of({}), catalog.at("X"), 0);
  CHECK(fv.values[kAffinity] == 0.0);
  CHECK(fv.values[kGenreOverlap] == 0.0);
  CHECK(fv.values[kRecencyOfHistory] == 0.0);
  CHECK(fv.values[kBias] == 1.0);
  CHECK(fv.values[kPopularityNorm] == doctest::Approx(0.5));
  for (double v : fv.values) CHECK(std::isfinite(v));
}

TEST_CASE("features: identical fresh item gives affinity one") {
  const Catalog catalog = feature_catalog();
  const PopularityTable pop = feature_popularity();
  const FeatureBuilder builder(catalog, pop, 86400);
  const FeatureVector fv = builder.build_features(
      history_of({{"H1", 500}}), catalog.at("M"), /*now=*/500);
  CHECK(fv.values[kAffinity] == doctest::Approx(1.0));
  CHECK(fv.values[kGenreOverlap] == doctest::Approx(0.25));  // one of four genres
  CHECK(fv.values[kRecencyOfHistory] == doctest::Approx(1.0));
}

TEST_CASE("features: every slot matches the hand-computed value") {
  const Catalog catalog = feature_catalog();
  const PopularityTable pop = feature_popularity();
  const FeatureBuilder builder(catalog, pop, 86400);

  // now = 1.5 days; H1 watched just now, H2 one halflife ago.
  const std::int64_t now = 129600;
  const MergedHistory history = history_of({{"H1", 129600}, {"H2", 43200}});
  const FeatureVector fv =
      builder.build_features(history, catalog.at("X"), now);

  // Weighted mean = (1.0 * H1 + 0.5 * H2) / 1.5 = (0.2, 0.9333, 0, 0);
  // dot with X = 0.2.
  CHECK(fv.values[kAffinity] == doctest::Approx(0.2).epsilon(1e-12));
  // Newest item H1 shares no active genre with X.
  CHECK(fv.values[kGenreOverlap] == 0.0);
  // X count 5, max 10.
  CHECK(fv.values[kPopularityNorm] == doctest::Approx(0.5));
  CHECK(fv.values[kRecencyOfHistory] == doctest::Approx(1.0));
  // Age: 129600 - (-2 * 86400) = 302400 s = 3.5 halflives.
  CHECK(fv.values[kCandidateAge] == doctest::Approx(std::pow(0.5, 3.5)).epsilon(1e-12));
  // Noon: theta = pi.
  CHECK(fv.values[kHourOfDaySin] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(fv.values[kHourOfDayCos] == doctest::Approx(-1.0));
  CHECK(fv.values[kBias] == 1.0);
}

TEST_CASE("score: zero weights give one half") {
  RankerModel model;
  model.weights.assign(kFeatureCount, 0.0);
  FeatureVector fv;
  fv.values = {0.3, 0.1, 0.9, 0.2, 0.4, -0.5, 0.5, 1.0};
  CHECK(score(model, fv) == doctest::Approx(0.5));
}

TEST_CASE("score: logistic of one on a unit affinity") {
  RankerModel model;
  model.weights.assign(kFeatureCount, 0.0);
  model.weights[kAffinity] = 1.0;
  // 1 / (1 + e^-1)
  CHECK(score(model, fv_affinity(1.0)) ==
        doctest::Approx(0.731059).epsilon(1e-6));
}

TEST_CASE("score: strictly increasing in a positively weighted slot") {
  RankerModel model;
  model.weights.assign(kFeatureCount, 0.0);
  model.weights[kPopularityNorm] = 2.0;
  FeatureVector fv;
  double last = -1.0;
  for (double v : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    fv.values[kPopularityNorm] = v;
    const double s = score(model, fv);
    CHECK(s > last);
    last = s;
  }
}

TEST_CASE("score: dimension mismatch is an error") {
  RankerModel model;
  model.weights.assign(3, 0.0);
  CHECK_THROWS_WITH_AS(score(model, FeatureVector{}),
                       doctest::Contains("dimension mismatch"), Error);
}

TEST_CASE("rank: matches an independent score-then-sort oracle") {
  const Catalog catalog = feature_catalog();
  const PopularityTable pop = feature_popularity();
  const FeatureBuilder builder(catalog, pop, 86400);
  RankerModel model;
  model.weights = {1.5, 0.2, 0.8, 0.1, -0.3, 0.0, 0.0, -0.5};

  const MergedHistory history = history_of({{"H2", 1000}});
  CandidateSet candidates;
  for (const char* id : {"X", "H1", "M"}) {
    candidates.candidates.push_back(Candidate{id, 0.5, CandidateOrigin::primary});
  }
  const RankedList ranked = rank(model, builder, history, candidates, 1000, 3);

  std::vector<std::pair<ItemId, double>> oracle;
  for (const char* id : {"X", "H1", "M"}) {
    oracle.emplace_back(id,
                        score(model, builder.build_features(history, catalog.at(id), 1000)));
  }
  std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  REQUIRE(ranked.entries.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(ranked.entries[i].item_id == oracle[i].first);
    CHECK(ranked.entries[i].score == doctest::Approx(oracle[i].second));
  }
}

TEST_CASE("rank: identical features order by item id, one candidate works") {
  const Catalog catalog = feature_catalog();
  const PopularityTable pop = feature_popularity();
  const FeatureBuilder builder(catalog, pop, 86400);
  RankerModel model;
  model.weights.assign(kFeatureCount, 0.0);  // every score is 0.5

  CandidateSet candidates;
  candidates.candidates.push_back(Candidate{"M", 0.5, CandidateOrigin::primary});
  candidates.candidates.push_back(Candidate{"H1", 0.5, CandidateOrigin::primary});
  const RankedList ranked =
      rank(model, builder, history_of({}), candidates, 0, 10);
  REQUIRE(ranked.entries.size() == 2);
  CHECK(ranked.entries[0].item_id == "H1");
  CHECK(ranked.entries[1].item_id == "M");

  CandidateSet one;
  one.candidates.push_back(Candidate{"X", 0.5, CandidateOrigin::primary});
  CHECK(rank(model, builder, history_of({}), one, 0, 10).entries.size() == 1);
  CHECK(rank(model, builder, history_of({}), CandidateSet{}, 0, 10).entries.empty());
}

TEST_CASE("rank order is invariant to ranking by logit instead of sigmoid") {
  const Catalog catalog = feature_catalog();
  const PopularityTable pop = feature_popularity();
  const FeatureBuilder builder(catalog, pop, 86400);
  RankerModel model;
  model.weights = {2.0, -1.0, 0.5, 0.3, 0.1, 0.0, 0.2, -0.7};

  const MergedHistory history = history_of({{"H1", 900}, {"H2", 100}});
  CandidateSet candidates;
  for (const char* id : {"X", "M", "H1", "H2"}) {
    candidates.candidates.push_back(Candidate{id, 0.1, CandidateOrigin::primary});
  }
  const RankedList by_sigmoid =
      rank(model, builder, history, candidates, 900, 4);

  std::vector<std::pair<ItemId, double>> by_logit;
  for (const char* id : {"X", "M", "H1", "H2"}) {
    const FeatureVector fv = builder.build_features(history, catalog.at(id), 900);
    double logit = 0.0;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      logit += model.weights[i] * fv.values[i];
    }
    by_logit.emplace_back(id, logit);
  }
  std::sort(by_logit.begin(), by_logit.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  REQUIRE(by_sigmoid.entries.size() == by_logit.size());
  for (std::size_t i = 0; i < by_logit.size(); ++i) {
    CHECK(by_sigmoid.entries[i].item_id == by_logit[i].first);
  }
}

TEST_CASE("training: separable data recovers a positive affinity weight") {
  const TrainResult result = train_ranker(separable_set(100), TrainConfig{}, 7);
  CHECK(result.model.weights[kAffinity] > 0.0);
  CHECK(result.train_accuracy >= 0.95);
  CHECK(result.model.trained_at == 7);
  CHECK(std::isfinite(result.final_log_loss));
  // Sanity against an independent fit criterion: separable data must reach a
  // loss well below chance (log 2).
  CHECK(result.final_log_loss < 0.35);
}

TEST_CASE("training: all-zero labels push every prediction below one half") {
  std::mt19937_64 rng = substream(51, "neg-train");
  std::vector<TrainingExample> examples;
  for (int i = 0; i < 200; ++i) {
    TrainingExample ex;
    ex.features = fv_affinity(uniform01(rng));
    ex.label = 0;
    examples.push_back(ex);
  }
  const TrainResult result = train_ranker(examples, TrainConfig{}, 0);
  for (const TrainingExample& ex : examples) {
    CHECK(score(result.model, ex.features) < 0.5);
  }
}

TEST_CASE("training: fewer than the minimum impressions is an error") {
  CHECK_THROWS_WITH_AS(train_ranker(separable_set(49), TrainConfig{}, 0),
                       doctest::Contains("insufficient training data"), Error);
}

TEST_CASE("gradient matches central finite differences") {
  std::mt19937_64 rng = substream(52, "gradcheck");
  constexpr double kEpsilon = 1e-5;
  double max_dev = 0.0;
  for (int point = 0; point < 20; ++point) {
    std::vector<TrainingExample> examples;
    const int n = 40 + static_cast<int>(uniform_index(rng, 60));
    for (int i = 0; i < n; ++i) {
      TrainingExample ex;
      for (double& v : ex.features.values) v = uniform_range(rng, -1.0, 1.0);
      ex.features.values[kBias] = 1.0;
      ex.label = uniform01(rng) < 0.5 ? 0 : 1;
      examples.push_back(ex);
    }
    std::vector<double> weights(kFeatureCount);
    for (double& w : weights) w = uniform_range(rng, -2.0, 2.0);

    std::vector<double> grad;
    loss_gradient(weights, examples, 1e-4, grad);
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      std::vector<double> plus = weights, minus = weights;
      plus[j] += kEpsilon;
      minus[j] -= kEpsilon;
      const double numeric =
          (log_loss(plus, examples, 1e-4) - log_loss(minus, examples, 1e-4)) /
          (2.0 * kEpsilon);
      max_dev = std::max(max_dev, std::abs(numeric - grad[j]));
    }
  }
  CHECK(max_dev < 1e-6);
}

TEST_CASE("training is deterministic") {
  const auto examples = separable_set(80);
  const TrainResult a = train_ranker(examples, TrainConfig{}, 3);
  const TrainResult b = train_ranker(examples, TrainConfig{}, 3);
  CHECK(a.model.weights == b.model.weights);
  CHECK(a.final_log_loss == b.final_log_loss);
}

TEST_CASE("model file round-trips and validates") {
  TempDir dir("model_io");
  RankerModel model;
  model.weights = {0.123456789, -1.5, 0.0, 2.25, -0.000000001, 3.0, -2.0, 0.5};
  model.trained_at = 172800;
  save_model(dir.file("model.txt"), model);
  const RankerModel loaded = load_model(dir.file("model.txt"));
  CHECK(loaded.trained_at == 172800);
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    CHECK(loaded.weights[i] == doctest::Approx(model.weights[i]).epsilon(1e-9));
  }

  {
    std::ofstream out(dir.file("missing.txt"));
    out << "affinity=1.0\ntrained_at=5\n";
  }
  CHECK_THROWS_WITH_AS(load_model(dir.file("missing.txt")),
                       doctest::Contains("missing weight"), Error);
  {
    std::ofstream out(dir.file("unknown.txt"));
    out << "mystery=1.0\n";
  }
  CHECK_THROWS_WITH_AS(load_model(dir.file("unknown.txt")),
                       doctest::Contains("unknown model key"), Error);
}

TEST_CASE("training impressions round-trip through their file") {
  TempDir dir("impr_io");
  std::mt19937_64 rng = substream(53, "impr-io");
  std::vector<TrainingExample> examples;
  for (int i = 0; i < 25; ++i) {
    TrainingExample ex;
    for (double& v : ex.features.values) v = uniform01(rng);
    ex.label = i % 2;
    examples.push_back(ex);
  }
  save_training_examples(dir.file("train.txt"), examples);
  const auto loaded = load_training_examples(dir.file("train.txt"));
  REQUIRE(loaded.size() == examples.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].label == examples[i].label);
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      CHECK(loaded[i].features.values[j] ==
            doctest::Approx(examples[i].features.values[j]).epsilon(1e-8));
    }
  }
}

TEST_CASE("heuristic model orders purely by affinity") {
  const RankerModel model = heuristic_model();
  CHECK(score(model, fv_affinity(0.9)) > score(model, fv_affinity(0.3)));
}
