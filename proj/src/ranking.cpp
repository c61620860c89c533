#include "freshrec/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "freshrec/kernels.hpp"
#include "freshrec/strings.hpp"

namespace freshrec {

const std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "affinity",           "genre_overlap", "popularity_norm",
    "recency_of_history", "candidate_age", "hour_of_day_sin",
    "hour_of_day_cos",    "bias"};

RankerModel heuristic_model() {
  RankerModel model;
  model.weights.assign(kFeatureCount, 0.0);
  model.weights[kAffinity] = 1.0;
  return model;
}

FeatureBuilder::FeatureBuilder(const Catalog& catalog,
                               const PopularityTable& popularity,
                               std::int64_t halflife_s)
    : catalog_(&catalog), popularity_(&popularity), halflife_s_(halflife_s) {}

FeatureBuilder::RequestContext FeatureBuilder::context(
    const MergedHistory& history, std::int64_t now) const {
  RequestContext ctx;
  ctx.now = now;
  const std::int64_t second_of_day = ((now % 86400) + 86400) % 86400;
  const double theta =
      2.0 * M_PI * static_cast<double>(second_of_day) / 86400.0;
  ctx.hour_sin = std::sin(theta);
  ctx.hour_cos = std::cos(theta);

  if (history.entries.empty()) return ctx;
  ctx.has_history = true;

  const std::size_t dim = static_cast<std::size_t>(catalog_->genre_count());
  ctx.history_genre_mean.assign(dim, 0.0);
  double weight_sum = 0.0;
  for (const MergedEntry& e : history.entries) {
    const Item& item = catalog_->at(e.item_id);
    const double decay = recency_decay(now - e.timestamp, halflife_s_);
    kernels::axpy(decay, item.genre_vector.data(),
                  ctx.history_genre_mean.data(), dim);
    weight_sum += decay;
  }
  if (weight_sum > 0.0) {
    for (double& v : ctx.history_genre_mean) v /= weight_sum;
  }

  const MergedEntry& newest = history.entries.front();
  ctx.newest_item = &catalog_->at(newest.item_id);
  ctx.recency_of_history = recency_decay(now - newest.timestamp, halflife_s_);
  return ctx;
}

FeatureVector FeatureBuilder::build(const RequestContext& ctx,
                                    const Item& candidate) const {
  FeatureVector fv;
  const std::size_t dim = static_cast<std::size_t>(catalog_->genre_count());

  if (ctx.has_history) {
    fv.values[kAffinity] = kernels::dot(ctx.history_genre_mean.data(),
                                        candidate.genre_vector.data(), dim);
    int shared = 0;
    for (std::size_t g = 0; g < dim; ++g) {
      if (candidate.genre_vector[g] > 0.0 &&
          ctx.newest_item->genre_vector[g] > 0.0) {
        ++shared;
      }
    }
    fv.values[kGenreOverlap] = static_cast<double>(shared) /
                               static_cast<double>(catalog_->genre_count());
    fv.values[kRecencyOfHistory] = ctx.recency_of_history;
  }

  if (popularity_->max_count() > 0) {
    fv.values[kPopularityNorm] =
        static_cast<double>(popularity_->count(candidate.item_id)) /
        static_cast<double>(popularity_->max_count());
  }
  fv.values[kCandidateAge] =
      recency_decay(ctx.now - candidate.release_day * 86400, halflife_s_);
  fv.values[kHourOfDaySin] = ctx.hour_sin;
  fv.values[kHourOfDayCos] = ctx.hour_cos;
  fv.values[kBias] = 1.0;
  return fv;
}

FeatureVector FeatureBuilder::build_features(const MergedHistory& history,
                                             const Item& candidate,
                                             std::int64_t now) const {
  return build(context(history, now), candidate);
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double score(const RankerModel& model, const FeatureVector& features) {
  if (model.weights.size() != kFeatureCount) {
    fail("model weight dimension mismatch: " +
         std::to_string(model.weights.size()) + " weights, expected " +
         std::to_string(kFeatureCount));
  }
  return sigmoid(kernels::dot(model.weights.data(), features.values.data(),
                              kFeatureCount));
}

RankOutput rank_with_features(const RankerModel& model,
                              const FeatureBuilder& builder,
                              const MergedHistory& history,
                              const CandidateSet& candidates, std::int64_t now,
                              std::size_t limit) {
  if (limit < 1) fail("rank limit must be >= 1");

  const auto ctx = builder.context(history, now);
  struct Scored {
    ItemId item_id;
    double score;
    FeatureVector features;
  };
  std::vector<Scored> scored;
  scored.reserve(candidates.candidates.size());
  for (const Candidate& c : candidates.candidates) {
    const FeatureVector fv = builder.build(ctx, builder.catalog().at(c.item_id));
    scored.push_back(Scored{c.item_id, score(model, fv), fv});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.item_id < b.item_id;
  });
  if (scored.size() > limit) scored.resize(limit);

  RankOutput out;
  out.list.entries.reserve(scored.size());
  out.features.reserve(scored.size());
  for (Scored& s : scored) {
    out.list.entries.push_back(RankedEntry{std::move(s.item_id), s.score});
    out.features.push_back(s.features);
  }
  return out;
}

RankedList rank(const RankerModel& model, const FeatureBuilder& builder,
                const MergedHistory& history, const CandidateSet& candidates,
                std::int64_t now, std::size_t limit) {
  return rank_with_features(model, builder, history, candidates, now, limit)
      .list;
}

double log_loss(const std::vector<double>& weights,
                const std::vector<TrainingExample>& examples, double l2) {
  constexpr double kEps = 1e-12;
  double loss = 0.0;
  for (const TrainingExample& ex : examples) {
    const double z =
        kernels::dot(weights.data(), ex.features.values.data(), kFeatureCount);
    const double p = std::clamp(sigmoid(z), kEps, 1.0 - kEps);
    loss -= ex.label ? std::log(p) : std::log(1.0 - p);
  }
  loss /= static_cast<double>(examples.size());
  double reg = 0.0;
  for (double w : weights) reg += w * w;
  return loss + 0.5 * l2 * reg;
}

void loss_gradient(const std::vector<double>& weights,
                   const std::vector<TrainingExample>& examples, double l2,
                   std::vector<double>& grad_out) {
  const std::size_t n = examples.size();
  grad_out.assign(kFeatureCount, 0.0);

  // Flat row-major copy keeps the inner loops in the vector kernels.
  static thread_local std::vector<double> rows;
  static thread_local std::vector<double> resid;
  rows.resize(n * kFeatureCount);
  resid.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = examples[i].features.values;
    std::copy(v.begin(), v.end(), rows.begin() + i * kFeatureCount);
  }
  kernels::matvec(rows.data(), n, kFeatureCount, weights.data(), resid.data());
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    resid[i] = (sigmoid(resid[i]) - static_cast<double>(examples[i].label)) * inv_n;
  }
  kernels::accumulate_weighted_rows(rows.data(), n, kFeatureCount, resid.data(),
                                    grad_out.data());
  kernels::axpy(l2, weights.data(), grad_out.data(), kFeatureCount);
}

TrainResult train_ranker(const std::vector<TrainingExample>& examples,
                         const TrainConfig& config, std::int64_t trained_at) {
  if (examples.size() < config.min_examples) {
    fail("insufficient training data: " + std::to_string(examples.size()) +
         " impressions, need >= " + std::to_string(config.min_examples));
  }

  TrainResult result;
  result.model.weights.assign(kFeatureCount, 0.0);
  result.model.trained_at = trained_at;
  result.model.hyper = config;

  std::vector<double> grad(kFeatureCount, 0.0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    loss_gradient(result.model.weights, examples, config.l2, grad);
    kernels::axpy(-config.learning_rate, grad.data(),
                  result.model.weights.data(), kFeatureCount);
  }

  result.final_log_loss = log_loss(result.model.weights, examples, config.l2);
  std::size_t correct = 0;
  for (const TrainingExample& ex : examples) {
    const double p = score(result.model, ex.features);
    correct += ((p >= 0.5) == (ex.label == 1)) ? 1 : 0;
  }
  result.train_accuracy =
      static_cast<double>(correct) / static_cast<double>(examples.size());
  return result;
}

void save_model(const std::string& path, const RankerModel& model) {
  if (model.weights.size() != kFeatureCount) {
    fail("cannot save model with wrong weight dimension");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail("cannot open '" + path + "' for writing");
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    out << kFeatureNames[i] << '=' << fixed(model.weights[i], 9) << '\n';
  }
  out << "trained_at=" << model.trained_at << '\n';
  if (!out.flush()) fail("failed writing model to '" + path + "'");
}

RankerModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open model '" + path + "'");
  RankerModel model;
  model.weights.assign(kFeatureCount, 0.0);
  std::array<bool, kFeatureCount> seen{};
  bool saw_trained_at = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail("'" + path + "' line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string_view key = std::string_view(line).substr(0, eq);
    const std::string_view value = std::string_view(line).substr(eq + 1);
    if (key == "trained_at") {
      model.trained_at = parse_i64(value, "trained_at");
      saw_trained_at = true;
      continue;
    }
    bool matched = false;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      if (key == kFeatureNames[i]) {
        model.weights[i] = parse_f64(value, key);
        seen[i] = true;
        matched = true;
        break;
      }
    }
    if (!matched) {
      fail("'" + path + "' line " + std::to_string(line_no) +
           ": unknown model key '" + std::string(key) + "'");
    }
  }
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (!seen[i]) {
      fail("model '" + path + "' is missing weight '" +
           std::string(kFeatureNames[i]) + "'");
    }
  }
  if (!saw_trained_at) fail("model '" + path + "' is missing trained_at");
  return model;
}

void save_training_examples(const std::string& path,
                            const std::vector<TrainingExample>& examples) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail("cannot open '" + path + "' for writing");
  for (const TrainingExample& ex : examples) {
    out << ex.label;
    for (double v : ex.features.values) out << ',' << fixed(v, 9);
    out << '\n';
  }
  if (!out.flush()) fail("failed writing training impressions to '" + path + "'");
}

std::vector<TrainingExample> load_training_examples(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open training impressions '" + path + "'");
  std::vector<TrainingExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 1 + kFeatureCount) {
      fail("'" + path + "' line " + std::to_string(line_no) + ": wrong field count");
    }
    TrainingExample ex;
    const std::int64_t label = parse_i64(fields[0], "label");
    if (label != 0 && label != 1) {
      fail("'" + path + "' line " + std::to_string(line_no) + ": label must be 0 or 1");
    }
    ex.label = static_cast<int>(label);
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      ex.features.values[i] = parse_f64(fields[1 + i], "feature");
    }
    out.push_back(ex);
  }
  return out;
}

}  // namespace freshrec
