#include "freshrec/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "freshrec/event_log.hpp"
#include "freshrec/kernels.hpp"
#include "freshrec/manifest.hpp"
#include "freshrec/rng.hpp"
#include "freshrec/serving.hpp"
#include "freshrec/version.hpp"

namespace freshrec {

std::vector<double> dominant_mixture(int genre_count, int dominant) {
  std::vector<double> mix(static_cast<std::size_t>(genre_count),
                          0.2 / static_cast<double>(genre_count - 1));
  mix[static_cast<std::size_t>(dominant)] = 0.8;
  return mix;
}

std::vector<UserProfile> build_profiles(const ExperimentConfig& config,
                                        std::mt19937_64& rng) {
  std::vector<UserProfile> profiles;
  profiles.reserve(static_cast<std::size_t>(config.user_count));
  const std::size_t genres = static_cast<std::size_t>(config.genre_count);
  for (std::int64_t i = 0; i < config.user_count; ++i) {
    UserProfile profile;
    profile.user_id = "u" + std::to_string(i);
    // Stable taste blends two equally liked genres. The pair varies per
    // user, which keeps rankings, histories and co-occurrence counts from
    // collapsing into one per-genre sequence shared by every user; the
    // equal weights leave intra-day feedback nothing to exploit while
    // preferences are stable.
    const std::size_t primary = uniform_index(rng, genres);
    const std::size_t secondary =
        (primary + 1 + uniform_index(rng, genres - 1)) % genres;
    const double rest = genres > 2 ? 0.15 : 0.0;
    const double pair_weight = (1.0 - rest) / 2.0;
    profile.base_preference.assign(
        genres, genres > 2 ? rest / static_cast<double>(genres - 2) : 0.0);
    profile.base_preference[primary] = pair_weight;
    profile.base_preference[secondary] = pair_weight;
    profile.active_preference = profile.base_preference;
    profile.drift_probability = config.drift_probability;
    profiles.push_back(std::move(profile));
  }
  return profiles;
}

namespace {

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(
      std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

void drift_user(UserProfile& profile, int genre_count,
                std::int64_t day_length_s, std::mt19937_64& rng) {
  profile.drift_time.reset();
  profile.active_preference = profile.base_preference;
  if (uniform01(rng) < profile.drift_probability) {
    const int current = static_cast<int>(argmax(profile.base_preference));
    const int offset = 1 + static_cast<int>(uniform_index(
                               rng, static_cast<std::uint64_t>(genre_count - 1)));
    const int fresh = (current + offset) % genre_count;
    profile.active_preference = dominant_mixture(genre_count, fresh);
    profile.drift_time = static_cast<std::int64_t>(
        uniform_index(rng, static_cast<std::uint64_t>(day_length_s)));
  }
}

const std::vector<double>& preference_at(const UserProfile& profile,
                                         std::int64_t second_of_day) {
  if (profile.drift_time && second_of_day >= *profile.drift_time) {
    return profile.active_preference;
  }
  return profile.base_preference;
}

std::optional<std::size_t> choice_model(
    const RankedList& list, const std::vector<double>& preference,
    const Catalog& catalog, double gamma,
    const std::function<double()>& uniform) {
  double discount = 1.0;
  for (std::size_t r = 0; r < list.entries.size(); ++r) {
    const Item& item = catalog.at(list.entries[r].item_id);
    const double relevance =
        std::clamp(kernels::dot(preference.data(), item.genre_vector.data(),
                                preference.size()),
                   0.0, 1.0);
    if (uniform() < relevance * discount) return r;
    discount *= gamma;
  }
  return std::nullopt;
}

namespace {

namespace fs = std::filesystem;

constexpr int kSeedWatchesPerSession = 1;

enum class Phase { seeding, bootstrap, experiment };

struct Session {
  std::int64_t ts;
  std::int32_t user_index;
  std::int32_t ordinal;
};

class SimulationRun {
 public:
  SimulationRun(const ExperimentConfig& config, std::string out_dir)
      : config_(config),
        out_dir_(std::move(out_dir)),
        profiles_rng_(substream(config.seed, "profiles")),
        sessions_rng_(substream(config.seed, "sessions")),
        drift_rng_(substream(config.seed, "drift")),
        choice_rng_(substream(config.seed, "choice")),
        organic_rng_(substream(config.seed, "organic")),
        completion_rng_(substream(config.seed, "completion")),
        choice_uniform_([this] { return uniform01(choice_rng_); }) {}

  ExperimentResult run() {
    config_.validate();
    fs::create_directories(out_dir_);
    save_experiment_config(path("config.kv"), config_);

    catalog_ = generate_catalog(static_cast<std::size_t>(config_.item_count),
                                config_.genre_count, config_.seed);
    write_catalog(path("catalog.txt"), catalog_);

    profiles_ = build_profiles(config_, profiles_rng_);
    std::vector<UserId> user_ids;
    user_ids.reserve(profiles_.size());
    for (const UserProfile& p : profiles_) user_ids.push_back(p.user_id);
    assignment_ = ExperimentAssignment(user_ids, config_.split_ratio, config_.salt);

    store_ = std::make_unique<RealtimeStore>();
    log_writer_ = std::make_unique<EventLogWriter>(path("events.log"), true);
    impressions_out_.open(path("impressions.log"), std::ios::trunc);
    if (!impressions_out_) fail("cannot open impression log for writing");

    batch_ = std::make_unique<BatchOutput>();
    heuristic_ = heuristic_model();

    ServingConfig serving;
    serving.list_length = config_.list_length;
    engine_ = std::make_unique<Engine>(current_artifacts(&heuristic_),
                                       store_.get(), &assignment_, serving,
                                       [this](const Impression& impression) {
                                         on_impression(impression);
                                       });
    engine_->set_injection_enabled(config_.injection_enabled);
    engine_->set_arm_override(Arm::control);  // off until the model is frozen

    const int total_days = config_.bootstrap_days + config_.days;
    for (int day = 0; day < total_days; ++day) {
      simulate_day(day);
    }

    finalize_artifacts();

    result_.report = make_lift_report(impressions_control_, clicks_control_,
                                      impressions_treatment_, clicks_treatment_,
                                      config_.alpha, config_.seed);
    save_lift_report(path("lift_report.kv"), result_.report);
    {
      std::ofstream human(path("lift_report.txt"), std::ios::trunc);
      human << render_lift_report(result_.report);
    }
    write_run_manifest();
    result_.out_dir = out_dir_;
    result_.events_logged = static_cast<std::int64_t>(log_writer_->written());
    return result_;
  }

 private:
  std::string path(const std::string& name) const {
    return (fs::path(out_dir_) / name).string();
  }

  Engine::Artifacts current_artifacts(const RankerModel* model) const {
    Engine::Artifacts artifacts;
    artifacts.catalog = &catalog_;
    artifacts.snapshots = &batch_->snapshots;
    artifacts.similarity = &batch_->similarity;
    artifacts.popularity = &batch_->popularity;
    artifacts.model = model;
    return artifacts;
  }

  Phase phase_of(int day) const {
    if (day == 0) return Phase::seeding;
    return day < config_.bootstrap_days ? Phase::bootstrap : Phase::experiment;
  }

  void on_impression(const Impression& impression) {
    if (current_phase_ != Phase::experiment) return;
    impressions_out_ << format_impression(impression) << '\n';
  }

  void emit_event(const UserId& user, const ItemId& item, std::int64_t ts) {
    WatchEvent event;
    event.user_id = user;
    event.item_id = item;
    event.timestamp = ts;
    event.completion_fraction = uniform_range(completion_rng_, 0.2, 1.0);
    event.watch_duration_s =
        std::llround(event.completion_fraction * 7200.0);
    log_writer_->append(event);
    store_->ingest(event);
  }

  // A watch that happens outside the recommendation list: the user browses a
  // handful of items and picks one in proportion to how well it matches
  // their current taste. May come up empty when nothing appeals.
  bool organic_watch(const UserId& user, std::int64_t ts,
                     const std::vector<double>& preference) {
    constexpr std::size_t kBrowseSample = 20;
    const auto& items = catalog_.items();
    const Item* sampled[kBrowseSample];
    double cumulative[kBrowseSample];
    double total = 0.0;
    for (std::size_t i = 0; i < kBrowseSample; ++i) {
      sampled[i] = &items[uniform_index(organic_rng_, items.size())];
      total += std::max(0.0, kernels::dot(preference.data(),
                                          sampled[i]->genre_vector.data(),
                                          preference.size()));
      cumulative[i] = total;
    }
    if (total <= 0.0) return false;
    const double draw = uniform01(organic_rng_) * total;
    std::size_t pick = kBrowseSample - 1;
    for (std::size_t i = 0; i < kBrowseSample; ++i) {
      if (draw < cumulative[i]) {
        pick = i;
        break;
      }
    }
    emit_event(user, sampled[pick]->item_id, ts);
    return true;
  }

  void simulate_day(int day) {
    current_phase_ = phase_of(day);
    const std::int64_t day_start = day * config_.batch_cadence_s;
    const std::int64_t day_length = config_.batch_cadence_s;

    for (UserProfile& profile : profiles_) {
      drift_user(profile, config_.genre_count, day_length, drift_rng_);
    }

    std::vector<Session> sessions;
    sessions.reserve(profiles_.size() *
                     static_cast<std::size_t>(config_.sessions_per_user_per_day));
    for (std::size_t u = 0; u < profiles_.size(); ++u) {
      for (int s = 0; s < config_.sessions_per_user_per_day; ++s) {
        sessions.push_back(Session{
            day_start + static_cast<std::int64_t>(
                            uniform_index(sessions_rng_,
                                          static_cast<std::uint64_t>(day_length))),
            static_cast<std::int32_t>(u), s});
      }
    }
    std::sort(sessions.begin(), sessions.end(),
              [](const Session& a, const Session& b) {
                if (a.ts != b.ts) return a.ts < b.ts;
                if (a.user_index != b.user_index) return a.user_index < b.user_index;
                return a.ordinal < b.ordinal;
              });

    for (const Session& session : sessions) {
      run_session(session, day_start);
    }

    end_of_day(day);
  }

  void run_session(const Session& session, std::int64_t day_start) {
    UserProfile& profile = profiles_[static_cast<std::size_t>(session.user_index)];
    const std::vector<double>& preference =
        preference_at(profile, session.ts - day_start);

    if (current_phase_ == Phase::seeding) {
      // No recommendations exist yet; the world starts from organic traffic,
      // several watches per session so day-one histories carry real signal.
      for (int w = 0; w < kSeedWatchesPerSession; ++w) {
        if (organic_watch(profile.user_id, session.ts, preference)) {
          ++result_.seed_events;
        }
      }
      return;
    }

    RecRequest request{profile.user_id, session.ts, config_.list_length};
    const Engine::Detail detail = engine_->recommend_detailed(request);
    const std::optional<std::size_t> clicked = choice_model(
        detail.list, preference, catalog_, config_.position_discount,
        choice_uniform_);

    if (current_phase_ == Phase::bootstrap) {
      ++result_.bootstrap_impressions;
      for (std::size_t i = 0; i < detail.list.entries.size(); ++i) {
        training_examples_.push_back(TrainingExample{
            detail.features[i], clicked && *clicked == i ? 1 : 0});
      }
    } else {
      if (detail.arm == Arm::control) {
        ++impressions_control_;
        clicks_control_ += clicked ? 1 : 0;
      } else {
        ++impressions_treatment_;
        clicks_treatment_ += clicked ? 1 : 0;
      }
    }

    if (clicked) {
      emit_event(profile.user_id, detail.list.entries[*clicked].item_id,
                 session.ts);
      ++result_.click_events;
    }

    if (uniform01(organic_rng_) < config_.organic_browse_rate &&
        organic_watch(profile.user_id, session.ts, preference)) {
      ++result_.organic_events;
    }
  }

  void end_of_day(int day) {
    log_writer_->flush();
    const std::int64_t cutoff = (day + 1) * config_.batch_cadence_s;
    auto fresh = std::make_unique<BatchOutput>(
        run_batch(path("events.log"), catalog_, cutoff, batch_config_));
    batch_ = std::move(fresh);

    const bool train_now = day == config_.bootstrap_days - 1;
    if (train_now) {
      save_training_examples(path("training_impressions.txt"), training_examples_);
      // Train from the persisted form so the model is reproducible from the
      // artifacts alone.
      const auto examples = load_training_examples(path("training_impressions.txt"));
      const TrainResult trained = train_ranker(examples, TrainConfig{}, cutoff);
      model_ = trained.model;
      result_.train_log_loss = trained.final_log_loss;
      result_.train_accuracy = trained.train_accuracy;
      save_model(path("model.txt"), model_);
      result_.model_checksum_at_train = checksum_file(path("model.txt"));
      engine_->set_arm_override(std::nullopt);
    }
    engine_->swap_artifacts(
        current_artifacts(model_.weights.empty() ? &heuristic_ : &model_));
  }

  void finalize_artifacts() {
    save_snapshots(path("snapshots.txt"), batch_->snapshots);
    save_similarity(path("similarity.txt"), batch_->similarity);
    save_popularity(path("popularity.txt"), batch_->popularity);
    impressions_out_.flush();
  }

  void write_run_manifest() {
    RunManifest manifest;
    manifest.version = std::string(kVersion);
    manifest.command = "simulate-ab";
    manifest.config = "config.kv";
    manifest.seed = config_.seed;
    for (const char* name :
         {"config.kv", "catalog.txt", "events.log", "snapshots.txt",
          "similarity.txt", "popularity.txt", "model.txt",
          "training_impressions.txt", "impressions.log", "lift_report.kv",
          "lift_report.txt"}) {
      add_artifact(manifest, out_dir_, name);
    }
    write_manifest(out_dir_, manifest);
  }

  ExperimentConfig config_;
  std::string out_dir_;

  std::mt19937_64 profiles_rng_;
  std::mt19937_64 sessions_rng_;
  std::mt19937_64 drift_rng_;
  std::mt19937_64 choice_rng_;
  std::mt19937_64 organic_rng_;
  std::mt19937_64 completion_rng_;
  std::function<double()> choice_uniform_;

  Catalog catalog_;
  std::vector<UserProfile> profiles_;
  ExperimentAssignment assignment_;
  std::unique_ptr<RealtimeStore> store_;
  std::unique_ptr<EventLogWriter> log_writer_;
  std::ofstream impressions_out_;
  std::unique_ptr<BatchOutput> batch_;
  std::unique_ptr<Engine> engine_;
  BatchConfig batch_config_;

  RankerModel heuristic_;
  RankerModel model_;
  std::vector<TrainingExample> training_examples_;

  Phase current_phase_ = Phase::seeding;
  std::int64_t impressions_control_ = 0;
  std::int64_t clicks_control_ = 0;
  std::int64_t impressions_treatment_ = 0;
  std::int64_t clicks_treatment_ = 0;

  ExperimentResult result_;
};

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::string& out_dir) {
  SimulationRun run(config, out_dir);
  return run.run();
}

}  // namespace freshrec
