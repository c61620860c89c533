#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "freshrec/config.hpp"
#include "freshrec/ranking.hpp"
#include "freshrec/stats.hpp"
#include "freshrec/types.hpp"

namespace freshrec {

// A synthetic viewer. base_preference is the stable taste; active_preference
// applies from drift_time (an intra-day second) to the end of the day on
// days where a drift was sampled.
struct UserProfile {
  UserId user_id;
  std::vector<double> base_preference;
  double drift_probability = 0.0;
  std::vector<double> active_preference;
  std::optional<std::int64_t> drift_time;
};

// 0.8 on the dominant genre, 0.2 spread uniformly over the rest.
std::vector<double> dominant_mixture(int genre_count, int dominant);

std::vector<UserProfile> build_profiles(const ExperimentConfig& config,
                                        std::mt19937_64& rng);

// Rolls the day's drift: with drift_probability the dominant genre changes
// (always to a different one) from a uniformly sampled second of the day;
// otherwise the active preference resets to base.
void drift_user(UserProfile& profile, int genre_count,
                std::int64_t day_length_s, std::mt19937_64& rng);

const std::vector<double>& preference_at(const UserProfile& profile,
                                         std::int64_t second_of_day);

// Cascade scan: click probability at rank r (1-based) is
// clamp(dot(preference, genre_vector), 0, 1) * gamma^(r-1); the scan stops at
// the first click. `uniform` supplies draws in [0,1) so tests can script the
// random sequence. Returns the clicked index.
std::optional<std::size_t> choice_model(const RankedList& list,
                                        const std::vector<double>& preference,
                                        const Catalog& catalog, double gamma,
                                        const std::function<double()>& uniform);

struct ExperimentResult {
  LiftReport report;
  std::string out_dir;

  // Checksum of the model file right after training; the file is never
  // rewritten, which the acceptance suite asserts.
  std::string model_checksum_at_train;

  // Conservation counters across all phases.
  std::int64_t seed_events = 0;
  std::int64_t organic_events = 0;
  std::int64_t click_events = 0;
  std::int64_t events_logged = 0;
  std::int64_t bootstrap_impressions = 0;

  double train_log_loss = 0.0;
  double train_accuracy = 0.0;
};

// The full A/B run: an organic seeding day, bootstrap days that log training
// impressions through the control pipeline with an affinity-only scorer, one
// training pass (the model is frozen afterwards), then `days` experiment
// days with daily batch runs at batch_cadence_s. Deterministic for a fixed
// config and seed; writes all artifacts plus a manifest into out_dir.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::string& out_dir);

}  // namespace freshrec
