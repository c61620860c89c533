#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace freshrec {

// Flat key=value file; '#' starts a comment line. Returned in file order.
std::vector<std::pair<std::string, std::string>> load_kv_file(
    const std::string& path);

// Everything the A/B harness needs for one run. Field names double as the
// config-file keys.
struct ExperimentConfig {
  std::int64_t user_count = 10000;
  std::int64_t item_count = 2000;
  int genre_count = 12;
  int days = 14;  // experiment days after the bootstrap phase
  int sessions_per_user_per_day = 2;
  double drift_probability = 0.3;  // per user per day
  double split_ratio = 0.5;        // treatment share
  std::string salt = "v1";
  std::uint64_t seed = 42;
  std::size_t list_length = 10;  // L_list
  std::int64_t batch_cadence_s = 86400;
  double position_discount = 0.85;  // cascade gamma
  double alpha = 0.05;

  // World-model knobs beyond the core experiment parameters.
  int bootstrap_days = 2;            // day 0 seeds organically, the rest log
                                     // training impressions
  double organic_browse_rate = 0.25; // chance a session also watches outside
                                     // the recommendation list
  bool injection_enabled = true;     // false = A/A: both arms serve batch-only

  void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);
void save_experiment_config(const std::string& path,
                            const ExperimentConfig& config);

}  // namespace freshrec
