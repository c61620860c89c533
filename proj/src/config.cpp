#include "freshrec/config.hpp"

#include <fstream>

#include "freshrec/error.hpp"
#include "freshrec/strings.hpp"

namespace freshrec {

std::vector<std::pair<std::string, std::string>> load_kv_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config '" + path + "'");
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail("'" + path + "' line " + std::to_string(line_no) + ": expected key=value");
    }
    out.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (user_count < 1) fail("user_count must be >= 1");
  if (item_count < 1) fail("item_count must be >= 1");
  if (genre_count < 2) fail("genre_count must be >= 2");
  if (days < 1) fail("days must be >= 1");
  if (sessions_per_user_per_day < 1) fail("sessions_per_user_per_day must be >= 1");
  if (!(drift_probability >= 0.0 && drift_probability <= 1.0)) {
    fail("drift_probability must be in [0,1]");
  }
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) fail("split_ratio must be in (0,1)");
  if (list_length < 1) fail("list_length must be >= 1");
  if (batch_cadence_s < 1) fail("batch_cadence_s must be >= 1");
  if (!(position_discount > 0.0 && position_discount <= 1.0)) {
    fail("position_discount must be in (0,1]");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must be in (0,1)");
  if (bootstrap_days < 2) fail("bootstrap_days must be >= 2");
  if (!(organic_browse_rate >= 0.0 && organic_browse_rate <= 1.0)) {
    fail("organic_browse_rate must be in [0,1]");
  }
}

ExperimentConfig load_experiment_config(const std::string& path) {
  ExperimentConfig config;
  for (const auto& [key, value] : load_kv_file(path)) {
    if (key == "user_count") config.user_count = parse_i64(value, key);
    else if (key == "item_count") config.item_count = parse_i64(value, key);
    else if (key == "genre_count") config.genre_count = static_cast<int>(parse_i64(value, key));
    else if (key == "days") config.days = static_cast<int>(parse_i64(value, key));
    else if (key == "sessions_per_user_per_day") config.sessions_per_user_per_day = static_cast<int>(parse_i64(value, key));
    else if (key == "drift_probability") config.drift_probability = parse_f64(value, key);
    else if (key == "split_ratio") config.split_ratio = parse_f64(value, key);
    else if (key == "salt") config.salt = value;
    else if (key == "seed") config.seed = static_cast<std::uint64_t>(parse_i64(value, key));
    else if (key == "list_length") config.list_length = static_cast<std::size_t>(parse_i64(value, key));
    else if (key == "batch_cadence_s") config.batch_cadence_s = parse_i64(value, key);
    else if (key == "position_discount") config.position_discount = parse_f64(value, key);
    else if (key == "alpha") config.alpha = parse_f64(value, key);
    else if (key == "bootstrap_days") config.bootstrap_days = static_cast<int>(parse_i64(value, key));
    else if (key == "organic_browse_rate") config.organic_browse_rate = parse_f64(value, key);
    else if (key == "injection_enabled") config.injection_enabled = parse_i64(value, key) != 0;
    else fail("unknown config key '" + key + "' in '" + path + "'");
  }
  config.validate();
  return config;
}

void save_experiment_config(const std::string& path,
                            const ExperimentConfig& c) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail("cannot open '" + path + "' for writing");
  out << "user_count=" << c.user_count << '\n'
      << "item_count=" << c.item_count << '\n'
      << "genre_count=" << c.genre_count << '\n'
      << "days=" << c.days << '\n'
      << "sessions_per_user_per_day=" << c.sessions_per_user_per_day << '\n'
      << "drift_probability=" << full_precision(c.drift_probability) << '\n'
      << "split_ratio=" << full_precision(c.split_ratio) << '\n'
      << "salt=" << c.salt << '\n'
      << "seed=" << c.seed << '\n'
      << "list_length=" << c.list_length << '\n'
      << "batch_cadence_s=" << c.batch_cadence_s << '\n'
      << "position_discount=" << full_precision(c.position_discount) << '\n'
      << "alpha=" << full_precision(c.alpha) << '\n'
      << "bootstrap_days=" << c.bootstrap_days << '\n'
      << "organic_browse_rate=" << full_precision(c.organic_browse_rate) << '\n'
      << "injection_enabled=" << (c.injection_enabled ? 1 : 0) << '\n';
  if (!out.flush()) fail("failed writing config to '" + path + "'");
}

}  // namespace freshrec
