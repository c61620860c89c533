#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "freshrec/batch.hpp"
#include "freshrec/config.hpp"
#include "freshrec/event_log.hpp"
#include "freshrec/http_server.hpp"
#include "freshrec/injection.hpp"
#include "freshrec/kernels.hpp"
#include "freshrec/manifest.hpp"
#include "freshrec/ranking.hpp"
#include "freshrec/realtime_store.hpp"
#include "freshrec/rng.hpp"
#include "freshrec/serving.hpp"
#include "freshrec/simulation.hpp"
#include "freshrec/stats.hpp"
#include "freshrec/strings.hpp"
#include "freshrec/version.hpp"

namespace fs = std::filesystem;
using namespace freshrec;

namespace {

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void write_command_manifest(const std::string& dir, const std::string& command,
                            const std::string& config, std::uint64_t seed,
                            const std::vector<std::string>& artifacts) {
  RunManifest manifest;
  manifest.version = std::string(kVersion);
  manifest.command = command;
  manifest.config = config;
  manifest.seed = seed;
  for (const std::string& name : artifacts) add_artifact(manifest, dir, name);
  write_manifest(dir, manifest);
}

int cmd_gen_data(const std::string& out_dir, std::int64_t items, int genres,
                 std::uint64_t seed, std::int64_t event_count,
                 std::int64_t users, int days) {
  fs::create_directories(out_dir);
  const Catalog catalog =
      generate_catalog(static_cast<std::size_t>(items), genres, seed);
  write_catalog(join(out_dir, "catalog.txt"), catalog);
  std::vector<std::string> artifacts = {"catalog.txt"};

  if (event_count > 0) {
    // Random organic traffic, enough to exercise run-batch and replay.
    std::mt19937_64 rng = substream(seed, "gen-events");
    std::vector<WatchEvent> events;
    events.reserve(static_cast<std::size_t>(event_count));
    const std::int64_t span = static_cast<std::int64_t>(days) * 86400;
    for (std::int64_t i = 0; i < event_count; ++i) {
      WatchEvent e;
      e.user_id = "u" + std::to_string(uniform_index(rng, static_cast<std::uint64_t>(users)));
      e.item_id = catalog.items()[uniform_index(rng, catalog.size())].item_id;
      e.timestamp = static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(span)));
      e.completion_fraction = uniform_range(rng, 0.2, 1.0);
      e.watch_duration_s = std::llround(e.completion_fraction * 7200.0);
      events.push_back(std::move(e));
    }
    std::sort(events.begin(), events.end(),
              [](const WatchEvent& a, const WatchEvent& b) {
                return a.timestamp < b.timestamp;
              });
    const std::string log_path = join(out_dir, "events.log");
    std::ofstream(log_path, std::ios::trunc).close();  // fresh log
    append_events(log_path, events);
    artifacts.push_back("events.log");
  }

  write_command_manifest(out_dir, "gen-data", "-", seed, artifacts);
  std::cout << "catalog: " << items << " items, " << genres << " genres";
  if (event_count > 0) std::cout << "; events: " << event_count;
  std::cout << "\nwrote " << out_dir << "\n";
  return 0;
}

int cmd_run_batch(const std::string& log, const std::string& catalog_path,
                  std::int64_t cutoff, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const Catalog catalog = read_catalog(catalog_path);
  const BatchOutput output = run_batch(log, catalog, cutoff, BatchConfig{});
  save_snapshots(join(out_dir, "snapshots.txt"), output.snapshots);
  save_similarity(join(out_dir, "similarity.txt"), output.similarity);
  save_popularity(join(out_dir, "popularity.txt"), output.popularity);
  write_command_manifest(out_dir, "run-batch", "-", 0,
                         {"snapshots.txt", "similarity.txt", "popularity.txt"});
  std::cout << "batch cutoff " << cutoff << ": " << output.snapshots.size()
            << " user snapshots, " << output.similarity.size()
            << " items with neighbors\n";
  return 0;
}

int cmd_train_ranker(const std::string& impressions, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto examples = load_training_examples(impressions);
  std::int64_t trained_at = 0;
  const TrainResult result = train_ranker(examples, TrainConfig{}, trained_at);
  save_model(join(out_dir, "model.txt"), result.model);
  write_command_manifest(out_dir, "train-ranker", "-", 0, {"model.txt"});
  std::cout << "trained on " << examples.size()
            << " impressions; final log-loss " << fixed(result.final_log_loss, 6)
            << ", train accuracy " << fixed(result.train_accuracy, 4) << "\n";
  return 0;
}

int cmd_serve(const std::string& artifacts_dir, int port,
              const std::string& experiment_config) {
  const ExperimentConfig config = load_experiment_config(experiment_config);

  // Everything loads before the listener starts; a missing artifact is a
  // startup failure, never a per-request one.
  const Catalog catalog = read_catalog(join(artifacts_dir, "catalog.txt"));
  const SnapshotStore snapshots = load_snapshots(join(artifacts_dir, "snapshots.txt"));
  const SimilarityModel similarity = load_similarity(join(artifacts_dir, "similarity.txt"));
  const PopularityTable popularity = load_popularity(join(artifacts_dir, "popularity.txt"));
  const RankerModel model = load_model(join(artifacts_dir, "model.txt"));

  std::vector<UserId> users;
  users.reserve(static_cast<std::size_t>(config.user_count));
  for (std::int64_t i = 0; i < config.user_count; ++i) {
    users.push_back("u" + std::to_string(i));
  }
  const ExperimentAssignment assignment(users, config.split_ratio, config.salt);

  RealtimeStore store;
  ServingConfig serving;
  serving.list_length = config.list_length;

  std::ofstream impression_log(join(artifacts_dir, "impressions.log"),
                               std::ios::app);
  std::mutex impression_mu;
  Engine engine(
      Engine::Artifacts{&catalog, &snapshots, &similarity, &popularity, &model},
      &store, &assignment, serving, [&](const Impression& impression) {
        std::lock_guard<std::mutex> lock(impression_mu);
        impression_log << format_impression(impression) << '\n';
      });
  engine.set_injection_enabled(config.injection_enabled);

  HttpService service(engine, store);
  std::cout << "serving on port " << port << " (kernels: "
            << kernels::backend_name(kernels::active_backend()) << ")\n";
  service.run("0.0.0.0", port);
  return 0;
}

int cmd_replay(const std::string& log, double rate, std::size_t capacity,
               std::int64_t ttl) {
  const auto events =
      read_events(log, 0, std::numeric_limits<std::int64_t>::max());
  RealtimeStore store(RealtimeStore::Options{capacity, ttl, 64});

  const auto start = std::chrono::steady_clock::now();
  std::size_t ingested = 0;
  for (const WatchEvent& e : events) {
    if (rate > 0.0) {
      const auto due = start + std::chrono::duration_cast<
                                   std::chrono::steady_clock::duration>(
                                   std::chrono::duration<double>(
                                       static_cast<double>(ingested) / rate));
      std::this_thread::sleep_until(due);
    }
    store.ingest(e);
    ++ingested;
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  std::cout << "replayed " << ingested << " events in " << fixed(elapsed, 3)
            << "s (" << fixed(elapsed > 0 ? ingested / elapsed : 0.0, 0)
            << " events/s); store holds " << store.total_entries()
            << " entries for " << store.user_count() << " users\n";
  return 0;
}

int cmd_simulate_ab(const std::string& config_path, const std::string& out_dir) {
  ExperimentConfig config;
  if (!config_path.empty()) config = load_experiment_config(config_path);
  const ExperimentResult result = run_experiment(config, out_dir);
  std::cout << render_lift_report(result.report);
  std::cout << "artifacts in " << out_dir << "\n";
  return 0;
}

int cmd_report(const std::string& in_dir) {
  verify_manifest(in_dir);
  const LiftReport report = load_lift_report(join(in_dir, "lift_report.kv"));
  std::cout << render_lift_report(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"freshrec: batch-updated recommender with inference-time "
               "recent-history injection and an A/B harness"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic catalog (and optional event log)");
  std::int64_t gen_items = 2000;
  int gen_genres = 12;
  std::uint64_t gen_seed = 42;
  std::string gen_out;
  std::int64_t gen_events = 0;
  std::int64_t gen_users = 1000;
  int gen_days = 7;
  gen->add_option("--items", gen_items, "Catalog size");
  gen->add_option("--genres", gen_genres, "Genre vector dimension");
  gen->add_option("--seed", gen_seed, "Random seed");
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--events", gen_events, "Also generate this many random events");
  gen->add_option("--users", gen_users, "User population for --events");
  gen->add_option("--days", gen_days, "Time span in days for --events");

  auto* batch = app.add_subcommand("run-batch", "Run the daily batch job over an event log");
  std::string batch_log, batch_catalog, batch_out;
  std::int64_t batch_cutoff = 0;
  batch->add_option("--log", batch_log, "Event log path")->required();
  batch->add_option("--catalog", batch_catalog, "Catalog path")->required();
  batch->add_option("--cutoff", batch_cutoff, "Cutoff timestamp (exclusive)")->required();
  batch->add_option("--out", batch_out, "Output directory")->required();

  auto* train = app.add_subcommand("train-ranker", "Fit the ranking model from logged impressions");
  std::string train_impressions, train_out;
  train->add_option("--impressions", train_impressions, "Training impressions path")->required();
  train->add_option("--out", train_out, "Output directory")->required();

  auto* serve = app.add_subcommand("serve", "Serve recommendations over HTTP");
  std::string serve_artifacts, serve_experiment;
  int serve_port = 8080;
  serve->add_option("--artifacts", serve_artifacts, "Artifacts directory")->required();
  serve->add_option("--port", serve_port, "Listen port");
  serve->add_option("--experiment", serve_experiment, "Experiment config path")->required();

  auto* replay = app.add_subcommand("replay", "Stream an event log into a realtime store");
  std::string replay_log;
  double replay_rate = 0.0;
  std::size_t replay_cap = 20;
  std::int64_t replay_ttl = 86400;
  replay->add_option("--log", replay_log, "Event log path")->required();
  replay->add_option("--rate", replay_rate, "Events per second (0 = unthrottled)");
  replay->add_option("--cap", replay_cap, "Window capacity per user");
  replay->add_option("--ttl", replay_ttl, "Window TTL in seconds");

  auto* sim = app.add_subcommand("simulate-ab", "Run the synthetic A/B experiment");
  std::string sim_config, sim_out;
  sim->add_option("--config", sim_config, "Experiment config path (defaults apply when omitted)");
  sim->add_option("--out", sim_out, "Output directory")->required();

  auto* report = app.add_subcommand("report", "Render the lift report of a finished run");
  std::string report_in;
  report->add_option("--in", report_in, "Run output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help / --version
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 2;
  }

  try {
    if (gen->parsed()) {
      return cmd_gen_data(gen_out, gen_items, gen_genres, gen_seed, gen_events,
                          gen_users, gen_days);
    }
    if (batch->parsed()) {
      return cmd_run_batch(batch_log, batch_catalog, batch_cutoff, batch_out);
    }
    if (train->parsed()) return cmd_train_ranker(train_impressions, train_out);
    if (serve->parsed()) return cmd_serve(serve_artifacts, serve_port, serve_experiment);
    if (replay->parsed()) return cmd_replay(replay_log, replay_rate, replay_cap, replay_ttl);
    if (sim->parsed()) return cmd_simulate_ab(sim_config, sim_out);
    if (report->parsed()) return cmd_report(report_in);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
