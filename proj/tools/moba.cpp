#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <thread>

#include <CLI11.hpp>

#include "moba/bench.hpp"
#include "moba/config.hpp"
#include "moba/dataprep.hpp"
#include "moba/replay.hpp"
#include "moba/runtime.hpp"
#include "moba/train.hpp"

namespace fs = std::filesystem;
using namespace moba;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitVerification = 3;

PolicyTier parse_tier(const std::string& s) {
  if (s == "expert") return PolicyTier::expert;
  if (s == "weak") return PolicyTier::weak;
  if (s == "random") return PolicyTier::random;
  throw ConfigError("unknown policy tier: " + s);
}

SceneKind parse_scene(const std::string& s) {
  for (int k = 1; k <= kNumScenes; ++k) {
    if (s == scene_name(static_cast<SceneKind>(k))) return static_cast<SceneKind>(k);
  }
  throw ConfigError("unknown scene kind: " + s + " (push_turret, combat, lane_farm, "
                    "jungle_farm, return, navigation)");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::string> list_replay_files(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".mrpl") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no .mrpl files in " + dir);
  return files;
}

std::vector<Replay> load_replays(const std::string& dir, const RunConfig& cfg, bool force) {
  std::vector<Replay> replays;
  uint64_t want = map_digest(cfg.map);
  for (const auto& path : list_replay_files(dir)) {
    Replay r = read_replay_file(path);
    if (r.map_digest != want && !force) {
      throw DataError("map digest mismatch in " + path + " (use --force to override)");
    }
    replays.push_back(std::move(r));
  }
  return replays;
}

// Loads each distinct checkpoint once; verifies its config digest.
struct ModelCache {
  const RunConfig& cfg;
  bool force;
  std::map<std::string, std::shared_ptr<Network>> loaded;

  std::shared_ptr<const Network> get(const std::string& path) {
    auto it = loaded.find(path);
    if (it != loaded.end()) return it->second;
    auto net = std::make_shared<Network>(net_dims(cfg.grid));
    uint64_t stored = load_checkpoint(*net, path);
    if (stored != config_digest(cfg) && !force) {
      throw DataError("config digest mismatch between checkpoint " + path +
                      " and the active config (use --force to override)");
    }
    loaded[path] = net;
    return net;
  }
};

TeamSpec parse_team_spec(const std::string& spec, ModelCache& cache) {
  TeamSpec team;
  team.name = spec;
  for (const auto& item : split_list(spec)) {
    HeroPolicy hp;
    if (item.rfind("model:", 0) == 0) {
      hp.model = cache.get(item.substr(6));
      hp.tier = PolicyTier::external;
    } else {
      hp.tier = parse_tier(item);
    }
    team.heroes.push_back(std::move(hp));
  }
  if (team.heroes.empty()) throw ConfigError("empty team spec");
  return team;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot open for write: " + path);
  f << text;
}

int run_simulate(const RunConfig& cfg, int games, uint64_t seed, const std::string& out_dir,
                 const std::string& tier_a, const std::string& tier_b, bool jsonl) {
  fs::create_directories(out_dir);
  PolicyTier ta = parse_tier(tier_a);
  PolicyTier tb = parse_tier(tier_b);
  int r = cfg.roster_size;
  std::vector<PolicyTier> tiers;
  for (int i = 0; i < r; ++i) tiers.push_back(ta);
  for (int i = 0; i < r; ++i) tiers.push_back(tb);

  int workers = static_cast<int>(std::clamp(std::thread::hardware_concurrency(), 1u, 8u));
  workers = std::min(workers, std::max(1, games));
  std::vector<std::string> outcomes(static_cast<size_t>(games));
  auto run = [&](int wid) {
    for (int i = wid; i < games; i += workers) {
      uint64_t s = seed + static_cast<uint64_t>(i);
      Replay rep = record(cfg.map, cfg.arena, {r, r}, tiers, s, cfg.arena.max_ticks);
      char name[64];
      std::snprintf(name, sizeof(name), "/game_%05d.mrpl", i);
      write_replay_file(rep, out_dir + name);
      if (jsonl) {
        std::snprintf(name, sizeof(name), "/game_%05d.jsonl", i);
        dump_replay_jsonl(rep, out_dir + name);
      }
      const char* result = rep.result == GameResult::blue_win   ? "blue"
                           : rep.result == GameResult::red_win  ? "red"
                           : rep.result == GameResult::tie      ? "tie"
                                                                : "ongoing";
      char line[128];
      std::snprintf(line, sizeof(line), "game %05d seed %llu ticks %u result %s", i,
                    static_cast<unsigned long long>(s), rep.tick_count, result);
      outcomes[static_cast<size_t>(i)] = line;
    }
  };
  std::vector<std::thread> pool;
  for (int wid = 1; wid < workers; ++wid) pool.emplace_back(run, wid);
  run(0);
  for (auto& t : pool) t.join();
  for (const auto& line : outcomes) std::cout << line << "\n";
  std::cout << "wrote " << games << " replays to " << out_dir << "\n";
  return kExitOk;
}

int run_extract(const RunConfig& cfg, const std::string& replay_dir, uint32_t hero,
                const std::string& scene, const std::string& out, uint64_t seed,
                bool no_scene_sampling, bool force) {
  std::vector<Replay> replays = load_replays(replay_dir, cfg, force);
  BuildFilters filters;
  filters.quantile = cfg.dataprep.filter_quantile;
  filters.apply_scene_sampling = !no_scene_sampling;
  if (!scene.empty()) filters.scene_filter = parse_scene(scene);
  Dataset data = build_dataset(replays, hero, filters, cfg, seed);
  write_dataset_file(data, out);
  std::cout << data.manifest;
  std::cout << "wrote dataset to " << out << "\n";
  return kExitOk;
}

int run_train(const RunConfig& cfg, const std::string& data_path, const std::string& init,
              const std::string& out, uint64_t seed, bool force) {
  Dataset data = read_dataset_file(data_path);
  uint64_t digest = config_digest(cfg);
  if (data.config_digest != digest && !force) {
    throw DataError("config digest mismatch between dataset and the active config "
                    "(use --force to override)");
  }
  Network net(net_dims(cfg.grid));
  if (!init.empty()) {
    uint64_t stored = load_checkpoint(net, init);
    if (stored != digest && !force) {
      throw DataError("config digest mismatch between --init checkpoint and the active config "
                      "(use --force to override)");
    }
  } else {
    net.init_params(seed);
  }
  TrainOptions opts;
  opts.params = cfg.train;
  opts.seed = seed;
  std::vector<std::string> log;
  train_model(net, data, opts, &log);
  save_checkpoint(net, out, digest);
  std::string log_text = "epoch, split, loss, acc_level1, acc_level2, acc_global, acc_local\n";
  for (const auto& row : log) log_text += row + "\n";
  write_text(out + ".log", log_text);
  std::cout << log_text;
  std::cout << "wrote checkpoint to " << out << "\n";
  return kExitOk;
}

int run_eval(const RunConfig& cfg, const std::string& team_a, const std::string& team_b, int n,
             uint64_t seed, const std::string& out, const std::string& dump_dir, bool force) {
  ModelCache cache{cfg, force, {}};
  TeamSpec a = parse_team_spec(team_a, cache);
  TeamSpec b = parse_team_spec(team_b, cache);
  if (!dump_dir.empty()) fs::create_directories(dump_dir);
  MatchStats stats = run_tournament(a, b, n, seed, cfg, 0, dump_dir);
  std::string table = format_table(stats, a.name, b.name);
  write_text(out, table);
  write_text(out + ".jsonl", format_jsonl(stats, a.name, b.name));
  std::cout << table;
  std::cout << "wrote report to " << out << "\n";
  return kExitOk;
}

int run_ablate(const RunConfig& cfg, const std::string& data_path, const std::string& replay_dir,
               uint32_t hero, const std::string& switches_arg, const std::string& out,
               uint64_t seed, bool force) {
  Dataset data = read_dataset_file(data_path);
  if (data.config_digest != config_digest(cfg) && !force) {
    throw DataError("config digest mismatch between dataset and the active config "
                    "(use --force to override)");
  }
  std::vector<std::string> switches = split_list(switches_arg);
  std::vector<Replay> replays;
  bool need_replays =
      std::find(switches.begin(), switches.end(), "scene_sampling") != switches.end();
  if (need_replays) {
    if (replay_dir.empty()) {
      throw DataError("the scene_sampling switch needs --replays to rebuild an unsampled dataset");
    }
    replays = load_replays(replay_dir, cfg, force);
  }
  AblationReport report =
      run_ablation(data, need_replays ? &replays : nullptr, hero, cfg, switches, seed);
  std::string text = report.table_text;
  for (const auto& note : report.notes) text += "# " + note + "\n";
  write_text(out, text);
  std::cout << text;
  std::cout << "wrote report to " << out << "\n";
  return kExitOk;
}

int run_gradcheck(const RunConfig& cfg, uint64_t seed) {
  double max_rel = gradient_check(seed, cfg.grid);
  std::printf("gradcheck seed %llu: max relative error %.3e\n",
              static_cast<unsigned long long>(seed), max_rel);
  if (max_rel < 1e-5) {
    std::printf("PASS\n");
    return kExitOk;
  }
  std::printf("FAIL (threshold 1e-5)\n");
  return kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minimoba: desk-scale MOBA imitation-learning pipeline"};
  app.require_subcommand(1);

  std::string config_path, out, replay_dir, data_path, init_path, scene, team_a, team_b;
  std::string tier_a = "expert", tier_b = "expert", switches, dump_dir;
  int games = 10, n_matches = 100;
  uint64_t seed = 1;
  uint32_t hero = 1;
  bool force = false, jsonl = false, no_scene_sampling = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file (defaults when omitted)");
    cmd->add_flag("--force", force, "ignore config digest mismatches");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run scripted games and write replays");
  add_common(simulate);
  simulate->add_option("--games", games, "number of games")->required();
  simulate->add_option("--seed", seed, "first seed");
  simulate->add_option("--out", out, "output directory")->required();
  simulate->add_option("--tier-a", tier_a, "blue policy tier (expert|weak|random)");
  simulate->add_option("--tier-b", tier_b, "red policy tier");
  simulate->add_flag("--jsonl", jsonl, "also dump a .jsonl debug file per game");

  CLI::App* extract = app.add_subcommand("extract", "build a dataset from replays");
  add_common(extract);
  extract->add_option("--replays", replay_dir, "replay directory")->required();
  extract->add_option("--hero", hero, "hero id to extract")->required();
  extract->add_option("--scene", scene, "keep one scene only (fine-tune flow)");
  extract->add_option("--seed", seed, "sampling seed");
  extract->add_option("--out", out, "dataset file")->required();
  extract->add_flag("--no-scene-sampling", no_scene_sampling,
                    "skip in-scene tuning, attack normalization and scene balancing");

  CLI::App* train = app.add_subcommand("train", "train a model on a dataset");
  add_common(train);
  train->add_option("--data", data_path, "dataset file")->required();
  train->add_option("--init", init_path, "warm-start checkpoint (fine-tune flow)");
  train->add_option("--seed", seed, "training seed");
  train->add_option("--out", out, "checkpoint file")->required();

  CLI::App* eval = app.add_subcommand("eval", "tournament between two teams");
  add_common(eval);
  eval->add_option("--team-a", team_a, "spec: tier name or model:PATH, comma list per hero")
      ->required();
  eval->add_option("--team-b", team_b, "spec for team B")->required();
  eval->add_option("--n", n_matches, "number of matches");
  eval->add_option("--seed", seed, "first match seed");
  eval->add_option("--out", out, "report file")->required();
  eval->add_option("--dump-replays", dump_dir, "write per-match replays here");

  CLI::App* ablate = app.add_subcommand("ablate", "component ablation study");
  add_common(ablate);
  ablate->add_option("--data", data_path, "full-pipeline dataset file")->required();
  ablate->add_option("--replays", replay_dir, "replay pool (needed for scene_sampling)");
  ablate->add_option("--hero", hero, "hero id (for dataset rebuilds)");
  ablate->add_option("--switches", switches,
                     "comma list: scene_sampling,macro_aux,local_image,global_image,vector")
      ->required();
  ablate->add_option("--seed", seed, "seed");
  ablate->add_option("--out", out, "report file")->required();

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
  add_common(gradcheck);
  gradcheck->add_option("--seed", seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig cfg = load_run_config(config_path);
    if (simulate->parsed()) {
      return run_simulate(cfg, games, seed, out, tier_a, tier_b, jsonl);
    }
    if (extract->parsed()) {
      return run_extract(cfg, replay_dir, hero, scene, out, seed, no_scene_sampling, force);
    }
    if (train->parsed()) return run_train(cfg, data_path, init_path, out, seed, force);
    if (eval->parsed()) {
      return run_eval(cfg, team_a, team_b, n_matches, seed, out, dump_dir, force);
    }
    if (ablate->parsed()) {
      return run_ablate(cfg, data_path, replay_dir, hero, switches, out, seed, force);
    }
    if (gradcheck->parsed()) return run_gradcheck(cfg, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
