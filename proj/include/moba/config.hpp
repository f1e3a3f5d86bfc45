#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "moba/geom.hpp"
#include "moba/types.hpp"

namespace moba {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parsed key/value file: one `dotted.key = number[,number...]` per line,
// '#' starts a comment. Values are always numeric.
using ConfigMap = std::map<std::string, std::vector<double>>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config_file(const std::string& path);

// ---------------------------------------------------------------------------
// Typed sections. Every numeric here is overridable from the config file; the
// defaults below are the single source of game/combat constants.
// ---------------------------------------------------------------------------

struct SkillParams {
  int cooldown = 0;
  float reach = 0.0f;    // line length (skill1), cast range (skill2), unused (skill3)
  float width = 0.0f;    // line halfwidth (skill1), area radius (skill3)
  float damage_base = 0.0f;
  float damage_per_level = 0.0f;
};

struct HeroParams {
  float base_hp = 1000.0f;
  float hp_per_level = 100.0f;
  float base_damage = 60.0f;
  float damage_per_level = 8.0f;
  float attack_range = 3.0f;
  int attack_cooldown = 15;
  float move_speed = 3.0f;  // units per second
  int respawn_base = 240;
  int respawn_per_level = 30;
  int xp_per_level = 100;
  int max_level = 15;
};

struct MinionParams {
  float hp = 300.0f;
  float damage = 15.0f;
  float range = 2.0f;
  int attack_cooldown = 15;
  float move_speed = 2.0f;
  float aggro_radius = 6.0f;
  int wave_first_tick = 75;
  int wave_period = 450;
  int wave_size = 3;
};

struct TurretParams {
  float hp = 2000.0f;
  float damage = 110.0f;
  float range = 7.0f;
  int attack_cooldown = 15;
};

struct MonsterParams {
  float hp = 500.0f;
  float damage = 25.0f;
  float range = 2.5f;
  int attack_cooldown = 15;
  int respawn_ticks = 1350;
};

struct RewardParams {
  uint32_t gold_minion = 40;
  uint32_t gold_monster = 80;
  uint32_t gold_hero = 300;
  uint32_t gold_turret = 250;
  int xp_minion = 30;
  int xp_monster = 60;
  int xp_hero = 250;
  int xp_turret = 150;
};

struct ArenaParams {
  int ticks_per_second = 15;
  int max_ticks = 9000;
  float vision_radius = 15.0f;
  float targeting_radius = 9.0f;  // target-slot search radius
  float base_radius = 10.0f;      // "home area" around the crystal
  int return_channel_ticks = 45;
  int skill_area_ttl = 5;  // ticks a cast stays visible in the damage field
  float crystal_hp = 5000.0f;
  // Level-2 grid for position-type skill aiming; synced with GridSpec.
  int skill3_grid = 13;
  float skill3_cell = 1.0f;
  HeroParams hero;
  SkillParams skill1{45, 8.0f, 1.5f, 100.0f, 10.0f};
  SkillParams skill2{90, 6.0f, 1.0f, 150.0f, 15.0f};
  SkillParams skill3{150, 0.0f, 2.0f, 200.0f, 20.0f};
  MinionParams minion;
  TurretParams turret;
  MonsterParams monster;
  RewardParams rewards;
};

struct JungleCamp {
  Vec2 pos{};
  int respawn_ticks = 1350;
};

struct MapConfig {
  float side_length = 120.0f;
  float lane_halfwidth = 6.0f;
  std::vector<Vec2> lanes[3];  // top, mid, bottom; waypoints run blue -> red
  std::vector<JungleCamp> jungle_camps;
  std::vector<Rect> bushes;
  Vec2 base_pos[2];                 // per team
  Vec2 turret_pos[2][3][2];         // [team][lane][0=outer,1=inner]
  float turret_lane_fraction[2] = {0.38f, 0.20f};

  Vec2 mirror(Vec2 p) const { return {side_length - p.x, side_length - p.y}; }
};

// Default map: mid lane on the diagonal, side lanes along the edges, 8 jungle
// camps and 6 bushes in a point-symmetric arrangement.
MapConfig make_default_map(float side_length = 120.0f, float lane_halfwidth = 6.0f);

struct GridSpec {
  int global_n = 12;           // global intent grid, N x N classes
  float local_view_edge = 13.0f;
  int local_m = 13;            // local intent grid, M x M classes

  float global_cell(float side_length) const { return side_length / static_cast<float>(global_n); }
  float local_cell() const { return local_view_edge / static_cast<float>(local_m); }
  int global_classes() const { return global_n * global_n; }
  int local_classes() const { return local_m * local_m; }
};

struct LabelParams {
  int series_gap = 45;         // max gap between attacks of one series (ticks)
  int min_series_events = 2;   // singletons are noise, not intent
  float stationary_eps = 0.05f;
  int move_horizon_combat = 5;
  int move_horizon_default = 15;
};

struct DataprepParams {
  int scene_window = 90;  // trailing event window for scene predicates
  // Per-scene level-1 ratios (move, attack, skill1, skill2, skill3);
  // return_base and idle are never downsampled.
  std::array<std::array<float, 5>, kNumScenes + 1> scene_ratios{};  // indexed by SceneKind value
  std::array<float, kNumScenes + 1> scene_override{};               // balance multiplier per scene
  int attack_k = 8;
  float filter_quantile = 0.5f;
  float train_fraction = 0.9f;

  DataprepParams() {
    for (auto& r : scene_ratios) r = {1, 1, 1, 1, 1};
    scene_ratios[static_cast<int>(SceneKind::combat)] = {3, 1, 1, 1, 1};
    scene_ratios[static_cast<int>(SceneKind::navigation)] = {10, 1, 1, 1, 1};
    scene_override.fill(1.0f);
  }
};

struct FeatureParams {
  float gold_norm = 10000.0f;
  float damage_norm = 200.0f;
  float minion_count_norm = 5.0f;
  float kill_diff_norm = 20.0f;
  float turret_diff_norm = 12.0f;
  float attack_range_norm = 10.0f;
  float move_speed_norm = 5.0f;
  int history_short = 15;
  int history_long = 30;
};

struct TrainParams {
  float lr = 1e-4f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
  float lambda = 1e-4f;  // L2 coefficient; the reference setup used 1.0
  int batch_size = 256;
  int epochs = 5;
  int stop_intent_gradient = 0;  // ablation switch: detach intent softmax inputs
  int threads = 0;               // 0 = hardware concurrency
  int log_every = 1;
  float w_a0 = 1.0f, w_a1 = 1.0f, w_bg = 1.0f, w_bl = 1.0f;
};

struct RuntimeParams {
  int observation_delay = 2;
  int reaction_delay = 1;
  int decode_sample = 0;  // 0 = argmax, 1 = sample with temperature
  float temperature = 1.0f;
};

struct BenchParams {
  int matches = 100;
  float confidence = 0.95f;
};

struct RunConfig {
  ArenaParams arena;
  MapConfig map;
  GridSpec grid;
  LabelParams labeling;
  DataprepParams dataprep;
  FeatureParams features;
  TrainParams train;
  RuntimeParams runtime;
  BenchParams bench;
  int roster_size = 5;

  float ticks_to_seconds(int t) const {
    return static_cast<float>(t) / static_cast<float>(arena.ticks_per_second);
  }
};

RunConfig default_run_config();

// Applies file overrides on top of defaults. Unknown keys are an error.
RunConfig resolve_config(const ConfigMap& overrides);
RunConfig load_run_config(const std::string& path);  // empty path -> defaults

// Canonical `key = value` dump of every effective setting, sorted by key.
std::string dump_config(const RunConfig& cfg);
uint64_t config_digest(const RunConfig& cfg);
uint64_t map_digest(const MapConfig& map);

}  // namespace moba
