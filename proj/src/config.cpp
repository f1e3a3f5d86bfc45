#include "moba/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "moba/rng.hpp"

namespace moba {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string rest = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    std::vector<double> values;
    std::istringstream vs(rest);
    std::string item;
    while (std::getline(vs, item, ',')) {
      std::string v = trim(item);
      if (v.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty value");
      try {
        size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        values.push_back(d);
      } catch (const std::exception&) {
        throw ConfigError("config line " + std::to_string(lineno) + ": bad number '" + v + "'");
      }
    }
    if (values.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": no values");
    out[key] = values;
  }
  return out;
}

ConfigMap load_config_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

namespace {

// turret_pos[team][lane] refers to the physical lane for both teams. The
// mirror of a point on the top polyline lies on the bottom one, so the red
// positions come from the mirrored lane index.
void recompute_turrets(MapConfig& m) {
  for (int lane = 0; lane < 3; ++lane) {
    float len = polyline_length(m.lanes[lane]);
    for (int slot = 0; slot < 2; ++slot) {
      float frac = m.turret_lane_fraction[slot];
      m.turret_pos[0][lane][slot] = point_along_polyline(m.lanes[lane], len * frac);
    }
  }
  for (int lane = 0; lane < 3; ++lane) {
    int mirrored = 2 - lane;
    for (int slot = 0; slot < 2; ++slot) {
      m.turret_pos[1][lane][slot] = m.mirror(m.turret_pos[0][mirrored][slot]);
    }
  }
}

}  // namespace

MapConfig make_default_map(float side, float lane_halfwidth) {
  MapConfig m;
  m.side_length = side;
  m.lane_halfwidth = lane_halfwidth;
  float pad = side * 0.05f;  // base inset from the corner
  Vec2 blue{pad, pad};
  Vec2 red{side - pad, side - pad};
  m.base_pos[0] = blue;
  m.base_pos[1] = red;
  // Waypoints run blue -> red for every lane.
  m.lanes[0] = {blue, {pad, side - pad}, red};   // top: left edge then top edge
  m.lanes[1] = {blue, red};                      // mid: diagonal
  m.lanes[2] = {blue, {side - pad, pad}, red};   // bottom: bottom edge then right edge
  recompute_turrets(m);
  float s = side / 120.0f;  // default geometry is authored at side 120
  auto camp = [&](float x, float y) {
    m.jungle_camps.push_back({{x * s, y * s}, 1350});
    m.jungle_camps.push_back({{(120.0f - x) * s, (120.0f - y) * s}, 1350});
  };
  camp(30, 54);
  camp(24, 78);
  camp(42, 96);
  camp(48, 72);
  auto bush = [&](float x0, float y0, float x1, float y1) {
    m.bushes.push_back({x0 * s, y0 * s, x1 * s, y1 * s});
    m.bushes.push_back({(120.0f - x1) * s, (120.0f - y1) * s, (120.0f - x0) * s, (120.0f - y0) * s});
  };
  bush(38, 50, 44, 56);
  bush(50, 38, 56, 44);
  bush(3, 78, 9, 84);
  return m;
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.map = make_default_map();
  return cfg;
}

namespace {

// Uniform access to every scalar setting, used by both resolve and dump so the
// two can never drift apart.
struct Binder {
  // When resolving: overrides to consume. When dumping: null.
  const ConfigMap* in = nullptr;
  std::map<std::string, bool>* consumed = nullptr;
  std::string* out = nullptr;

  void scalar(const std::string& key, double* v) {
    if (in) {
      auto it = in->find(key);
      if (it != in->end()) {
        if (it->second.size() != 1) throw ConfigError(key + ": expected a single number");
        *v = it->second[0];
        (*consumed)[key] = true;
      }
    }
    if (out) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.9g", *v);
      *out += key + " = " + buf + "\n";
    }
  }

  template <typename T>
  void num(const std::string& key, T* v) {
    double d = static_cast<double>(*v);
    scalar(key, &d);
    *v = static_cast<T>(d);
  }

  void list(const std::string& key, std::vector<double>* v, size_t arity) {
    if (in) {
      auto it = in->find(key);
      if (it != in->end()) {
        if (arity != 0 && it->second.size() != arity) {
          throw ConfigError(key + ": expected " + std::to_string(arity) + " numbers");
        }
        *v = it->second;
        (*consumed)[key] = true;
      }
    }
    if (out) {
      *out += key + " =";
      for (size_t i = 0; i < v->size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.9g", (*v)[i]);
        *out += (i == 0 ? " " : ", ");
        *out += buf;
      }
      *out += "\n";
    }
  }
};

void bind_config(RunConfig& cfg, Binder& b) {
  auto& a = cfg.arena;
  b.num("arena.ticks_per_second", &a.ticks_per_second);
  b.num("arena.max_ticks", &a.max_ticks);
  b.num("arena.vision_radius", &a.vision_radius);
  b.num("arena.targeting_radius", &a.targeting_radius);
  b.num("arena.base_radius", &a.base_radius);
  b.num("arena.return_channel_ticks", &a.return_channel_ticks);
  b.num("arena.skill_area_ttl", &a.skill_area_ttl);
  b.num("arena.crystal_hp", &a.crystal_hp);
  b.num("arena.hero.base_hp", &a.hero.base_hp);
  b.num("arena.hero.hp_per_level", &a.hero.hp_per_level);
  b.num("arena.hero.base_damage", &a.hero.base_damage);
  b.num("arena.hero.damage_per_level", &a.hero.damage_per_level);
  b.num("arena.hero.attack_range", &a.hero.attack_range);
  b.num("arena.hero.attack_cooldown", &a.hero.attack_cooldown);
  b.num("arena.hero.move_speed", &a.hero.move_speed);
  b.num("arena.hero.respawn_base", &a.hero.respawn_base);
  b.num("arena.hero.respawn_per_level", &a.hero.respawn_per_level);
  b.num("arena.hero.xp_per_level", &a.hero.xp_per_level);
  b.num("arena.hero.max_level", &a.hero.max_level);
  SkillParams* skills[3] = {&a.skill1, &a.skill2, &a.skill3};
  for (int i = 0; i < 3; ++i) {
    std::string p = "arena.skill" + std::to_string(i + 1) + ".";
    b.num(p + "cooldown", &skills[i]->cooldown);
    b.num(p + "reach", &skills[i]->reach);
    b.num(p + "width", &skills[i]->width);
    b.num(p + "damage_base", &skills[i]->damage_base);
    b.num(p + "damage_per_level", &skills[i]->damage_per_level);
  }
  b.num("arena.minion.hp", &a.minion.hp);
  b.num("arena.minion.damage", &a.minion.damage);
  b.num("arena.minion.range", &a.minion.range);
  b.num("arena.minion.attack_cooldown", &a.minion.attack_cooldown);
  b.num("arena.minion.move_speed", &a.minion.move_speed);
  b.num("arena.minion.aggro_radius", &a.minion.aggro_radius);
  b.num("arena.minion.wave_first_tick", &a.minion.wave_first_tick);
  b.num("arena.minion.wave_period", &a.minion.wave_period);
  b.num("arena.minion.wave_size", &a.minion.wave_size);
  b.num("arena.turret.hp", &a.turret.hp);
  b.num("arena.turret.damage", &a.turret.damage);
  b.num("arena.turret.range", &a.turret.range);
  b.num("arena.turret.attack_cooldown", &a.turret.attack_cooldown);
  b.num("arena.monster.hp", &a.monster.hp);
  b.num("arena.monster.damage", &a.monster.damage);
  b.num("arena.monster.range", &a.monster.range);
  b.num("arena.monster.attack_cooldown", &a.monster.attack_cooldown);
  b.num("arena.monster.respawn_ticks", &a.monster.respawn_ticks);
  b.num("arena.gold.minion", &a.rewards.gold_minion);
  b.num("arena.gold.monster", &a.rewards.gold_monster);
  b.num("arena.gold.hero", &a.rewards.gold_hero);
  b.num("arena.gold.turret", &a.rewards.gold_turret);
  b.num("arena.xp.minion", &a.rewards.xp_minion);
  b.num("arena.xp.monster", &a.rewards.xp_monster);
  b.num("arena.xp.hero", &a.rewards.xp_hero);
  b.num("arena.xp.turret", &a.rewards.xp_turret);

  b.num("grid.global_n", &cfg.grid.global_n);
  b.num("grid.local_m", &cfg.grid.local_m);
  b.num("grid.local_view_edge", &cfg.grid.local_view_edge);

  b.num("labeling.series_gap", &cfg.labeling.series_gap);
  b.num("labeling.min_series_events", &cfg.labeling.min_series_events);
  b.num("labeling.stationary_eps", &cfg.labeling.stationary_eps);
  b.num("labeling.move_horizon_combat", &cfg.labeling.move_horizon_combat);
  b.num("labeling.move_horizon_default", &cfg.labeling.move_horizon_default);

  b.num("dataprep.scene_window", &cfg.dataprep.scene_window);
  b.num("dataprep.attack_k", &cfg.dataprep.attack_k);
  b.num("dataprep.filter_quantile", &cfg.dataprep.filter_quantile);
  b.num("dataprep.train_fraction", &cfg.dataprep.train_fraction);
  for (int s = 1; s <= kNumScenes; ++s) {
    std::string name = scene_name(static_cast<SceneKind>(s));
    std::vector<double> r(cfg.dataprep.scene_ratios[s].begin(), cfg.dataprep.scene_ratios[s].end());
    b.list("dataprep.ratio." + name, &r, 5);
    for (int i = 0; i < 5; ++i) cfg.dataprep.scene_ratios[s][i] = static_cast<float>(r[i]);
    b.num("dataprep.scene_override." + name, &cfg.dataprep.scene_override[s]);
  }

  b.num("features.gold_norm", &cfg.features.gold_norm);
  b.num("features.damage_norm", &cfg.features.damage_norm);
  b.num("features.minion_count_norm", &cfg.features.minion_count_norm);
  b.num("features.kill_diff_norm", &cfg.features.kill_diff_norm);
  b.num("features.turret_diff_norm", &cfg.features.turret_diff_norm);
  b.num("features.attack_range_norm", &cfg.features.attack_range_norm);
  b.num("features.move_speed_norm", &cfg.features.move_speed_norm);
  b.num("features.history_short", &cfg.features.history_short);
  b.num("features.history_long", &cfg.features.history_long);

  b.num("nn.lr", &cfg.train.lr);
  b.num("nn.beta1", &cfg.train.beta1);
  b.num("nn.beta2", &cfg.train.beta2);
  b.num("nn.eps", &cfg.train.eps);
  b.num("nn.lambda", &cfg.train.lambda);
  b.num("nn.batch_size", &cfg.train.batch_size);
  b.num("nn.epochs", &cfg.train.epochs);
  b.num("nn.stop_intent_gradient", &cfg.train.stop_intent_gradient);
  b.num("nn.threads", &cfg.train.threads);
  b.num("nn.log_every", &cfg.train.log_every);
  b.num("nn.w_a0", &cfg.train.w_a0);
  b.num("nn.w_a1", &cfg.train.w_a1);
  b.num("nn.w_bg", &cfg.train.w_bg);
  b.num("nn.w_bl", &cfg.train.w_bl);

  b.num("runtime.observation_delay", &cfg.runtime.observation_delay);
  b.num("runtime.reaction_delay", &cfg.runtime.reaction_delay);
  b.num("runtime.decode_sample", &cfg.runtime.decode_sample);
  b.num("runtime.temperature", &cfg.runtime.temperature);

  b.num("bench.matches", &cfg.bench.matches);
  b.num("bench.confidence", &cfg.bench.confidence);

  b.num("match.roster_size", &cfg.roster_size);

  // Map geometry. side_length/lane_halfwidth regenerate the default layout;
  // camps and bushes can then be replaced point by point.
  float side = cfg.map.side_length;
  float halfwidth = cfg.map.lane_halfwidth;
  b.num("arena.side_length", &side);
  b.num("arena.lane_halfwidth", &halfwidth);
  if (side != cfg.map.side_length || halfwidth != cfg.map.lane_halfwidth) {
    cfg.map = make_default_map(side, halfwidth);
  }
  {
    std::vector<double> fr = {cfg.map.turret_lane_fraction[0], cfg.map.turret_lane_fraction[1]};
    b.list("arena.turret_fractions", &fr, 2);
    if (static_cast<float>(fr[0]) != cfg.map.turret_lane_fraction[0] ||
        static_cast<float>(fr[1]) != cfg.map.turret_lane_fraction[1]) {
      cfg.map.turret_lane_fraction[0] = static_cast<float>(fr[0]);
      cfg.map.turret_lane_fraction[1] = static_cast<float>(fr[1]);
      recompute_turrets(cfg.map);
    }
  }
  for (size_t i = 0; i < cfg.map.jungle_camps.size(); ++i) {
    auto& c = cfg.map.jungle_camps[i];
    std::vector<double> v = {c.pos.x, c.pos.y, static_cast<double>(c.respawn_ticks)};
    b.list("arena.camp." + std::to_string(i), &v, 3);
    c.pos = {static_cast<float>(v[0]), static_cast<float>(v[1])};
    c.respawn_ticks = static_cast<int>(v[2]);
  }
  for (size_t i = 0; i < cfg.map.bushes.size(); ++i) {
    auto& r = cfg.map.bushes[i];
    std::vector<double> v = {r.x0, r.y0, r.x1, r.y1};
    b.list("arena.bush." + std::to_string(i), &v, 4);
    r = {static_cast<float>(v[0]), static_cast<float>(v[1]), static_cast<float>(v[2]),
         static_cast<float>(v[3])};
  }
}

}  // namespace

RunConfig resolve_config(const ConfigMap& overrides) {
  RunConfig cfg = default_run_config();
  std::map<std::string, bool> consumed;
  Binder b;
  b.in = &overrides;
  b.consumed = &consumed;
  bind_config(cfg, b);
  for (const auto& [key, _] : overrides) {
    if (!consumed.count(key)) throw ConfigError("unknown config key: " + key);
  }
  if (cfg.roster_size < 1 || cfg.roster_size > 5) throw ConfigError("match.roster_size must be in [1,5]");
  if (cfg.grid.global_n < 1 || cfg.grid.local_m < 1) throw ConfigError("grid sizes must be positive");
  if (cfg.dataprep.train_fraction <= 0.0f || cfg.dataprep.train_fraction >= 1.0f) {
    throw ConfigError("dataprep.train_fraction must be in (0,1)");
  }
  cfg.arena.skill3_grid = cfg.grid.local_m;
  cfg.arena.skill3_cell = cfg.grid.local_cell();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  if (path.empty()) return default_run_config();
  return resolve_config(load_config_file(path));
}

std::string dump_config(const RunConfig& cfg) {
  std::string out;
  RunConfig copy = cfg;
  Binder b;
  b.out = &out;
  bind_config(copy, b);
  return out;
}

uint64_t config_digest(const RunConfig& cfg) {
  std::string d = dump_config(cfg);
  return fnv1a(d.data(), d.size());
}

uint64_t map_digest(const MapConfig& map) {
  std::string repr;
  char buf[128];
  auto add = [&](float v) {
    std::snprintf(buf, sizeof(buf), "%.9g;", v);
    repr += buf;
  };
  add(map.side_length);
  add(map.lane_halfwidth);
  for (const auto& lane : map.lanes)
    for (Vec2 p : lane) {
      add(p.x);
      add(p.y);
    }
  for (const auto& c : map.jungle_camps) {
    add(c.pos.x);
    add(c.pos.y);
    add(static_cast<float>(c.respawn_ticks));
  }
  for (const auto& r : map.bushes) {
    add(r.x0);
    add(r.y0);
    add(r.x1);
    add(r.y1);
  }
  for (int t = 0; t < 2; ++t) {
    add(map.base_pos[t].x);
    add(map.base_pos[t].y);
    for (int l = 0; l < 3; ++l)
      for (int s = 0; s < 2; ++s) {
        add(map.turret_pos[t][l][s].x);
        add(map.turret_pos[t][l][s].y);
      }
  }
  return fnv1a(repr.data(), repr.size());
}

}  // namespace moba
