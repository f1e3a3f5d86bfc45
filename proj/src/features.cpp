#include "moba/features.hpp"

#include <algorithm>
#include <stdexcept>

namespace moba {

namespace {

float frac(float num, float den) { return den > 0.0f ? num / den : 0.0f; }

struct Grids {
  const GridSpec& grid;
  float side;
  int m, n;
  float local_cell, global_cell;
};

void add_clamped(std::vector<float>& img, int channel, int cells, int row, int col, float v) {
  if (row < 0 || row >= cells || col < 0 || col >= cells) return;
  float& slot = img[static_cast<size_t>((channel * cells + row) * cells + col)];
  slot = std::min(1.0f, slot + v);
}

// Canonical-frame cell of a world position in the local view around `center`.
bool local_cell(const Grids& g, Team team, Vec2 center, Vec2 world, int* row, int* col) {
  Vec2 off = canon_vec(team, world - center);
  int half = g.m / 2;
  int c = half + static_cast<int>(std::floor(off.x / g.local_cell + 0.5f));
  int r = half + static_cast<int>(std::floor(off.y / g.local_cell + 0.5f));
  if (c < 0 || c >= g.m || r < 0 || r >= g.m) return false;
  *row = r;
  *col = c;
  return true;
}

void global_cell(const Grids& g, const MapConfig& map, Team team, Vec2 world, int* row, int* col) {
  Vec2 p = canon_pos(map, team, world);
  *col = std::clamp(static_cast<int>(std::floor(p.x / g.global_cell)), 0, g.n - 1);
  *row = std::clamp(static_cast<int>(std::floor(p.y / g.global_cell)), 0, g.n - 1);
}

}  // namespace

FeatureSet build_feature_set(const WorldSource& src, int tick, EntityId hero,
                             const RunConfig& cfg) {
  const MapConfig& map = src.map();
  const ArenaParams& ap = cfg.arena;
  const FeatureParams& fp = cfg.features;
  const GridSpec& gs = cfg.grid;
  Grids g{gs, map.side_length, gs.local_m, gs.global_n, gs.local_cell(),
          gs.global_cell(map.side_length)};

  auto now = src.entities_at(tick);
  const FrameEntity* me = find_entity(now, hero);
  if (!me || me->kind != EntityKind::hero) {
    throw std::invalid_argument("build_feature_set: unknown hero id");
  }
  Team team = me->team;
  Team enemy = other_team(team);
  int t1 = std::max(src.first_tick(), tick - fp.history_short);
  int t2 = std::max(src.first_tick(), tick - fp.history_long);
  auto past1 = src.entities_at(t1);
  auto past2 = src.entities_at(t2);

  FeatureDims dims = feature_dims(gs);
  FeatureSet fs;
  fs.vec.assign(static_cast<size_t>(dims.vec_size()), 0.0f);
  fs.local.assign(static_cast<size_t>(dims.local_size()), 0.0f);
  fs.global.assign(static_cast<size_t>(dims.global_size()), 0.0f);

  // --- Vector groups 0..9: hero slots, own team first, ordered by id. ---
  std::vector<const FrameEntity*> own, foes;
  for (const auto& e : now) {
    if (e.kind != EntityKind::hero) continue;
    (e.team == team ? own : foes).push_back(&e);
  }
  auto fill_hero_group = [&](int group, const FrameEntity* h, bool is_ally) {
    float* v = fs.vec.data() + group * kGroupWidth;
    if (!h) return;  // empty roster slot stays zero
    bool vis = is_ally || visible_to_team(map, now, team, *h, ap.vision_radius);
    if (!vis) return;  // invisible enemies contribute zeros, visibility 0
    auto hist = [&](std::span<const FrameEntity> past, int past_tick) -> const FrameEntity* {
      const FrameEntity* p = find_entity(past, h->id);
      if (!p) return h;
      if (!is_ally && !visible_to_team(map, past, team, *p, ap.vision_radius)) {
        return h;  // was hidden then: backfill with the present
      }
      (void)past_tick;
      return p;
    };
    const FrameEntity* h1 = hist(past1, t1);
    const FrameEntity* h2 = hist(past2, t2);
    v[0] = frac(h->hp, h->max_hp);
    v[1] = frac(h1->hp, h1->max_hp);
    v[2] = frac(h2->hp, h2->max_hp);
    const int cds[3] = {ap.skill1.cooldown, ap.skill2.cooldown, ap.skill3.cooldown};
    for (int k = 0; k < 3; ++k) {
      v[3 + k] = frac(static_cast<float>(h->cooldowns[static_cast<size_t>(k)]),
                      static_cast<float>(cds[k]));
    }
    v[6] = frac(static_cast<float>(h->level), static_cast<float>(ap.hero.max_level));
    v[7] = static_cast<float>(h->gold) / fp.gold_norm;
    Vec2 p0 = canon_pos(map, team, h->pos);
    Vec2 p1 = canon_pos(map, team, h1->pos);
    Vec2 p2 = canon_pos(map, team, h2->pos);
    v[8] = p0.x / g.side;
    v[9] = p0.y / g.side;
    v[10] = p1.x / g.side;
    v[11] = p1.y / g.side;
    v[12] = p2.x / g.side;
    v[13] = p2.y / g.side;
    v[14] = h->alive ? 1.0f : 0.0f;
    v[15] = 1.0f;
  };
  for (int i = 0; i < 5; ++i) {
    fill_hero_group(i, i < static_cast<int>(own.size()) ? own[static_cast<size_t>(i)] : nullptr,
                    true);
    fill_hero_group(5 + i,
                    i < static_cast<int>(foes.size()) ? foes[static_cast<size_t>(i)] : nullptr,
                    false);
  }

  // --- Vector group 10: game state + own-hero extras + scene one-hot. ---
  {
    float* v = fs.vec.data() + 10 * kGroupWidth;
    std::array<int, 2> kills = src.hero_kills_through(tick);
    int mi = static_cast<int>(team);
    int ei = static_cast<int>(enemy);
    v[0] = static_cast<float>(kills[static_cast<size_t>(mi)] - kills[static_cast<size_t>(ei)]) /
           fp.kill_diff_norm;
    long own_gold = 0, foe_gold = 0;
    int own_turrets = 0, foe_turrets = 0;
    float own_crystal = 0.0f, foe_crystal = 0.0f;
    for (const auto& e : now) {
      if (e.kind == EntityKind::hero) {
        (e.team == team ? own_gold : foe_gold) += e.gold;
      } else if (e.kind == EntityKind::turret && e.alive) {
        (e.team == team ? own_turrets : foe_turrets) += 1;
      } else if (e.kind == EntityKind::crystal) {
        (e.team == team ? own_crystal : foe_crystal) = frac(e.hp, e.max_hp);
      }
    }
    v[1] = static_cast<float>(own_gold - foe_gold) / fp.gold_norm;
    v[2] = frac(static_cast<float>(tick), static_cast<float>(ap.max_ticks));
    v[3] = static_cast<float>(own_turrets - foe_turrets) / fp.turret_diff_norm;
    v[4] = own_crystal;
    v[5] = foe_crystal;
    v[6] = ap.hero.attack_range / fp.attack_range_norm;
    v[7] = ap.hero.move_speed / fp.move_speed_norm;
    SceneKind scene = causal_scene(src, tick, hero, cfg.dataprep.scene_window, ap.base_radius);
    v[8 + (static_cast<int>(scene) - 1)] = 1.0f;
  }

  // --- Local image. ---
  for (const auto& e : now) {
    if (!e.alive) continue;
    int row, col;
    if (!local_cell(g, team, me->pos, e.pos, &row, &col)) continue;
    bool ally = e.team == team;
    float hpf = frac(e.hp, e.max_hp);
    switch (e.kind) {
      case EntityKind::hero:
        if (ally) {
          add_clamped(fs.local, 0, g.m, row, col, hpf);
        } else if (visible_to_team(map, now, team, e, ap.vision_radius)) {
          add_clamped(fs.local, 1, g.m, row, col, hpf);
        }
        break;
      case EntityKind::minion:
        if (ally) {
          add_clamped(fs.local, 2, g.m, row, col, hpf);
        } else if (visible_to_team(map, now, team, e, ap.vision_radius)) {
          add_clamped(fs.local, 3, g.m, row, col, hpf);
        }
        break;
      case EntityKind::turret:
      case EntityKind::crystal:
        add_clamped(fs.local, ally ? 4 : 5, g.m, row, col, hpf);
        break;
      case EntityKind::monster:
        break;  // monsters appear in the global view only
    }
  }
  // Bush mask and damage field rasterize over cell centers.
  std::vector<SkillArea> areas = collect_active_areas(src, tick, ap);
  int half = g.m / 2;
  for (int row = 0; row < g.m; ++row) {
    for (int col = 0; col < g.m; ++col) {
      Vec2 canon_off{static_cast<float>(col - half) * g.local_cell,
                     static_cast<float>(row - half) * g.local_cell};
      Vec2 world = me->pos + canon_vec(team, canon_off);
      if (bush_index(map, world) >= 0) {
        fs.local[static_cast<size_t>((6 * g.m + row) * g.m + col)] = 1.0f;
      }
      float threat = 0.0f;
      for (const auto& area : areas) {
        if (area_covers(area, world)) threat += area.damage / fp.damage_norm;
      }
      if (threat > 0.0f) {
        fs.local[static_cast<size_t>((7 * g.m + row) * g.m + col)] = std::min(1.0f, threat);
      }
    }
  }

  // --- Global image. ---
  for (const auto& e : now) {
    if (!e.alive) continue;
    int row, col;
    global_cell(g, map, team, e.pos, &row, &col);
    bool ally = e.team == team;
    float hpf = frac(e.hp, e.max_hp);
    switch (e.kind) {
      case EntityKind::hero:
        if (ally) {
          add_clamped(fs.global, 0, g.n, row, col, hpf);
        } else if (visible_to_team(map, now, team, e, ap.vision_radius)) {
          add_clamped(fs.global, 1, g.n, row, col, hpf);
        }
        break;
      case EntityKind::minion:
        if (ally) {
          add_clamped(fs.global, 2, g.n, row, col, 1.0f / fp.minion_count_norm);
        } else if (visible_to_team(map, now, team, e, ap.vision_radius)) {
          add_clamped(fs.global, 3, g.n, row, col, 1.0f / fp.minion_count_norm);
        }
        break;
      case EntityKind::turret:
      case EntityKind::crystal:
        add_clamped(fs.global, ally ? 4 : 5, g.n, row, col, hpf);
        break;
      case EntityKind::monster:
        add_clamped(fs.global, 6, g.n, row, col, 1.0f);
        break;
    }
  }
  // Visibility mask: cell centers within vision radius of a friendly source.
  for (int row = 0; row < g.n; ++row) {
    for (int col = 0; col < g.n; ++col) {
      Vec2 canon_center{(static_cast<float>(col) + 0.5f) * g.global_cell,
                        (static_cast<float>(row) + 0.5f) * g.global_cell};
      Vec2 world = canon_pos(map, team, canon_center);
      for (const auto& e : now) {
        if (!e.alive || e.team != team) continue;
        if (e.kind != EntityKind::hero && e.kind != EntityKind::turret &&
            e.kind != EntityKind::crystal) {
          continue;
        }
        if (dist(e.pos, world) <= ap.vision_radius) {
          fs.global[static_cast<size_t>((7 * g.n + row) * g.n + col)] = 1.0f;
          break;
        }
      }
    }
  }
  return fs;
}

}  // namespace moba
