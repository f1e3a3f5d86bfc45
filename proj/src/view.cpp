#include "moba/view.hpp"

#include <algorithm>

namespace moba {

const FrameEntity* find_entity(std::span<const FrameEntity> entities, EntityId id) {
  for (const auto& e : entities) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

int bush_index(const MapConfig& map, Vec2 p) {
  for (size_t i = 0; i < map.bushes.size(); ++i) {
    if (map.bushes[i].contains(p)) return static_cast<int>(i);
  }
  return -1;
}

bool in_lane_corridor(const MapConfig& map, Vec2 p, int lane) {
  return dist_to_polyline(p, map.lanes[lane]) <= map.lane_halfwidth;
}

bool in_lane_corridor(const MapConfig& map, Vec2 p) {
  for (int lane = 0; lane < 3; ++lane) {
    if (in_lane_corridor(map, p, lane)) return true;
  }
  return false;
}

bool in_jungle_area(const MapConfig& map, float base_radius, Vec2 p) {
  if (in_lane_corridor(map, p)) return false;
  if (dist(p, map.base_pos[0]) <= base_radius) return false;
  if (dist(p, map.base_pos[1]) <= base_radius) return false;
  return true;
}

bool visible_to_team(const MapConfig& map, std::span<const FrameEntity> entities, Team team,
                     const FrameEntity& target, float vision_radius) {
  if (!target.alive) return false;
  if (target.team == team) return true;
  int target_bush = bush_index(map, target.pos);
  for (const auto& src : entities) {
    if (src.team != team || !src.alive) continue;
    if (src.kind != EntityKind::hero && src.kind != EntityKind::turret &&
        src.kind != EntityKind::crystal) {
      continue;
    }
    if (dist(src.pos, target.pos) > vision_radius) continue;
    if (target_bush >= 0 && bush_index(map, src.pos) != target_bush) continue;
    return true;
  }
  return false;
}

std::vector<EntityId> build_target_slots(const MapConfig& map,
                                         std::span<const FrameEntity> entities, EntityId viewer,
                                         float targeting_radius, float vision_radius) {
  const FrameEntity* me = find_entity(entities, viewer);
  std::vector<EntityId> slots;
  if (!me || !me->alive) return slots;
  struct Cand {
    float d;
    EntityId id;
  };
  std::vector<Cand> cands;
  for (const auto& e : entities) {
    if (!e.alive || e.id == viewer || e.team == me->team) continue;
    float d = dist(e.pos, me->pos);
    if (d > targeting_radius) continue;
    if (!visible_to_team(map, entities, me->team, e, vision_radius)) continue;
    cands.push_back({d, e.id});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return a.d != b.d ? a.d < b.d : a.id < b.id;
  });
  for (const auto& c : cands) {
    if (slots.size() >= kNumTargetSlots) break;
    slots.push_back(c.id);
  }
  return slots;
}

bool area_covers(const SkillArea& area, Vec2 p) {
  if (area.skill == 1) return in_capsule(p, area.a, area.b, area.halfwidth);
  return dist(p, area.a) <= area.halfwidth;
}

std::vector<SkillArea> collect_active_areas(const WorldSource& src, int tick,
                                            const ArenaParams& params) {
  std::vector<SkillArea> areas;
  int lo = std::max(src.first_tick(), tick - params.skill_area_ttl + 1);
  if (tick < src.first_tick()) return areas;
  for (const auto& ev : src.events_between(lo, tick)) {
    if (ev.kind != EventKind::cast) continue;
    auto frame = src.entities_at(static_cast<int>(ev.tick));
    const FrameEntity* actor = find_entity(frame, ev.actor);
    if (!actor) continue;
    SkillArea area;
    area.skill = ev.aux;
    area.damage = ev.amount;
    switch (ev.aux) {
      case 1:
        area.a = actor->pos;
        area.b = ev.pos;
        area.halfwidth = params.skill1.width;
        break;
      case 2: {
        const FrameEntity* tgt = ev.has_target ? find_entity(frame, ev.target) : nullptr;
        area.a = tgt ? tgt->pos : ev.pos;
        area.halfwidth = params.skill2.width;
        break;
      }
      case 3:
        area.a = ev.pos;
        area.halfwidth = params.skill3.width;
        break;
      default:
        continue;
    }
    areas.push_back(area);
  }
  return areas;
}

SceneKind causal_scene(const WorldSource& src, int tick, EntityId hero, int scene_window,
                       float base_radius) {
  tick = std::clamp(tick, src.first_tick(), src.last_tick());
  auto cur = src.entities_at(tick);
  const FrameEntity* me = find_entity(cur, hero);
  if (!me) return SceneKind::navigation;
  const MapConfig& map = src.map();

  bool returning = me->channel_left > 0;
  if (!returning && tick > src.first_tick()) {
    const FrameEntity* prev = find_entity(src.entities_at(tick - 1), hero);
    if (prev && prev->channel_left == 1 && me->channel_left == 0 && me->alive &&
        me->pos == map.base_pos[static_cast<int>(me->team)]) {
      returning = true;  // arrival tick
    }
  }

  bool push = false, combat = false, lane_attack = false, jungle_attack = false;
  int lo = std::max(src.first_tick(), tick - scene_window + 1);
  for (const auto& ev : src.events_between(lo, tick)) {
    if (ev.kind == EventKind::attack && ev.actor == hero && ev.has_target) {
      const FrameEntity* tgt = find_entity(src.entities_at(static_cast<int>(ev.tick)), ev.target);
      if (!tgt) continue;
      bool enemy = tgt->team != me->team;
      if (enemy && (tgt->kind == EntityKind::turret || tgt->kind == EntityKind::crystal)) push = true;
      if (enemy && tgt->kind == EntityKind::minion) lane_attack = true;
      if (tgt->kind == EntityKind::monster) jungle_attack = true;
    } else if (ev.kind == EventKind::damage && ev.has_target) {
      if (ev.actor == hero) {
        const FrameEntity* tgt = find_entity(src.entities_at(static_cast<int>(ev.tick)), ev.target);
        if (tgt && tgt->kind == EntityKind::hero && tgt->team != me->team) combat = true;
      } else if (ev.target == hero) {
        const FrameEntity* actor = find_entity(src.entities_at(static_cast<int>(ev.tick)), ev.actor);
        if (actor && actor->kind == EntityKind::hero && actor->team != me->team) combat = true;
      }
    }
  }

  if (push) return SceneKind::push_turret;
  if (combat) return SceneKind::combat;
  if (lane_attack && in_lane_corridor(map, me->pos)) return SceneKind::lane_farm;
  if (jungle_attack && in_jungle_area(map, base_radius, me->pos)) return SceneKind::jungle_farm;
  if (returning) return SceneKind::return_base;
  return SceneKind::navigation;
}

}  // namespace moba
