#include "moba/arena.hpp"

#include <algorithm>
#include <cmath>

namespace moba {

namespace {

// Must span the scene window (90) + feature history (30) + agent delays.
constexpr int kFrameRingCapacity = 160;

float hero_max_hp(const HeroParams& h, int level) {
  return h.base_hp + h.hp_per_level * static_cast<float>(level);
}

float hero_damage(const HeroParams& h, int level) {
  return h.base_damage + h.damage_per_level * static_cast<float>(level);
}

float skill_damage(const SkillParams& sk, int level) {
  return sk.damage_base + sk.damage_per_level * static_cast<float>(level);
}

void emit(GameState& s, EventKind kind, EntityId actor, EntityId target, float amount,
          uint8_t aux = 0) {
  GameEvent ev;
  ev.tick = s.tick;
  ev.kind = kind;
  ev.actor = actor;
  ev.has_target = 1;
  ev.target = target;
  ev.amount = amount;
  ev.aux = aux;
  s.pending_events.push_back(ev);
}

void emit_at(GameState& s, EventKind kind, EntityId actor, Vec2 pos, float amount,
             uint8_t aux = 0) {
  GameEvent ev;
  ev.tick = s.tick;
  ev.kind = kind;
  ev.actor = actor;
  ev.has_target = 0;
  ev.pos = pos;
  ev.amount = amount;
  ev.aux = aux;
  s.pending_events.push_back(ev);
}

void grant_kill_rewards(GameState& s, EntityState* killer, EntityState& victim) {
  const RewardParams& rw = s.params->rewards;
  uint32_t gold = 0;
  int xp = 0;
  switch (victim.kind) {
    case EntityKind::minion: gold = rw.gold_minion; xp = rw.xp_minion; break;
    case EntityKind::monster: gold = rw.gold_monster; xp = rw.xp_monster; break;
    case EntityKind::hero: gold = rw.gold_hero; xp = rw.xp_hero; break;
    case EntityKind::turret: gold = rw.gold_turret; xp = rw.xp_turret; break;
    case EntityKind::crystal: break;
  }
  uint32_t granted = 0;
  if (killer && killer->kind == EntityKind::hero && killer->alive) {
    killer->gold += gold;
    granted = gold;
    killer->xp += xp;
    const HeroParams& h = s.params->hero;
    int new_level = std::min(h.max_level, 1 + killer->xp / std::max(1, h.xp_per_level));
    if (new_level > killer->level) {
      float gained = h.hp_per_level * static_cast<float>(new_level - killer->level);
      killer->level = static_cast<uint8_t>(new_level);
      killer->max_hp = hero_max_hp(h, new_level);
      killer->hp = std::min(killer->hp + gained, killer->max_hp);
    }
  }
  EventKind kind =
      victim.kind == EntityKind::turret ? EventKind::turret_destroyed : EventKind::kill;
  emit(s, kind, killer ? killer->id : 0, victim.id, static_cast<float>(granted));
  if (victim.kind == EntityKind::hero && killer && killer->team != victim.team &&
      killer->team != Team::neutral) {
    s.hero_kills[static_cast<int>(killer->team)] += 1;
  }
}

void on_death(GameState& s, EntityState* killer, EntityState& victim) {
  victim.hp = 0.0f;
  victim.alive = 0;
  victim.channel_left = 0;
  grant_kill_rewards(s, killer, victim);
  const ArenaParams& p = *s.params;
  switch (victim.kind) {
    case EntityKind::hero:
      victim.respawn_at =
          s.tick + p.hero.respawn_base + p.hero.respawn_per_level * victim.level;
      break;
    case EntityKind::minion:
      victim.purge = true;
      break;
    case EntityKind::monster: {
      int camp = static_cast<int>(victim.id - kFirstMonsterId);
      int respawn = p.monster.respawn_ticks;
      if (camp >= 0 && camp < static_cast<int>(s.map->jungle_camps.size())) {
        respawn = s.map->jungle_camps[camp].respawn_ticks;
      }
      victim.respawn_at = s.tick + respawn;
      break;
    }
    case EntityKind::turret:
      break;  // stays destroyed
    case EntityKind::crystal:
      if (s.result == GameResult::ongoing) {
        s.result = victim.team == Team::blue ? GameResult::red_win : GameResult::blue_win;
      }
      break;
  }
}

void apply_damage(GameState& s, EntityState& actor, EntityState& victim, float amount) {
  if (!victim.alive || amount <= 0.0f) return;
  victim.channel_left = 0;  // any received damage interrupts a return channel
  victim.hp -= amount;
  emit(s, EventKind::damage, actor.id, victim.id, amount);
  if (victim.hp <= 0.0f) on_death(s, &actor, victim);
}

void clamp_to_map(const MapConfig& map, Vec2& p) {
  p.x = std::clamp(p.x, 0.0f, map.side_length);
  p.y = std::clamp(p.y, 0.0f, map.side_length);
}

void move_toward(GameState& s, EntityState& e, Vec2 target, float speed_per_tick) {
  Vec2 d = target - e.pos;
  float len = length(d);
  if (len <= speed_per_tick) {
    e.pos = target;
  } else {
    e.pos = e.pos + d * (speed_per_tick / len);
  }
  clamp_to_map(*s.map, e.pos);
}

Vec2 skill3_target(const ArenaParams& p, Vec2 origin, int cell) {
  int m = p.skill3_grid;
  int half = m / 2;
  int row = cell / m;
  int col = cell % m;
  Vec2 offset{static_cast<float>(col - half) * p.skill3_cell,
              static_cast<float>(row - half) * p.skill3_cell};
  return origin + offset;
}

bool skill_can_hit(const EntityState& e, Team caster_team) {
  if (!e.alive || e.team == caster_team) return false;
  return e.kind == EntityKind::hero || e.kind == EntityKind::minion ||
         e.kind == EntityKind::monster;
}

void apply_hero_action(GameState& s, EntityState& hero, const HeroAction& action,
                       EntityId resolved_target) {
  const ArenaParams& p = *s.params;
  float tps = static_cast<float>(p.ticks_per_second);
  float step_dist = p.hero.move_speed / tps;
  switch (action.level1) {
    case Level1::move: {
      hero.channel_left = 0;
      Vec2 dir = direction_bin_center(action.level2 % kNumMoveBins);
      hero.pos = hero.pos + dir * step_dist;
      clamp_to_map(*s.map, hero.pos);
      break;
    }
    case Level1::normal_attack: {
      hero.channel_left = 0;
      EntityState* tgt = s.find(resolved_target);
      if (!tgt || !tgt->alive) break;
      float d = dist(hero.pos, tgt->pos);
      if (d > p.hero.attack_range) {
        move_toward(s, hero, tgt->pos, step_dist);  // attack-move
      } else if (hero.attack_cd == 0) {
        emit(s, EventKind::attack, hero.id, tgt->id, 0.0f);
        apply_damage(s, hero, *tgt, hero_damage(p.hero, hero.level));
        hero.attack_cd = p.hero.attack_cooldown;
      }
      break;
    }
    case Level1::skill1: {
      hero.channel_left = 0;
      if (hero.cooldowns[0] != 0) break;
      Vec2 dir = direction_bin_center(action.level2 % kNumMoveBins);
      Vec2 end = hero.pos + dir * p.skill1.reach;
      float dmg = skill_damage(p.skill1, hero.level);
      hero.cooldowns[0] = static_cast<uint16_t>(p.skill1.cooldown);
      emit_at(s, EventKind::cast, hero.id, end, dmg, 1);
      for (auto& e : s.entities) {
        if (skill_can_hit(e, hero.team) && in_capsule(e.pos, hero.pos, end, p.skill1.width)) {
          apply_damage(s, hero, e, dmg);
        }
      }
      break;
    }
    case Level1::skill2: {
      hero.channel_left = 0;
      if (hero.cooldowns[1] != 0) break;
      EntityState* tgt = s.find(resolved_target);
      if (!tgt || !tgt->alive || dist(hero.pos, tgt->pos) > p.skill2.reach) break;
      float dmg = skill_damage(p.skill2, hero.level);
      hero.cooldowns[1] = static_cast<uint16_t>(p.skill2.cooldown);
      emit(s, EventKind::cast, hero.id, tgt->id, dmg, 2);
      apply_damage(s, hero, *tgt, dmg);
      break;
    }
    case Level1::skill3: {
      hero.channel_left = 0;
      if (hero.cooldowns[2] != 0) break;
      Vec2 target = skill3_target(p, hero.pos, action.level2 % (p.skill3_grid * p.skill3_grid));
      clamp_to_map(*s.map, target);
      float dmg = skill_damage(p.skill3, hero.level);
      hero.cooldowns[2] = static_cast<uint16_t>(p.skill3.cooldown);
      emit_at(s, EventKind::cast, hero.id, target, dmg, 3);
      for (auto& e : s.entities) {
        if (skill_can_hit(e, hero.team) && dist(e.pos, target) <= p.skill3.width) {
          apply_damage(s, hero, e, dmg);
        }
      }
      break;
    }
    case Level1::return_base:
      if (hero.channel_left == 0) {
        hero.channel_left = static_cast<uint8_t>(p.return_channel_ticks);
      }
      break;
    case Level1::idle:
      break;
  }
}

void step_minion(GameState& s, EntityState& m, std::span<const FrameEntity> frame) {
  const ArenaParams& p = *s.params;
  float tps = static_cast<float>(p.ticks_per_second);
  float step_dist = p.minion.move_speed / tps;

  // Nearest visible enemy in aggro range; structures included so waves siege.
  EntityState* target = nullptr;
  float best = p.minion.aggro_radius;
  for (auto& e : s.entities) {
    if (!e.alive || e.team == m.team || e.team == Team::neutral) continue;
    float d = dist(e.pos, m.pos);
    if (d > best) continue;
    const FrameEntity* fe = find_entity(frame, e.id);
    if (!fe || !visible_to_team(*s.map, frame, m.team, *fe, p.vision_radius)) continue;
    best = d;
    target = &e;
  }
  if (target) {
    float d = dist(target->pos, m.pos);
    if (d <= p.minion.range) {
      if (m.attack_cd == 0) {
        emit(s, EventKind::attack, m.id, target->id, 0.0f);
        apply_damage(s, m, *target, p.minion.damage);
        m.attack_cd = p.minion.attack_cooldown;
      }
    } else {
      move_toward(s, m, target->pos, step_dist);
    }
    return;
  }
  const auto& lane = s.map->lanes[m.lane];
  float total = polyline_length(lane);
  Vec2 lane_pos = point_along_polyline(
      lane, m.team == Team::blue ? m.lane_progress : total - m.lane_progress);
  if (dist(m.pos, lane_pos) > 0.5f) {
    move_toward(s, m, lane_pos, step_dist);  // walk back to the lane after a chase
  } else {
    m.lane_progress = std::min(m.lane_progress + step_dist, total);
    m.pos = point_along_polyline(lane,
                                 m.team == Team::blue ? m.lane_progress : total - m.lane_progress);
  }
}

void step_turret(GameState& s, EntityState& t, std::span<const FrameEntity> frame) {
  const ArenaParams& p = *s.params;
  if (t.attack_cd != 0) return;
  EntityState* target = nullptr;
  float best = p.turret.range;
  for (auto& e : s.entities) {
    if (!e.alive || e.team == t.team || e.team == Team::neutral) continue;
    if (e.kind != EntityKind::hero && e.kind != EntityKind::minion) continue;
    float d = dist(e.pos, t.pos);
    if (d > best) continue;
    const FrameEntity* fe = find_entity(frame, e.id);
    if (!fe || !visible_to_team(*s.map, frame, t.team, *fe, p.vision_radius)) continue;
    best = d;
    target = &e;
  }
  if (target) {
    emit(s, EventKind::attack, t.id, target->id, 0.0f);
    apply_damage(s, t, *target, p.turret.damage);
    t.attack_cd = p.turret.attack_cooldown;
  }
}

void step_monster(GameState& s, EntityState& mo) {
  const ArenaParams& p = *s.params;
  if (mo.attack_cd != 0) return;
  EntityState* target = nullptr;
  float best = p.monster.range;
  for (auto& e : s.entities) {
    if (!e.alive || e.kind != EntityKind::hero) continue;
    float d = dist(e.pos, mo.pos);
    if (d > best) continue;
    best = d;
    target = &e;
  }
  if (target) {
    emit(s, EventKind::attack, mo.id, target->id, 0.0f);
    apply_damage(s, mo, *target, p.monster.damage);
    mo.attack_cd = p.monster.attack_cooldown;
  }
}

void spawn_wave(GameState& s) {
  const ArenaParams& p = *s.params;
  for (int team = 0; team < 2; ++team) {
    for (int lane = 0; lane < 3; ++lane) {
      for (int j = 0; j < p.minion.wave_size; ++j) {
        EntityState m;
        m.id = s.next_minion_id++;
        m.kind = EntityKind::minion;
        m.team = static_cast<Team>(team);
        m.hp = m.max_hp = p.minion.hp;
        m.lane = static_cast<uint8_t>(lane);
        m.lane_progress = 2.0f + static_cast<float>(p.minion.wave_size - 1 - j) * 1.6f;
        const auto& path = s.map->lanes[lane];
        float total = polyline_length(path);
        m.pos = point_along_polyline(
            path, m.team == Team::blue ? m.lane_progress : total - m.lane_progress);
        s.entities.push_back(m);
      }
    }
  }
}

}  // namespace

EntityState* GameState::find(EntityId id) {
  for (auto& e : entities) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

const EntityState* GameState::find(EntityId id) const {
  for (const auto& e : entities) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

std::vector<FrameEntity> GameState::to_frame() const {
  std::vector<FrameEntity> out;
  out.reserve(entities.size());
  for (const auto& e : entities) out.push_back(static_cast<const FrameEntity&>(e));
  return out;
}

int GameState::hero_lane(EntityId id) const {
  int idx = static_cast<int>(id) - 1;
  if (idx >= blue_heroes) idx -= blue_heroes;
  return idx % 3;
}

GameState init_game(const MapConfig& map, const ArenaParams& params, Rosters rosters,
                    uint64_t seed) {
  if (rosters.blue < 1 || rosters.blue > 5 || rosters.red < 1 || rosters.red > 5) {
    throw ArenaError("roster size must be 1..5 per team");
  }
  // Configured static positions must not coincide.
  std::vector<Vec2> fixed;
  fixed.push_back(map.base_pos[0]);
  fixed.push_back(map.base_pos[1]);
  for (int t = 0; t < 2; ++t)
    for (int l = 0; l < 3; ++l)
      for (int sl = 0; sl < 2; ++sl) fixed.push_back(map.turret_pos[t][l][sl]);
  for (const auto& c : map.jungle_camps) fixed.push_back(c.pos);
  for (size_t i = 0; i < fixed.size(); ++i)
    for (size_t j = i + 1; j < fixed.size(); ++j)
      if (dist(fixed[i], fixed[j]) < 1e-3f) throw ArenaError("overlapping configured positions");

  GameState s;
  s.map = &map;
  s.params = &params;
  s.seed = seed;
  s.rng = Rng(seed);
  s.blue_heroes = rosters.blue;
  s.red_heroes = rosters.red;

  EntityId id = 1;
  for (int team = 0; team < 2; ++team) {
    int count = team == 0 ? rosters.blue : rosters.red;
    for (int i = 0; i < count; ++i) {
      EntityState h;
      h.id = id++;
      h.kind = EntityKind::hero;
      h.team = static_cast<Team>(team);
      h.level = 1;
      h.max_hp = hero_max_hp(params.hero, 1);
      h.hp = h.max_hp;
      h.pos = map.base_pos[team];
      h.lane = static_cast<uint8_t>(i % 3);
      s.entities.push_back(h);
    }
  }
  for (int team = 0; team < 2; ++team) {
    for (int lane = 0; lane < 3; ++lane) {
      for (int slot = 0; slot < 2; ++slot) {
        EntityState t;
        t.id = kFirstTurretId + static_cast<EntityId>(team * 6 + lane * 2 + slot);
        t.kind = EntityKind::turret;
        t.team = static_cast<Team>(team);
        t.hp = t.max_hp = params.turret.hp;
        t.pos = map.turret_pos[team][lane][slot];
        s.entities.push_back(t);
      }
    }
  }
  for (int team = 0; team < 2; ++team) {
    EntityState c;
    c.id = team == 0 ? kBlueCrystalId : kRedCrystalId;
    c.kind = EntityKind::crystal;
    c.team = static_cast<Team>(team);
    c.hp = c.max_hp = params.crystal_hp;
    c.pos = map.base_pos[team];
    s.entities.push_back(c);
  }
  for (size_t i = 0; i < map.jungle_camps.size(); ++i) {
    EntityState m;
    m.id = kFirstMonsterId + static_cast<EntityId>(i);
    m.kind = EntityKind::monster;
    m.team = Team::neutral;
    m.hp = m.max_hp = params.monster.hp;
    m.pos = map.jungle_camps[i].pos;
    s.entities.push_back(m);
  }
  return s;
}

void step(GameState& s, const ActionSet& actions) {
  if (s.result != GameResult::ongoing) throw ArenaError("cannot step a finished game");
  const ArenaParams& p = *s.params;
  s.pending_events.clear();
  std::erase_if(s.entities, [](const EntityState& e) { return e.purge; });
  s.tick += 1;

  for (auto& e : s.entities) {
    if (e.attack_cd > 0) e.attack_cd -= 1;
    if (e.kind == EntityKind::hero) {
      for (auto& cd : e.cooldowns) {
        if (cd > 0) cd -= 1;
      }
    }
  }

  // Return channels tick down before actions, so a channel issued this step
  // shows its full duration in this frame and completes exactly
  // return_channel_ticks steps later.
  for (auto& e : s.entities) {
    if (e.kind != EntityKind::hero || !e.alive || e.channel_left == 0) continue;
    e.channel_left -= 1;
    if (e.channel_left == 0) {
      e.pos = s.map->base_pos[static_cast<int>(e.team)];
      e.hp = e.max_hp;
    }
  }

  // Targets resolve against the state the policies observed (the previous
  // frame), so slot indices cannot drift while earlier heroes act.
  std::vector<FrameEntity> pre = s.to_frame();
  int hero_count = s.blue_heroes + s.red_heroes;
  std::vector<const HeroAction*> per_hero(static_cast<size_t>(hero_count), nullptr);
  for (const auto& [id, action] : actions) {
    if (id >= 1 && id <= static_cast<EntityId>(hero_count)) per_hero[id - 1] = &action;
  }
  std::vector<EntityId> resolved(static_cast<size_t>(hero_count), 0);
  for (int i = 0; i < hero_count; ++i) {
    const HeroAction* a = per_hero[i];
    if (!a) continue;
    if (a->level1 == Level1::normal_attack || a->level1 == Level1::skill2) {
      auto slots = build_target_slots(*s.map, pre, static_cast<EntityId>(i + 1),
                                      p.targeting_radius, p.vision_radius);
      if (a->level2 < slots.size()) resolved[i] = slots[a->level2];
    }
  }
  // First-strike advantage alternates with tick parity so neither side gets a
  // systematic within-tick edge in even trades.
  bool reversed = (s.tick & 1u) != 0;
  auto hero_at = [&](int i) { return reversed ? hero_count - 1 - i : i; };
  for (int i = 0; i < hero_count; ++i) {
    int h = hero_at(i);
    if (!per_hero[h]) continue;
    EntityState* hero = s.find(static_cast<EntityId>(h + 1));
    if (!hero || !hero->alive) continue;  // dead heroes' actions are ignored
    apply_hero_action(s, *hero, *per_hero[h], resolved[h]);
  }

  std::vector<FrameEntity> mid = s.to_frame();
  auto phase = [&](EntityKind kind, auto&& fn) {
    size_t n = s.entities.size();
    for (size_t j = 0; j < n; ++j) {
      EntityState& e = s.entities[reversed ? n - 1 - j : j];
      if (e.kind == kind && e.alive) fn(e);
    }
  };
  phase(EntityKind::minion, [&](EntityState& e) { step_minion(s, e, mid); });
  phase(EntityKind::turret, [&](EntityState& e) { step_turret(s, e, mid); });
  phase(EntityKind::monster, [&](EntityState& e) { step_monster(s, e); });

  for (auto& e : s.entities) {
    if (!e.alive && e.respawn_at == s.tick) {
      e.alive = 1;
      e.respawn_at = kNoTick;
      e.hp = e.max_hp;
      e.attack_cd = 0;
      if (e.kind == EntityKind::hero) {
        e.pos = s.map->base_pos[static_cast<int>(e.team)];
        e.cooldowns = {0, 0, 0};
        e.channel_left = 0;
      } else if (e.kind == EntityKind::monster) {
        int camp = static_cast<int>(e.id - kFirstMonsterId);
        e.pos = s.map->jungle_camps[camp].pos;
      }
    }
  }

  int first = p.minion.wave_first_tick;
  if (s.tick >= static_cast<uint32_t>(first) &&
      (s.tick - static_cast<uint32_t>(first)) % static_cast<uint32_t>(p.minion.wave_period) == 0) {
    spawn_wave(s);
  }

  if (s.result == GameResult::ongoing && s.tick >= static_cast<uint32_t>(p.max_ticks)) {
    const EntityState* bc = s.find(kBlueCrystalId);
    const EntityState* rc = s.find(kRedCrystalId);
    float bhp = bc ? bc->hp : 0.0f;
    float rhp = rc ? rc->hp : 0.0f;
    if (bhp != rhp) {
      s.result = bhp > rhp ? GameResult::blue_win : GameResult::red_win;
    } else {
      uint64_t bgold = 0, rgold = 0;
      for (const auto& e : s.entities) {
        if (e.kind != EntityKind::hero) continue;
        (e.team == Team::blue ? bgold : rgold) += e.gold;
      }
      if (bgold != rgold) {
        s.result = bgold > rgold ? GameResult::blue_win : GameResult::red_win;
      } else {
        s.result = GameResult::tie;
      }
    }
  }

  s.frame_ring.push_back(s.to_frame());
  s.kills_ring.push_back(s.hero_kills);
  if (s.frame_ring.size() > kFrameRingCapacity) {
    s.frame_ring.pop_front();
    s.kills_ring.pop_front();
    s.ring_base += 1;
  }
  s.recent_events.insert(s.recent_events.end(), s.pending_events.begin(), s.pending_events.end());
  if (!s.recent_events.empty() && s.tick > static_cast<uint32_t>(kFrameRingCapacity) + 8) {
    uint32_t cutoff = s.tick - kFrameRingCapacity;
    size_t keep_from = 0;
    while (keep_from < s.recent_events.size() && s.recent_events[keep_from].tick < cutoff) {
      ++keep_from;
    }
    if (keep_from > 0) {
      s.recent_events.erase(s.recent_events.begin(),
                            s.recent_events.begin() + static_cast<ptrdiff_t>(keep_from));
    }
  }
}

std::span<const FrameEntity> LiveSource::entities_at(int tick) const {
  int lo = first_tick();
  int hi = last_tick();
  tick = std::clamp(tick, lo, hi);
  const auto& frame = s_.frame_ring[static_cast<size_t>(tick - lo)];
  return {frame.data(), frame.size()};
}

std::span<const GameEvent> LiveSource::events_between(int lo, int hi) const {
  const auto& ev = s_.recent_events;
  auto begin = std::lower_bound(ev.begin(), ev.end(), lo, [](const GameEvent& e, int t) {
    return static_cast<int>(e.tick) < t;
  });
  auto end = std::upper_bound(ev.begin(), ev.end(), hi, [](int t, const GameEvent& e) {
    return t < static_cast<int>(e.tick);
  });
  if (begin >= end) return {};
  return {&*begin, static_cast<size_t>(end - begin)};
}

std::array<int, 2> LiveSource::hero_kills_through(int tick) const {
  int lo = first_tick();
  int hi = last_tick();
  if (s_.kills_ring.empty()) return {0, 0};
  tick = std::clamp(tick, lo, hi);
  return s_.kills_ring[static_cast<size_t>(tick - lo)];
}

// ---------------------------------------------------------------------------
// Scripted policies
// ---------------------------------------------------------------------------

namespace {

struct PolicyContext {
  GameState& s;
  std::vector<FrameEntity> frame;
  const EntityState* me;
  std::vector<EntityId> slots;

  int slot_of(EntityId id) const {
    for (size_t i = 0; i < slots.size(); ++i) {
      if (slots[i] == id) return static_cast<int>(i);
    }
    return -1;
  }
  bool sees(const EntityState& e) const {
    return visible_to_team(*s.map, {frame.data(), frame.size()}, me->team,
                           static_cast<const FrameEntity&>(e), s.params->vision_radius);
  }
};

int bin_toward(Vec2 from, Vec2 to) { return direction_to_bin(to - from); }

int skill3_cell_for(const ArenaParams& p, Vec2 origin, Vec2 target) {
  int m = p.skill3_grid;
  int half = m / 2;
  Vec2 off = target - origin;
  int col = std::clamp(half + static_cast<int>(std::floor(off.x / p.skill3_cell + 0.5f)), 0, m - 1);
  int row = std::clamp(half + static_cast<int>(std::floor(off.y / p.skill3_cell + 0.5f)), 0, m - 1);
  return row * m + col;
}

// Burst rotation against a chosen victim: strongest ready skill, else basic
// attack (which walks into range by itself).
HeroAction engage(const PolicyContext& ctx, const EntityState& target) {
  const ArenaParams& p = *ctx.s.params;
  const EntityState& me = *ctx.me;
  float d = dist(me.pos, target.pos);
  int slot = ctx.slot_of(target.id);
  if (me.cooldowns[1] == 0 && slot >= 0 && d <= p.skill2.reach) {
    return {Level1::skill2, static_cast<uint16_t>(slot)};
  }
  if (me.cooldowns[0] == 0 && d <= p.skill1.reach) {
    int bin = bin_toward(me.pos, target.pos);
    Vec2 end = me.pos + direction_bin_center(bin) * p.skill1.reach;
    if (in_capsule(target.pos, me.pos, end, p.skill1.width)) {
      return {Level1::skill1, static_cast<uint16_t>(bin)};
    }
  }
  if (me.cooldowns[2] == 0 && d <= 5.0f) {
    return {Level1::skill3, static_cast<uint16_t>(skill3_cell_for(p, me.pos, target.pos))};
  }
  if (slot >= 0) return {Level1::normal_attack, static_cast<uint16_t>(slot)};
  return {Level1::move, static_cast<uint16_t>(bin_toward(me.pos, target.pos))};
}

HeroAction rule_based_policy(GameState& s, EntityId hero, bool full_stack) {
  const ArenaParams& p = *s.params;
  PolicyContext ctx{s, s.to_frame(), s.find(hero), {}};
  const EntityState& me = *ctx.me;
  ctx.slots = build_target_slots(*s.map, {ctx.frame.data(), ctx.frame.size()}, hero,
                                 p.targeting_radius, p.vision_radius);

  std::vector<const EntityState*> enemy_heroes;
  for (const auto& e : s.entities) {
    if (e.kind == EntityKind::hero && e.alive && e.team != me.team && ctx.sees(e)) {
      enemy_heroes.push_back(&e);
    }
  }
  auto nearest_enemy_hero = [&]() -> const EntityState* {
    const EntityState* best = nullptr;
    float bd = 1e9f;
    for (const auto* e : enemy_heroes) {
      float d = dist(e->pos, me.pos);
      if (d < bd) {
        bd = d;
        best = e;
      }
    }
    return best;
  };

  // 1. Retreat when low: kite the chaser with the line skill, break vision in
  // a bush when one is close, otherwise run, and channel home once clear.
  if (full_stack && me.hp < 0.25f * me.max_hp) {
    const EntityState* threat = nearest_enemy_hero();
    if (threat && dist(threat->pos, me.pos) <= 8.0f) {
      int my_bush = bush_index(*s.map, me.pos);
      if (my_bush >= 0 && bush_index(*s.map, threat->pos) != my_bush) {
        return {Level1::idle, 0};  // hidden; the chaser has lost vision
      }
      if (me.cooldowns[0] == 0) {
        int bin = bin_toward(me.pos, threat->pos);
        Vec2 end = me.pos + direction_bin_center(bin) * p.skill1.reach;
        if (in_capsule(threat->pos, me.pos, end, p.skill1.width)) {
          return {Level1::skill1, static_cast<uint16_t>(bin)};
        }
      }
      // Juke into the nearest bush that does not lead into the chaser.
      const Rect* best_bush = nullptr;
      float best_d = 15.0f;
      for (const auto& b : s.map->bushes) {
        Vec2 center{(b.x0 + b.x1) * 0.5f, (b.y0 + b.y1) * 0.5f};
        float d = dist(center, me.pos);
        if (d < best_d && dist(center, threat->pos) > dist(me.pos, threat->pos)) {
          best_d = d;
          best_bush = &b;
        }
      }
      if (best_bush) {
        Vec2 center{(best_bush->x0 + best_bush->x1) * 0.5f,
                    (best_bush->y0 + best_bush->y1) * 0.5f};
        return {Level1::move, static_cast<uint16_t>(bin_toward(me.pos, center))};
      }
      return {Level1::move, static_cast<uint16_t>(direction_to_bin(me.pos - threat->pos))};
    }
    return {Level1::return_base, 0};
  }

  // 2. Take a winnable hero fight: lowest-hp visible enemy hero nearby.
  {
    const EntityState* victim = nullptr;
    for (const auto* e : enemy_heroes) {
      if (dist(e->pos, me.pos) > 6.0f) continue;
      if (!victim || e->hp < victim->hp) victim = e;
    }
    if (victim && (victim->hp <= me.hp || victim->hp < 0.35f * victim->max_hp)) {
      return engage(ctx, *victim);
    }
  }

  bool enemy_hero_near = false;
  for (const auto* e : enemy_heroes) {
    if (dist(e->pos, me.pos) <= 10.0f) enemy_hero_near = true;
  }

  // 3. Push a structure already in attack range when it is safe to do so.
  if (!enemy_hero_near) {
    for (const auto& e : s.entities) {
      if (!e.alive || e.team == me.team || e.team == Team::neutral) continue;
      if (e.kind != EntityKind::turret && e.kind != EntityKind::crystal) continue;
      if (dist(e.pos, me.pos) > p.hero.attack_range) continue;
      bool minion_screen = false;
      for (const auto& m : s.entities) {
        if (m.kind == EntityKind::minion && m.alive && m.team == me.team &&
            dist(m.pos, e.pos) <= p.turret.range + 1.0f) {
          minion_screen = true;
        }
      }
      if (me.hp > 0.6f * me.max_hp || minion_screen) {
        int slot = ctx.slot_of(e.id);
        if (slot >= 0) return {Level1::normal_attack, static_cast<uint16_t>(slot)};
      }
    }
  }

  int lane = s.hero_lane(hero);

  // 4. Farm the assigned lane's wave.
  {
    std::vector<const EntityState*> wave;
    for (const auto& e : s.entities) {
      if (e.kind != EntityKind::minion || !e.alive || e.team == me.team) continue;
      if (!in_lane_corridor(*s.map, e.pos, lane)) continue;
      if (dist(e.pos, me.pos) > 8.0f) continue;
      if (!ctx.sees(e)) continue;
      wave.push_back(&e);
    }
    if (!wave.empty()) {
      if (me.cooldowns[0] == 0 && wave.size() >= 2) {
        int bin = bin_toward(me.pos, wave[0]->pos);
        Vec2 end = me.pos + direction_bin_center(bin) * p.skill1.reach;
        int hits = 0;
        for (const auto* m : wave) {
          if (in_capsule(m->pos, me.pos, end, p.skill1.width)) ++hits;
        }
        if (hits >= 2) return {Level1::skill1, static_cast<uint16_t>(bin)};
      }
      const EntityState* last_hit = wave[0];
      for (const auto* m : wave) {
        if (m->hp < last_hit->hp) last_hit = m;
      }
      int slot = ctx.slot_of(last_hit->id);
      if (slot >= 0) return {Level1::normal_attack, static_cast<uint16_t>(slot)};
      return {Level1::move, static_cast<uint16_t>(bin_toward(me.pos, last_hit->pos))};
    }
  }

  // 5. Jungle between waves.
  {
    bool wave_near = false;
    for (const auto& e : s.entities) {
      if (e.kind == EntityKind::minion && e.alive && e.team != me.team &&
          in_lane_corridor(*s.map, e.pos, lane) && dist(e.pos, me.pos) <= 12.0f) {
        wave_near = true;
      }
    }
    if (!wave_near) {
      const EntityState* camp = nullptr;
      float bd = 20.0f;
      for (const auto& e : s.entities) {
        if (e.kind != EntityKind::monster || !e.alive) continue;
        float d = dist(e.pos, me.pos);
        if (d < bd) {
          bd = d;
          camp = &e;
        }
      }
      if (camp) {
        float d = dist(camp->pos, me.pos);
        if (d <= p.hero.attack_range) {
          if (me.cooldowns[2] == 0 && camp->hp > 0.6f * camp->max_hp) {
            return {Level1::skill3, static_cast<uint16_t>(skill3_cell_for(p, me.pos, camp->pos))};
          }
          int slot = ctx.slot_of(camp->id);
          if (slot >= 0) return {Level1::normal_attack, static_cast<uint16_t>(slot)};
        }
        return {Level1::move, static_cast<uint16_t>(bin_toward(me.pos, camp->pos))};
      }
    }
  }

  // 6. Ambush from a bush.
  if (full_stack && bush_index(*s.map, me.pos) >= 0) {
    const EntityState* prey = nearest_enemy_hero();
    if (prey && dist(prey->pos, me.pos) <= 8.0f) {
      if (dist(prey->pos, me.pos) <= p.hero.attack_range + 1.0f) return engage(ctx, *prey);
      return {Level1::idle, 0};
    }
  }

  // 7. Navigate. Defense of a threatened home crystal outranks pushing;
  // otherwise head for the frontline objective of the assigned lane. A small
  // seeded waypoint jitter decorrelates games played under different seeds.
  Vec2 home = s.map->base_pos[static_cast<int>(me.team)];
  bool base_threatened = false;
  for (const auto& e : s.entities) {
    if (!e.alive || e.team != other_team(me.team)) continue;
    if (e.kind != EntityKind::hero && e.kind != EntityKind::minion) continue;
    if (dist(e.pos, home) <= 20.0f) {
      base_threatened = true;
      break;
    }
  }
  if (base_threatened && dist(me.pos, home) > 6.0f) {
    return {Level1::move, static_cast<uint16_t>(bin_toward(me.pos, home))};
  }
  Vec2 objective = s.map->base_pos[static_cast<int>(other_team(me.team))];
  const EntityState* front_turret = nullptr;
  int enemy = static_cast<int>(other_team(me.team));
  for (int slot_idx = 0; slot_idx < 2 && !front_turret; ++slot_idx) {
    EntityId tid = kFirstTurretId + static_cast<EntityId>(enemy * 6 + lane * 2 + slot_idx);
    const EntityState* t = s.find(tid);
    if (t && t->alive) front_turret = t;
  }
  if (front_turret) objective = front_turret->pos;
  Vec2 wander{static_cast<float>(s.rng.uniform_real() * 2.0 - 1.0) * 3.0f,
              static_cast<float>(s.rng.uniform_real() * 2.0 - 1.0) * 3.0f};
  objective = objective + wander;

  // Pick a fight with cooldowns while walking: poke the path ahead.
  int jitter = static_cast<int>(hero) * 7;
  if (me.cooldowns[0] == 0 && (static_cast<int>(s.tick) + jitter) % 90 == 0) {
    return {Level1::skill1, static_cast<uint16_t>(bin_toward(me.pos, objective))};
  }
  if (me.cooldowns[2] == 0 && (static_cast<int>(s.tick) + jitter) % 150 == 0) {
    Vec2 ahead = me.pos + normalized(objective - me.pos) * 4.0f;
    return {Level1::skill3, static_cast<uint16_t>(skill3_cell_for(p, me.pos, ahead))};
  }
  if (me.cooldowns[1] == 0 && !ctx.slots.empty() &&
      (static_cast<int>(s.tick) + jitter) % 135 == 0) {
    return {Level1::skill2, 0};
  }

  float d = dist(me.pos, objective);
  if (front_turret && d < 9.5f) {
    bool screened = false;
    for (const auto& m : s.entities) {
      if (m.kind == EntityKind::minion && m.alive && m.team == me.team &&
          dist(m.pos, front_turret->pos) <= p.turret.range) {
        screened = true;
      }
    }
    if (!screened) {
      if (d < 8.5f) {
        return {Level1::move, static_cast<uint16_t>(direction_to_bin(me.pos - objective))};
      }
      int base_bin = bin_toward(me.pos, objective);
      int bin = (base_bin + 3 + 6 * ((static_cast<int>(s.tick) / 30) % 2)) % kNumMoveBins;
      return {Level1::move, static_cast<uint16_t>(bin)};
    }
  }
  return {Level1::move, static_cast<uint16_t>(bin_toward(me.pos, objective))};
}

HeroAction random_policy(GameState& s, EntityId hero) {
  const ArenaParams& p = *s.params;
  const EntityState* me = s.find(hero);
  std::vector<FrameEntity> frame = s.to_frame();
  auto slots = build_target_slots(*s.map, {frame.data(), frame.size()}, hero, p.targeting_radius,
                                  p.vision_radius);
  std::vector<Level1> legal = {Level1::move, Level1::return_base, Level1::idle};
  if (!slots.empty()) legal.push_back(Level1::normal_attack);
  if (me->cooldowns[0] == 0) legal.push_back(Level1::skill1);
  if (me->cooldowns[1] == 0 && !slots.empty()) legal.push_back(Level1::skill2);
  if (me->cooldowns[2] == 0) legal.push_back(Level1::skill3);
  Level1 l1 = legal[s.rng.uniform(legal.size())];
  uint16_t l2 = 0;
  switch (l1) {
    case Level1::move:
    case Level1::skill1:
      l2 = static_cast<uint16_t>(s.rng.uniform(kNumMoveBins));
      break;
    case Level1::normal_attack:
    case Level1::skill2:
      l2 = static_cast<uint16_t>(s.rng.uniform(slots.size()));
      break;
    case Level1::skill3:
      l2 = static_cast<uint16_t>(s.rng.uniform(
          static_cast<uint64_t>(p.skill3_grid) * static_cast<uint64_t>(p.skill3_grid)));
      break;
    default:
      break;
  }
  return {l1, l2};
}

}  // namespace

HeroAction scripted_policy(GameState& state, EntityId hero, PolicyTier tier) {
  const EntityState* me = state.find(hero);
  if (!me || !me->alive) throw ArenaError("scripted_policy: hero is dead or unknown");
  switch (tier) {
    case PolicyTier::expert: return rule_based_policy(state, hero, true);
    case PolicyTier::weak: return rule_based_policy(state, hero, false);
    case PolicyTier::random: return random_policy(state, hero);
    case PolicyTier::external: break;
  }
  throw ArenaError("scripted_policy: unsupported tier");
}

}  // namespace moba
