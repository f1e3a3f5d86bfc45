#include "moba/replay.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace moba {

namespace {

struct ByteWriter {
  std::vector<uint8_t> out;

  void u8(uint8_t v) { out.push_back(v); }
  void u16(uint16_t v) {
    out.push_back(static_cast<uint8_t>(v));
    out.push_back(static_cast<uint8_t>(v >> 8));
  }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void f32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
  // Reserves a u32 length slot; returns its position.
  size_t begin_section() {
    size_t pos = out.size();
    u32(0);
    return pos;
  }
  void end_section(size_t pos) {
    uint32_t len = static_cast<uint32_t>(out.size() - pos - 4);
    for (int i = 0; i < 4; ++i) out[pos + i] = static_cast<uint8_t>(len >> (8 * i));
  }
};

struct ByteReader {
  const std::vector<uint8_t>& in;
  size_t pos = 0;
  size_t limit;

  explicit ByteReader(const std::vector<uint8_t>& bytes) : in(bytes), limit(bytes.size()) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ReplayError(what + " at offset " + std::to_string(pos));
  }
  void need(size_t n) const {
    if (pos + n > limit) {
      throw ReplayError("truncated replay: need " + std::to_string(n) + " bytes at offset " +
                        std::to_string(pos));
    }
  }
  uint8_t u8() {
    need(1);
    return in[pos++];
  }
  uint16_t u16() {
    need(2);
    uint16_t v = static_cast<uint16_t>(in[pos] | (in[pos + 1] << 8));
    pos += 2;
    return v;
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(in[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(in[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }
  float f32() {
    uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  // Enters a length-prefixed section: returns the end position.
  size_t begin_section() {
    uint32_t len = u32();
    if (pos + len > in.size()) fail("section length overflows input");
    return pos + len;
  }
  void end_section(size_t end, const char* name) {
    if (pos != end) {
      throw ReplayError(std::string("section '") + name + "' size mismatch at offset " +
                        std::to_string(pos));
    }
    limit = in.size();
  }
};

void write_entity(ByteWriter& w, const FrameEntity& e) {
  w.u32(e.id);
  w.u8(static_cast<uint8_t>(e.kind));
  w.u8(static_cast<uint8_t>(e.team));
  w.f32(e.pos.x);
  w.f32(e.pos.y);
  w.f32(e.hp);
  w.f32(e.max_hp);
  w.u8(e.level);
  w.u32(e.gold);
  for (uint16_t cd : e.cooldowns) w.u16(cd);
  w.u8(e.channel_left);
  w.u8(e.alive);
  w.u32(e.respawn_at);
}

FrameEntity read_entity(ByteReader& r) {
  FrameEntity e;
  e.id = r.u32();
  uint8_t kind = r.u8();
  if (kind > static_cast<uint8_t>(EntityKind::crystal)) r.fail("bad entity kind");
  e.kind = static_cast<EntityKind>(kind);
  uint8_t team = r.u8();
  if (team > 2) r.fail("bad team");
  e.team = static_cast<Team>(team);
  e.pos.x = r.f32();
  e.pos.y = r.f32();
  e.hp = r.f32();
  e.max_hp = r.f32();
  e.level = r.u8();
  e.gold = r.u32();
  for (auto& cd : e.cooldowns) cd = r.u16();
  e.channel_left = r.u8();
  e.alive = r.u8();
  e.respawn_at = r.u32();
  return e;
}

}  // namespace

std::vector<uint8_t> encode(const Replay& replay) {
  ByteWriter w;
  for (char c : kReplayMagic) w.u8(static_cast<uint8_t>(c));
  w.u16(kReplayVersion);
  w.u64(replay.map_digest);
  w.u64(replay.seed);
  w.u32(replay.tick_count);
  w.u8(static_cast<uint8_t>(replay.result));

  size_t s = w.begin_section();
  w.u16(static_cast<uint16_t>(replay.rosters.size()));
  for (const auto& h : replay.rosters) {
    w.u32(h.id);
    w.u8(static_cast<uint8_t>(h.team));
    w.u8(static_cast<uint8_t>(h.tier));
    w.f32(h.performance_score);
  }
  w.end_section(s);

  s = w.begin_section();
  for (const auto& frame : replay.frames) {
    w.u16(static_cast<uint16_t>(frame.size()));
    for (const auto& e : frame) write_entity(w, e);
  }
  w.end_section(s);

  s = w.begin_section();
  w.u32(static_cast<uint32_t>(replay.events.size()));
  for (const auto& ev : replay.events) {
    w.u32(ev.tick);
    w.u8(static_cast<uint8_t>(ev.kind));
    w.u32(ev.actor);
    w.u8(ev.has_target);
    if (ev.has_target) {
      w.u32(ev.target);
    } else {
      w.f32(ev.pos.x);
      w.f32(ev.pos.y);
    }
    w.f32(ev.amount);
    w.u8(ev.aux);
  }
  w.end_section(s);

  s = w.begin_section();
  for (const auto& tick_actions : replay.expert_actions) {
    w.u16(static_cast<uint16_t>(tick_actions.size()));
    for (const auto& [id, a] : tick_actions) {
      w.u32(id);
      w.u8(static_cast<uint8_t>(a.level1));
      w.u16(a.level2);
    }
  }
  w.end_section(s);
  return w.out;
}

Replay decode(const std::vector<uint8_t>& bytes) {
  ByteReader r(bytes);
  r.need(4);
  if (std::memcmp(bytes.data(), kReplayMagic, 4) != 0) {
    throw ReplayError("bad magic at offset 0");
  }
  r.pos = 4;
  uint16_t version = r.u16();
  if (version != kReplayVersion) {
    throw ReplayError("unsupported replay version " + std::to_string(version));
  }
  Replay out;
  out.map_digest = r.u64();
  out.seed = r.u64();
  out.tick_count = r.u32();
  uint8_t result = r.u8();
  if (result > static_cast<uint8_t>(GameResult::tie)) r.fail("bad result code");
  out.result = static_cast<GameResult>(result);

  size_t end = r.begin_section();
  uint16_t heroes = r.u16();
  out.rosters.resize(heroes);
  for (auto& h : out.rosters) {
    h.id = r.u32();
    uint8_t team = r.u8();
    if (team > 1) r.fail("bad roster team");
    h.team = static_cast<Team>(team);
    h.tier = static_cast<PolicyTier>(r.u8());
    h.performance_score = r.f32();
  }
  r.end_section(end, "rosters");

  end = r.begin_section();
  out.frames.resize(out.tick_count);
  for (auto& frame : out.frames) {
    uint16_t n = r.u16();
    frame.reserve(n);
    for (int i = 0; i < n; ++i) frame.push_back(read_entity(r));
  }
  r.end_section(end, "frames");

  end = r.begin_section();
  uint32_t n_events = r.u32();
  out.events.reserve(n_events);
  for (uint32_t i = 0; i < n_events; ++i) {
    GameEvent ev;
    ev.tick = r.u32();
    uint8_t kind = r.u8();
    if (kind > static_cast<uint8_t>(EventKind::turret_destroyed)) r.fail("bad event kind");
    ev.kind = static_cast<EventKind>(kind);
    ev.actor = r.u32();
    ev.has_target = r.u8();
    if (ev.has_target > 1) r.fail("bad target flag");
    if (ev.has_target) {
      ev.target = r.u32();
    } else {
      ev.pos.x = r.f32();
      ev.pos.y = r.f32();
    }
    ev.amount = r.f32();
    ev.aux = r.u8();
    out.events.push_back(ev);
  }
  r.end_section(end, "events");

  end = r.begin_section();
  out.expert_actions.resize(out.tick_count);
  for (auto& tick_actions : out.expert_actions) {
    uint16_t n = r.u16();
    tick_actions.reserve(n);
    for (int i = 0; i < n; ++i) {
      EntityId id = r.u32();
      uint8_t l1 = r.u8();
      if (l1 >= kNumLevel1) r.fail("bad level-1 action");
      uint16_t l2 = r.u16();
      tick_actions.emplace_back(id, HeroAction{static_cast<Level1>(l1), l2});
    }
  }
  r.end_section(end, "actions");

  if (r.pos != bytes.size()) {
    throw ReplayError("trailing bytes at offset " + std::to_string(r.pos));
  }
  return out;
}

void write_replay_file(const Replay& replay, const std::string& path) {
  std::vector<uint8_t> bytes = encode(replay);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ReplayError("cannot open for write: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw ReplayError("short write: " + path);
}

Replay read_replay_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ReplayError("cannot open replay: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode(bytes);
}

void dump_replay_jsonl(const Replay& replay, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ReplayError("cannot open for write: " + path);
  for (uint32_t t = 0; t < replay.tick_count; ++t) {
    nlohmann::json line;
    line["tick"] = t + 1;
    auto& ents = line["entities"] = nlohmann::json::array();
    for (const auto& e : replay.frames[t]) {
      ents.push_back({{"id", e.id},
                      {"kind", static_cast<int>(e.kind)},
                      {"team", static_cast<int>(e.team)},
                      {"x", e.pos.x},
                      {"y", e.pos.y},
                      {"hp", e.hp},
                      {"alive", e.alive != 0}});
    }
    f << line.dump() << "\n";
  }
}

Replay run_match(const MapConfig& map, const ArenaParams& params, Rosters rosters,
                 const std::vector<PolicyTier>& tiers, const PolicyFn& policy, uint64_t seed,
                 int max_ticks) {
  int hero_count = rosters.blue + rosters.red;
  if (static_cast<int>(tiers.size()) != hero_count) {
    throw ReplayError("tier list size does not match roster");
  }
  GameState state = init_game(map, params, rosters, seed);
  Replay out;
  out.map_digest = map_digest(map);
  out.seed = seed;
  for (int i = 0; i < hero_count; ++i) {
    HeroMeta h;
    h.id = static_cast<EntityId>(i + 1);
    h.team = i < rosters.blue ? Team::blue : Team::red;
    h.tier = tiers[static_cast<size_t>(i)];
    out.rosters.push_back(h);
  }

  while (state.result == GameResult::ongoing &&
         static_cast<int>(state.tick) < max_ticks) {
    ActionSet actions;
    std::vector<std::pair<EntityId, HeroAction>> issued;
    for (int i = 0; i < hero_count; ++i) {
      EntityId id = static_cast<EntityId>(i + 1);
      const EntityState* hero = state.find(id);
      if (!hero || !hero->alive) continue;
      HeroAction a = policy(state, id);
      actions.emplace_back(id, a);
      issued.emplace_back(id, a);
    }
    step(state, actions);
    out.frames.push_back(state.to_frame());
    out.events.insert(out.events.end(), state.pending_events.begin(),
                      state.pending_events.end());
    out.expert_actions.push_back(std::move(issued));
  }
  out.tick_count = static_cast<uint32_t>(out.frames.size());
  out.result = state.result;

  // Per-hero performance score: kills*3 + turret_damage_share*5 + gold/1000.
  std::vector<int> kills(static_cast<size_t>(hero_count), 0);
  std::vector<double> turret_damage(static_cast<size_t>(hero_count), 0.0);
  double total_turret_damage = 0.0;
  for (const auto& ev : out.events) {
    if (ev.actor < 1 || ev.actor > static_cast<EntityId>(hero_count)) continue;
    size_t idx = ev.actor - 1;
    if (ev.kind == EventKind::kill && ev.has_target && ev.target >= 1 &&
        ev.target <= static_cast<EntityId>(hero_count)) {
      kills[idx] += 1;
    }
    if (ev.kind == EventKind::damage && ev.has_target && ev.target >= kFirstTurretId &&
        ev.target < kBlueCrystalId) {
      turret_damage[idx] += ev.amount;
      total_turret_damage += ev.amount;
    }
  }
  for (int i = 0; i < hero_count; ++i) {
    const EntityState* hero = state.find(static_cast<EntityId>(i + 1));
    double share = total_turret_damage > 0.0 ? turret_damage[static_cast<size_t>(i)] /
                                                   total_turret_damage
                                             : 0.0;
    double gold = hero ? static_cast<double>(hero->gold) : 0.0;
    out.rosters[static_cast<size_t>(i)].performance_score =
        static_cast<float>(kills[static_cast<size_t>(i)] * 3.0 + share * 5.0 + gold / 1000.0);
  }
  return out;
}

Replay record(const MapConfig& map, const ArenaParams& params, Rosters rosters,
              const std::vector<PolicyTier>& tiers, uint64_t seed, int max_ticks) {
  PolicyFn scripted = [&tiers](GameState& s, EntityId id) {
    return scripted_policy(s, id, tiers[id - 1]);
  };
  return run_match(map, params, rosters, tiers, scripted, seed, max_ticks);
}

ReplaySource::ReplaySource(const Replay& replay, const MapConfig& map)
    : replay_(&replay), map_(&map) {
  kill_prefix_.resize(replay.tick_count, {0, 0});
  size_t ev_idx = 0;
  std::array<int, 2> running{0, 0};
  for (uint32_t t = 1; t <= replay.tick_count; ++t) {
    while (ev_idx < replay.events.size() && replay.events[ev_idx].tick <= t) {
      const auto& ev = replay.events[ev_idx];
      if (ev.tick == t && ev.kind == EventKind::kill && ev.has_target) {
        const FrameEntity* victim = find_entity(entities_at(static_cast<int>(t)), ev.target);
        const FrameEntity* killer = find_entity(entities_at(static_cast<int>(t)), ev.actor);
        if (victim && victim->kind == EntityKind::hero && killer &&
            killer->team != victim->team && killer->team != Team::neutral) {
          running[static_cast<int>(killer->team)] += 1;
        }
      }
      ++ev_idx;
    }
    kill_prefix_[t - 1] = running;
  }
}

std::span<const FrameEntity> ReplaySource::entities_at(int tick) const {
  if (replay_->frames.empty()) return {};
  tick = std::clamp(tick, 1, static_cast<int>(replay_->tick_count));
  const auto& frame = replay_->frames[static_cast<size_t>(tick - 1)];
  return {frame.data(), frame.size()};
}

std::span<const GameEvent> ReplaySource::events_between(int lo, int hi) const {
  const auto& ev = replay_->events;
  auto begin = std::lower_bound(ev.begin(), ev.end(), lo, [](const GameEvent& e, int t) {
    return static_cast<int>(e.tick) < t;
  });
  auto end = std::upper_bound(ev.begin(), ev.end(), hi, [](int t, const GameEvent& e) {
    return t < static_cast<int>(e.tick);
  });
  if (begin >= end) return {};
  return {&*begin, static_cast<size_t>(end - begin)};
}

std::array<int, 2> ReplaySource::hero_kills_through(int tick) const {
  if (kill_prefix_.empty()) return {0, 0};
  tick = std::clamp(tick, 1, static_cast<int>(replay_->tick_count));
  return kill_prefix_[static_cast<size_t>(tick - 1)];
}

}  // namespace moba
