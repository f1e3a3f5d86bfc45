#pragma once

#include <array>
#include <cstdint>

#include "moba/geom.hpp"

namespace moba {

using EntityId = uint32_t;
constexpr uint32_t kNoTick = 0xffffffffu;

enum class Team : uint8_t { blue = 0, red = 1, neutral = 2 };

inline Team other_team(Team t) {
  return t == Team::blue ? Team::red : (t == Team::red ? Team::blue : Team::neutral);
}

enum class EntityKind : uint8_t { hero = 0, minion = 1, turret = 2, monster = 3, crystal = 4 };

// Level-1 action classes, fixed order. Each has its own level-2 space.
enum class Level1 : uint8_t {
  move = 0,          // level2: direction bin in [0,12)
  normal_attack = 1, // level2: target slot in [0,8)
  skill1 = 2,        // direction type: bin in [0,12)
  skill2 = 3,        // target type: slot in [0,8)
  skill3 = 4,        // position type: local-grid cell in [0,169)
  return_base = 5,   // level2: 0
  idle = 6,          // level2: 0
};

constexpr int kNumLevel1 = 7;
constexpr int kNumMoveBins = 12;
constexpr int kNumTargetSlots = 8;
constexpr std::array<int, kNumLevel1> kLevel2Space = {12, 8, 12, 8, 169, 1, 1};

struct HeroAction {
  Level1 level1 = Level1::idle;
  uint16_t level2 = 0;
  bool operator==(const HeroAction&) const = default;
};

// Direction bins are 30 degrees wide; bin 0 is centered on +x, counterclockwise.
inline Vec2 direction_bin_center(int bin) {
  float angle = static_cast<float>(bin) * 0.5235987755982988f;  // 30 deg in rad
  return {std::cos(angle), std::sin(angle)};
}

// Discretize a displacement into a direction bin: bin = floor((angle+15deg)/30deg) mod 12.
inline int direction_to_bin(Vec2 d) {
  float angle = std::atan2(d.y, d.x);  // (-pi, pi]
  float deg = angle * 57.29577951308232f;
  if (deg < 0.0f) deg += 360.0f;
  int bin = static_cast<int>(std::floor((deg + 15.0f) / 30.0f));
  return bin % kNumMoveBins;
}

// The portion of an entity's state that is recorded in replay frames. Feature
// extraction and target-slot construction consume only this view, which is what
// makes offline (replay) and online (live) paths bitwise identical.
struct FrameEntity {
  EntityId id = 0;
  EntityKind kind = EntityKind::hero;
  Team team = Team::neutral;
  Vec2 pos{};
  float hp = 0.0f;
  float max_hp = 0.0f;
  uint8_t level = 0;                     // heroes only
  uint32_t gold = 0;                     // heroes only
  std::array<uint16_t, 3> cooldowns{};   // skill timers in ticks, heroes only
  uint8_t channel_left = 0;              // return-base channel ticks remaining
  uint8_t alive = 1;
  uint32_t respawn_at = kNoTick;

  bool operator==(const FrameEntity&) const = default;
};

enum class EventKind : uint8_t {
  attack = 0,
  damage = 1,
  cast = 2,
  kill = 3,
  turret_destroyed = 4,
};

struct GameEvent {
  uint32_t tick = 0;
  EventKind kind = EventKind::attack;
  EntityId actor = 0;
  uint8_t has_target = 1;  // target id valid; otherwise pos is
  EntityId target = 0;
  Vec2 pos{};
  float amount = 0.0f;  // damage dealt or gold bounty
  uint8_t aux = 0;      // cast events: skill index 1..3

  bool operator==(const GameEvent&) const = default;
};

enum class PolicyTier : uint8_t { expert = 0, weak = 1, random = 2, external = 3 };

enum class GameResult : uint8_t { ongoing = 0, blue_win = 1, red_win = 2, tie = 3 };

enum class SceneKind : uint8_t {
  push_turret = 1,
  combat = 2,
  lane_farm = 3,
  jungle_farm = 4,
  return_base = 5,
  navigation = 6,
};
constexpr int kNumScenes = 6;

inline const char* scene_name(SceneKind k) {
  switch (k) {
    case SceneKind::push_turret: return "push_turret";
    case SceneKind::combat: return "combat";
    case SceneKind::lane_farm: return "lane_farm";
    case SceneKind::jungle_farm: return "jungle_farm";
    case SceneKind::return_base: return "return";
    case SceneKind::navigation: return "navigation";
  }
  return "?";
}

inline const char* level1_name(Level1 a) {
  switch (a) {
    case Level1::move: return "move";
    case Level1::normal_attack: return "attack";
    case Level1::skill1: return "skill1";
    case Level1::skill2: return "skill2";
    case Level1::skill3: return "skill3";
    case Level1::return_base: return "return";
    case Level1::idle: return "idle";
  }
  return "?";
}

}  // namespace moba
