#pragma once

#include <array>
#include <span>
#include <vector>

#include "moba/config.hpp"
#include "moba/types.hpp"

namespace moba {

// Uniform read access to a game, either live (GameState rolling window) or
// decoded from a replay. Feature extraction, target slots and the scene
// one-hot all work through this interface, which is what guarantees that the
// offline and online paths produce bitwise-identical results.
class WorldSource {
 public:
  virtual ~WorldSource() = default;
  virtual const MapConfig& map() const = 0;
  virtual int first_tick() const = 0;
  virtual int last_tick() const = 0;
  // Frame at `tick`, clamped to [first_tick, last_tick].
  virtual std::span<const FrameEntity> entities_at(int tick) const = 0;
  // Events with tick in [lo, hi], ascending, emission order within a tick.
  virtual std::span<const GameEvent> events_between(int lo, int hi) const = 0;
  // Cumulative enemy-hero kills per team through `tick`.
  virtual std::array<int, 2> hero_kills_through(int tick) const = 0;
};

const FrameEntity* find_entity(std::span<const FrameEntity> entities, EntityId id);

// Index of the bush containing p, or -1.
int bush_index(const MapConfig& map, Vec2 p);
bool in_lane_corridor(const MapConfig& map, Vec2 p);
bool in_lane_corridor(const MapConfig& map, Vec2 p, int lane);
// Jungle: off-lane ground away from both home areas.
bool in_jungle_area(const MapConfig& map, float base_radius, Vec2 p);

// Team vision: an enemy or neutral unit is observable if it is within
// vision_radius of a living friendly hero, turret or crystal, and, when it
// stands in a bush, only if that source stands in the same bush. Friendly
// units are always observable. Dead units are not.
bool visible_to_team(const MapConfig& map, std::span<const FrameEntity> entities, Team team,
                     const FrameEntity& target, float vision_radius);

// Per-tick visible-enemy ordering: living visible enemies (and neutral
// monsters) within targeting_radius of the viewer, nearest first, id as the
// tiebreak, truncated to kNumTargetSlots.
std::vector<EntityId> build_target_slots(const MapConfig& map,
                                         std::span<const FrameEntity> entities, EntityId viewer,
                                         float targeting_radius, float vision_radius);

// ---------------------------------------------------------------------------
// Team-canonical frame. Red-side heroes observe and act in a 180-degree
// rotated world so that one trained model plays either side. The arena itself
// is world-frame only; these helpers are used by features, labeling and the
// runtime decoder.
// ---------------------------------------------------------------------------

inline Vec2 canon_pos(const MapConfig& map, Team team, Vec2 p) {
  return team == Team::red ? map.mirror(p) : p;
}
inline Vec2 canon_vec(Team team, Vec2 v) {
  return team == Team::red ? Vec2{-v.x, -v.y} : v;
}
inline int canon_dir_bin(Team team, int bin) {
  return team == Team::red ? (bin + kNumMoveBins / 2) % kNumMoveBins : bin;
}
inline int canon_grid_cell(Team team, int cell, int n) {
  return team == Team::red ? n * n - 1 - cell : cell;
}

// Local-view cell <-> offset from the viewing hero, in the hero's canonical
// frame. Cells are row-major, the hero sits in the center cell.
inline int local_cell_of_offset(const GridSpec& grid, Vec2 canon_offset) {
  int m = grid.local_m;
  float cell = grid.local_cell();
  int half = m / 2;
  int col = half + static_cast<int>(std::floor(canon_offset.x / cell + 0.5f));
  int row = half + static_cast<int>(std::floor(canon_offset.y / cell + 0.5f));
  col = std::clamp(col, 0, m - 1);
  row = std::clamp(row, 0, m - 1);
  return row * m + col;
}
inline Vec2 local_offset_of_cell(const GridSpec& grid, int cell) {
  int m = grid.local_m;
  float edge = grid.local_cell();
  int half = m / 2;
  int row = cell / m;
  int col = cell % m;
  return {static_cast<float>(col - half) * edge, static_cast<float>(row - half) * edge};
}

inline int global_cell_of_pos(const GridSpec& grid, const MapConfig& map, Team team, Vec2 world) {
  Vec2 p = canon_pos(map, team, world);
  float cell = grid.global_cell(map.side_length);
  int n = grid.global_n;
  int col = std::clamp(static_cast<int>(std::floor(p.x / cell)), 0, n - 1);
  int row = std::clamp(static_cast<int>(std::floor(p.y / cell)), 0, n - 1);
  return row * n + col;
}

// ---------------------------------------------------------------------------
// Active skill areas, reconstructed from cast events. Used by the damage-field
// image channel.
// ---------------------------------------------------------------------------

struct SkillArea {
  uint8_t skill = 1;  // 1 line, 2 burst, 3 area
  Vec2 a{};           // line start / circle center
  Vec2 b{};           // line end
  float halfwidth = 0.0f;  // line halfwidth or circle radius
  float damage = 0.0f;
};

bool area_covers(const SkillArea& area, Vec2 p);

// Casts from (tick - ttl, tick] that are still showing. Shapes are rebuilt
// from the cast event plus the frame at the cast tick.
std::vector<SkillArea> collect_active_areas(const WorldSource& src, int tick,
                                            const ArenaParams& params);

// Causal scene classification at one tick, shared by the online feature path
// and the offline one. PushTurret/Combat/LaneFarm/JungleFarm come from the
// trailing event window; Return covers channel ticks and the arrival tick.
SceneKind causal_scene(const WorldSource& src, int tick, EntityId hero, int scene_window,
                       float base_radius);

}  // namespace moba
