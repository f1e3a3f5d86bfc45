#pragma once

#include <deque>
#include <span>
#include <stdexcept>
#include <vector>

#include "moba/config.hpp"
#include "moba/rng.hpp"
#include "moba/types.hpp"
#include "moba/view.hpp"

namespace moba {

struct ArenaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Live entity: the recorded frame part plus simulation-only bookkeeping that
// never leaves the arena.
struct EntityState : FrameEntity {
  int attack_cd = 0;
  int xp = 0;
  float lane_progress = 0.0f;  // minions: arclength travelled from own base
  uint8_t lane = 0;            // minions and heroes (assigned lane)
  bool purge = false;          // dead minion, removed at the start of the next step
};

struct Rosters {
  int blue = 5;
  int red = 5;
};

struct GameState {
  const MapConfig* map = nullptr;
  const ArenaParams* params = nullptr;
  uint64_t seed = 0;
  uint32_t tick = 0;
  GameResult result = GameResult::ongoing;
  std::vector<EntityState> entities;
  Rng rng{0};
  int blue_heroes = 0;
  int red_heroes = 0;

  // Events emitted by the most recent step.
  std::vector<GameEvent> pending_events;

  // Rolling windows that make the live state a WorldSource for online feature
  // extraction: recent events, recent post-step frames and the running
  // hero-kill tally per frame. Must span the scene window plus feature history
  // plus agent delays.
  std::vector<GameEvent> recent_events;
  std::deque<std::vector<FrameEntity>> frame_ring;
  std::deque<std::array<int, 2>> kills_ring;
  uint32_t ring_base = 1;
  std::array<int, 2> hero_kills{0, 0};
  EntityId next_minion_id = 1000;

  EntityState* find(EntityId id);
  const EntityState* find(EntityId id) const;
  std::vector<FrameEntity> to_frame() const;
  int hero_lane(EntityId id) const;  // assigned lane for a hero id
};

using ActionSet = std::vector<std::pair<EntityId, HeroAction>>;

// Hero ids are 1..blue+red (blue first). Turrets 101.., crystals 121/122,
// monsters 201.., minions 1000+.
constexpr EntityId kFirstTurretId = 101;
constexpr EntityId kBlueCrystalId = 121;
constexpr EntityId kRedCrystalId = 122;
constexpr EntityId kFirstMonsterId = 201;
constexpr EntityId kFirstMinionId = 1000;

GameState init_game(const MapConfig& map, const ArenaParams& params, Rosters rosters,
                    uint64_t seed);

// Advances the world one tick. Actions of dead or unknown heroes are ignored;
// stepping a finished game throws.
void step(GameState& state, const ActionSet& actions);

HeroAction scripted_policy(GameState& state, EntityId hero, PolicyTier tier);

// Adapter: a live GameState viewed through the offline interface. Valid for
// queries within the state's rolling frame window.
class LiveSource final : public WorldSource {
 public:
  explicit LiveSource(const GameState& s) : s_(s) {}
  const MapConfig& map() const override { return *s_.map; }
  int first_tick() const override { return static_cast<int>(s_.ring_base); }
  int last_tick() const override {
    return static_cast<int>(s_.ring_base) + static_cast<int>(s_.frame_ring.size()) - 1;
  }
  std::span<const FrameEntity> entities_at(int tick) const override;
  std::span<const GameEvent> events_between(int lo, int hi) const override;
  std::array<int, 2> hero_kills_through(int tick) const override;

 private:
  const GameState& s_;
};

}  // namespace moba
