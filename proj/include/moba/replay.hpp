#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "moba/arena.hpp"
#include "moba/types.hpp"
#include "moba/view.hpp"

namespace moba {

struct ReplayError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HeroMeta {
  EntityId id = 0;
  Team team = Team::blue;
  PolicyTier tier = PolicyTier::expert;
  float performance_score = 0.0f;
  bool operator==(const HeroMeta&) const = default;
};

// One recorded game. frames[i] holds the world after step i+1, i.e. tick i+1;
// tick_count always equals frames.size().
struct Replay {
  uint64_t map_digest = 0;
  uint64_t seed = 0;
  uint32_t tick_count = 0;
  GameResult result = GameResult::ongoing;
  std::vector<HeroMeta> rosters;
  std::vector<std::vector<FrameEntity>> frames;
  std::vector<GameEvent> events;  // ascending tick, emission order within a tick
  // Actions as issued by the policies, per tick, for heroes that were alive.
  std::vector<std::vector<std::pair<EntityId, HeroAction>>> expert_actions;

  bool operator==(const Replay&) const = default;
};

constexpr char kReplayMagic[4] = {'M', 'R', 'P', 'L'};
constexpr uint16_t kReplayVersion = 1;

std::vector<uint8_t> encode(const Replay& replay);
Replay decode(const std::vector<uint8_t>& bytes);

void write_replay_file(const Replay& replay, const std::string& path);
Replay read_replay_file(const std::string& path);

// Inspection-only JSON-lines dump, one frame per line. No format promise.
void dump_replay_jsonl(const Replay& replay, const std::string& path);

// A per-hero controller. Called once per living hero per tick, in hero id
// order; may advance the game's rng (the random tier does).
using PolicyFn = std::function<HeroAction(GameState&, EntityId)>;

// Shared match loop: runs until a result or max_ticks, recording everything.
// `tiers` is header metadata only; the callbacks drive the heroes.
Replay run_match(const MapConfig& map, const ArenaParams& params, Rosters rosters,
                 const std::vector<PolicyTier>& tiers, const PolicyFn& policy, uint64_t seed,
                 int max_ticks);

// Scripted-policy recording front end.
Replay record(const MapConfig& map, const ArenaParams& params, Rosters rosters,
              const std::vector<PolicyTier>& tiers, uint64_t seed, int max_ticks);

// Decoded replay viewed through the uniform interface.
class ReplaySource final : public WorldSource {
 public:
  ReplaySource(const Replay& replay, const MapConfig& map);
  const MapConfig& map() const override { return *map_; }
  int first_tick() const override { return 1; }
  int last_tick() const override { return static_cast<int>(replay_->tick_count); }
  std::span<const FrameEntity> entities_at(int tick) const override;
  std::span<const GameEvent> events_between(int lo, int hi) const override;
  std::array<int, 2> hero_kills_through(int tick) const override;

 private:
  const Replay* replay_;
  const MapConfig* map_;
  std::vector<std::array<int, 2>> kill_prefix_;  // per tick, cumulative
};

}  // namespace moba
