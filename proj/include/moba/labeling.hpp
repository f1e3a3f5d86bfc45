#pragma once

#include <utility>
#include <vector>

#include "moba/config.hpp"
#include "moba/replay.hpp"

namespace moba {

// A run of attack events with bounded gaps; singletons are discarded upstream.
struct AttackSeries {
  EntityId hero = 0;
  int start_tick = 0;
  int end_tick = 0;
  std::vector<int> event_ticks;
  int region = 0;  // canonical global-grid cell of the first attack position
};

constexpr int kNoLabel = -1;

// Per-tick label vectors are indexed [0 .. tick_count-1] for ticks 1..tick_count.

std::vector<AttackSeries> extract_attack_series(const ReplaySource& src, EntityId hero,
                                                const GridSpec& grid, const LabelParams& lp);

// Session labels: ticks before a series boundary carry the region of the next
// series; ticks from the last boundary on carry none.
std::vector<int> global_intent_labels(const ReplaySource& src, EntityId hero,
                                      const GridSpec& grid, const LabelParams& lp);

// Halfway-position labels: for consecutive attack events at t_i < t_{i+1},
// ticks in (t_i, t_{i+1}] carry the local-view cell of the hero's position at
// floor((t_i+t_{i+1})/2), clamped to the view border; ticks at or before the
// first event and after the last carry none.
std::vector<int> local_intent_labels(const ReplaySource& src, EntityId hero,
                                     const GridSpec& grid, const LabelParams& lp);

// Hierarchical action labels in the hero's canonical frame. level1/level2 are
// copied from the recorded actions except that move directions are recomputed
// from the position delta over a scene-dependent horizon; stationary and
// horizon-truncated move ticks are dropped (kNoLabel).
std::vector<std::pair<int, int>> action_labels(const Replay& replay, const ReplaySource& src,
                                               EntityId hero,
                                               std::span<const SceneKind> scene_per_tick,
                                               const GridSpec& grid, const LabelParams& lp);

}  // namespace moba
