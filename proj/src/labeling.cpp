#include "moba/labeling.hpp"

#include <stdexcept>

namespace moba {

namespace {

struct HeroRef {
  Team team;
};

HeroRef hero_ref(const ReplaySource& src, EntityId hero) {
  if (src.last_tick() >= 1) {
    const FrameEntity* e = find_entity(src.entities_at(1), hero);
    if (e && e->kind == EntityKind::hero) return {e->team};
  }
  throw std::invalid_argument("unknown hero id " + std::to_string(hero));
}

Vec2 hero_pos_at(const ReplaySource& src, EntityId hero, int tick) {
  const FrameEntity* e = find_entity(src.entities_at(tick), hero);
  return e ? e->pos : Vec2{};
}

std::vector<int> attack_event_ticks(const ReplaySource& src, EntityId hero) {
  std::vector<int> ticks;
  for (const auto& ev : src.events_between(src.first_tick(), src.last_tick())) {
    if (ev.kind == EventKind::attack && ev.actor == hero) {
      ticks.push_back(static_cast<int>(ev.tick));
    }
  }
  return ticks;
}

}  // namespace

std::vector<AttackSeries> extract_attack_series(const ReplaySource& src, EntityId hero,
                                                const GridSpec& grid, const LabelParams& lp) {
  HeroRef ref = hero_ref(src, hero);
  std::vector<int> ticks = attack_event_ticks(src, hero);
  std::vector<AttackSeries> out;
  size_t i = 0;
  while (i < ticks.size()) {
    size_t j = i + 1;
    while (j < ticks.size() && ticks[j] - ticks[j - 1] <= lp.series_gap) ++j;
    if (static_cast<int>(j - i) >= lp.min_series_events) {
      AttackSeries s;
      s.hero = hero;
      s.start_tick = ticks[i];
      s.end_tick = ticks[j - 1];
      s.event_ticks.assign(ticks.begin() + static_cast<ptrdiff_t>(i),
                           ticks.begin() + static_cast<ptrdiff_t>(j));
      s.region = global_cell_of_pos(grid, src.map(), ref.team, hero_pos_at(src, hero, ticks[i]));
      out.push_back(std::move(s));
    }
    i = j;
  }
  return out;
}

std::vector<int> global_intent_labels(const ReplaySource& src, EntityId hero,
                                      const GridSpec& grid, const LabelParams& lp) {
  hero_ref(src, hero);
  int ticks = src.last_tick();
  std::vector<int> labels(static_cast<size_t>(ticks), kNoLabel);
  std::vector<AttackSeries> series = extract_attack_series(src, hero, grid, lp);
  if (series.empty()) return labels;
  // Ticks in [b_i, b_{i+1}) carry region(series i+1); [0, b_1) carries
  // region(series 1); [b_k, end] carries none.
  for (int t = 1; t <= ticks; ++t) {
    size_t next = 0;
    while (next < series.size() && series[next].start_tick <= t) ++next;
    if (next < series.size()) labels[static_cast<size_t>(t - 1)] = series[next].region;
  }
  return labels;
}

std::vector<int> local_intent_labels(const ReplaySource& src, EntityId hero,
                                     const GridSpec& grid, const LabelParams& lp) {
  HeroRef ref = hero_ref(src, hero);
  int ticks = src.last_tick();
  std::vector<int> labels(static_cast<size_t>(ticks), kNoLabel);
  std::vector<int> attacks = attack_event_ticks(src, hero);
  for (size_t i = 0; i + 1 < attacks.size(); ++i) {
    int t0 = attacks[i];
    int t1 = attacks[i + 1];
    int halfway_tick = (t0 + t1) / 2;
    Vec2 halfway_pos = hero_pos_at(src, hero, halfway_tick);
    for (int t = t0 + 1; t <= t1 && t <= ticks; ++t) {
      Vec2 offset = halfway_pos - hero_pos_at(src, hero, t);
      labels[static_cast<size_t>(t - 1)] =
          local_cell_of_offset(grid, canon_vec(ref.team, offset));
    }
  }
  (void)lp;
  return labels;
}

std::vector<std::pair<int, int>> action_labels(const Replay& replay, const ReplaySource& src,
                                               EntityId hero,
                                               std::span<const SceneKind> scene_per_tick,
                                               const GridSpec& grid, const LabelParams& lp) {
  HeroRef ref = hero_ref(src, hero);
  int ticks = src.last_tick();
  std::vector<std::pair<int, int>> out(static_cast<size_t>(ticks), {kNoLabel, kNoLabel});
  for (int t = 1; t <= ticks; ++t) {
    // The action paired with the state at tick t is the one issued while the
    // policies were observing tick t, i.e. the one applied by the next step.
    if (t >= static_cast<int>(replay.expert_actions.size())) break;
    const auto& issued = replay.expert_actions[static_cast<size_t>(t)];
    const HeroAction* action = nullptr;
    for (const auto& [id, a] : issued) {
      if (id == hero) action = &a;
    }
    if (!action) continue;  // dead that tick
    int l1 = static_cast<int>(action->level1);
    int l2 = action->level2;
    switch (action->level1) {
      case Level1::move: {
        int horizon = (t - 1 < static_cast<int>(scene_per_tick.size()) &&
                       scene_per_tick[static_cast<size_t>(t - 1)] == SceneKind::combat)
                          ? lp.move_horizon_combat
                          : lp.move_horizon_default;
        if (t + horizon > ticks) continue;  // truncated at game end: drop
        Vec2 delta = hero_pos_at(src, hero, t + horizon) - hero_pos_at(src, hero, t);
        if (length(delta) < lp.stationary_eps) continue;  // stationary noise: drop
        l2 = direction_to_bin(canon_vec(ref.team, delta));
        break;
      }
      case Level1::skill1:
        l2 = canon_dir_bin(ref.team, l2);
        break;
      case Level1::skill3:
        l2 = canon_grid_cell(ref.team, l2, grid.local_m);
        break;
      default:
        break;  // target slots and fixed classes are frame-independent
    }
    out[static_cast<size_t>(t - 1)] = {l1, l2};
  }
  return out;
}

}  // namespace moba
