#include "moba/dataprep.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace moba {

namespace {

// Per-tick predicate flags from the trailing event window, matching
// causal_scene; Return is the offline, completed-span version.
struct SceneFlags {
  std::vector<uint8_t> push, combat, lane_attack, jungle_attack, in_return;
};

SceneFlags compute_flags(const ReplaySource& src, EntityId hero, int window) {
  int ticks = src.last_tick();
  SceneFlags f;
  f.push.assign(static_cast<size_t>(ticks + 1), 0);
  f.combat.assign(static_cast<size_t>(ticks + 1), 0);
  f.lane_attack.assign(static_cast<size_t>(ticks + 1), 0);
  f.jungle_attack.assign(static_cast<size_t>(ticks + 1), 0);
  f.in_return.assign(static_cast<size_t>(ticks + 1), 0);
  if (ticks < 1) return f;

  Team team = Team::blue;
  if (const FrameEntity* me = find_entity(src.entities_at(1), hero)) team = me->team;

  // Event ticks per predicate, then smear each over the trailing window.
  std::vector<uint8_t> ev_push(static_cast<size_t>(ticks + 1), 0);
  std::vector<uint8_t> ev_combat(static_cast<size_t>(ticks + 1), 0);
  std::vector<uint8_t> ev_lane(static_cast<size_t>(ticks + 1), 0);
  std::vector<uint8_t> ev_jungle(static_cast<size_t>(ticks + 1), 0);
  for (const auto& ev : src.events_between(1, ticks)) {
    int t = static_cast<int>(ev.tick);
    if (ev.kind == EventKind::attack && ev.actor == hero && ev.has_target) {
      const FrameEntity* tgt = find_entity(src.entities_at(t), ev.target);
      if (!tgt) continue;
      bool enemy = tgt->team != team;
      if (enemy && (tgt->kind == EntityKind::turret || tgt->kind == EntityKind::crystal)) {
        ev_push[static_cast<size_t>(t)] = 1;
      }
      if (enemy && tgt->kind == EntityKind::minion) ev_lane[static_cast<size_t>(t)] = 1;
      if (tgt->kind == EntityKind::monster) ev_jungle[static_cast<size_t>(t)] = 1;
    } else if (ev.kind == EventKind::damage && ev.has_target) {
      if (ev.actor == hero) {
        const FrameEntity* tgt = find_entity(src.entities_at(t), ev.target);
        if (tgt && tgt->kind == EntityKind::hero && tgt->team != team) {
          ev_combat[static_cast<size_t>(t)] = 1;
        }
      } else if (ev.target == hero) {
        const FrameEntity* actor = find_entity(src.entities_at(t), ev.actor);
        if (actor && actor->kind == EntityKind::hero && actor->team != team) {
          ev_combat[static_cast<size_t>(t)] = 1;
        }
      }
    }
  }
  auto smear = [&](const std::vector<uint8_t>& ev, std::vector<uint8_t>& out) {
    int count = 0;
    for (int t = 1; t <= ticks; ++t) {
      count += ev[static_cast<size_t>(t)];
      int old = t - window;  // window covers [t-window+1, t]
      if (old >= 1) count -= ev[static_cast<size_t>(old)];
      out[static_cast<size_t>(t)] = count > 0 ? 1 : 0;
    }
  };
  smear(ev_push, f.push);
  smear(ev_combat, f.combat);
  smear(ev_lane, f.lane_attack);
  smear(ev_jungle, f.jungle_attack);

  // Completed return spans: channel runs that end in a teleport, arrival tick
  // included.
  const MapConfig& map = src.map();
  int t = 1;
  while (t <= ticks) {
    const FrameEntity* me = find_entity(src.entities_at(t), hero);
    if (!me || me->channel_left == 0) {
      ++t;
      continue;
    }
    int start = t;
    int last = t;
    uint8_t prev_left = me->channel_left;
    ++t;
    while (t <= ticks) {
      const FrameEntity* cur = find_entity(src.entities_at(t), hero);
      if (!cur || cur->channel_left == 0) break;
      prev_left = cur->channel_left;
      last = t;
      ++t;
    }
    if (prev_left == 1 && t <= ticks) {
      const FrameEntity* arrive = find_entity(src.entities_at(t), hero);
      if (arrive && arrive->alive && arrive->channel_left == 0 &&
          arrive->pos == map.base_pos[static_cast<int>(arrive->team)]) {
        for (int u = start; u <= last + 1; ++u) f.in_return[static_cast<size_t>(u)] = 1;
        ++t;
      }
    }
  }
  return f;
}

SceneKind pick_kind(const ReplaySource& src, EntityId hero, const SceneFlags& f, int t,
                    float base_radius) {
  if (f.push[static_cast<size_t>(t)]) return SceneKind::push_turret;
  if (f.combat[static_cast<size_t>(t)]) return SceneKind::combat;
  const FrameEntity* me = find_entity(src.entities_at(t), hero);
  Vec2 pos = me ? me->pos : Vec2{};
  if (f.lane_attack[static_cast<size_t>(t)] && in_lane_corridor(src.map(), pos)) {
    return SceneKind::lane_farm;
  }
  if (f.jungle_attack[static_cast<size_t>(t)] && in_jungle_area(src.map(), base_radius, pos)) {
    return SceneKind::jungle_farm;
  }
  if (f.in_return[static_cast<size_t>(t)]) return SceneKind::return_base;
  return SceneKind::navigation;
}

}  // namespace

std::vector<SceneKind> scene_per_tick(const ReplaySource& src, EntityId hero,
                                      const DataprepParams& dp, float base_radius) {
  int ticks = src.last_tick();
  std::vector<SceneKind> kinds(static_cast<size_t>(ticks), SceneKind::navigation);
  if (ticks < 1) return kinds;
  SceneFlags flags = compute_flags(src, hero, dp.scene_window);
  for (int t = 1; t <= ticks; ++t) {
    kinds[static_cast<size_t>(t - 1)] = pick_kind(src, hero, flags, t, base_radius);
  }
  return kinds;
}

std::vector<Scene> identify_scenes(const ReplaySource& src, EntityId hero,
                                   const DataprepParams& dp, float base_radius) {
  std::vector<SceneKind> kinds = scene_per_tick(src, hero, dp, base_radius);
  std::vector<Scene> out;
  for (int t = 1; t <= static_cast<int>(kinds.size()); ++t) {
    SceneKind k = kinds[static_cast<size_t>(t - 1)];
    if (!out.empty() && out.back().kind == k && out.back().end_tick == t - 1) {
      out.back().end_tick = t;
    } else {
      out.push_back({k, hero, t, t});
    }
  }
  return out;
}

std::vector<Sample> tune_in_scene(std::vector<Sample> samples, SceneKind kind,
                                  const std::vector<float>& ratios, uint64_t seed) {
  if (ratios.empty()) throw DataError("tune_in_scene: empty ratio vector");
  for (float r : ratios) {
    if (r < 0.0f) throw DataError("tune_in_scene: negative ratio");
  }
  // Ratios cover the five tunable level-1 classes; return_base/idle are free.
  constexpr int kLinked = 5;
  std::array<std::vector<size_t>, kLinked> by_class;
  for (size_t i = 0; i < samples.size(); ++i) {
    int l1 = samples[i].labels.level1;
    if (l1 >= 0 && l1 < kLinked) by_class[static_cast<size_t>(l1)].push_back(i);
  }
  auto ratio_of = [&](int c) {
    return c < static_cast<int>(ratios.size()) ? ratios[static_cast<size_t>(c)] : 0.0f;
  };
  double scale = -1.0;
  for (int c = 0; c < kLinked; ++c) {
    float r = ratio_of(c);
    if (r <= 0.0f) continue;
    double s = static_cast<double>(by_class[static_cast<size_t>(c)].size()) / r;
    if (scale < 0.0 || s < scale) scale = s;
  }
  std::vector<uint8_t> keep(samples.size(), 1);
  if (scale >= 0.0) {
    // Largest-remainder rounding of the per-class quotas.
    std::array<double, kLinked> quota{};
    double total = 0.0;
    for (int c = 0; c < kLinked; ++c) {
      quota[static_cast<size_t>(c)] = ratio_of(c) > 0.0f ? scale * ratio_of(c) : 0.0;
      total += quota[static_cast<size_t>(c)];
    }
    std::array<long, kLinked> target{};
    long base_sum = 0;
    for (int c = 0; c < kLinked; ++c) {
      target[static_cast<size_t>(c)] = static_cast<long>(std::floor(quota[static_cast<size_t>(c)] + 1e-9));
      base_sum += target[static_cast<size_t>(c)];
    }
    long want = static_cast<long>(std::floor(total + 1e-9));
    long rem = want - base_sum;
    std::array<int, kLinked> order{0, 1, 2, 3, 4};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      double fa = quota[static_cast<size_t>(a)] - std::floor(quota[static_cast<size_t>(a)] + 1e-9);
      double fb = quota[static_cast<size_t>(b)] - std::floor(quota[static_cast<size_t>(b)] + 1e-9);
      return fa != fb ? fa > fb : a < b;
    });
    for (int c : order) {
      if (rem <= 0) break;
      if (target[static_cast<size_t>(c)] <
          static_cast<long>(by_class[static_cast<size_t>(c)].size())) {
        target[static_cast<size_t>(c)] += 1;
        rem -= 1;
      }
    }
    Rng rng(seed ^ (static_cast<uint64_t>(kind) << 56));
    for (int c = 0; c < kLinked; ++c) {
      auto& idx = by_class[static_cast<size_t>(c)];
      long t = ratio_of(c) > 0.0f ? target[static_cast<size_t>(c)]
                                  : static_cast<long>(idx.size());
      if (t >= static_cast<long>(idx.size())) continue;
      std::vector<size_t> pool = idx;
      rng.shuffle(pool);
      for (auto& i : idx) keep[i] = 0;
      for (long j = 0; j < t; ++j) keep[pool[static_cast<size_t>(j)]] = 1;
    }
  }
  std::vector<Sample> out;
  out.reserve(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    if (keep[i]) out.push_back(std::move(samples[i]));
  }
  return out;
}

std::vector<Sample> balance_scenes(std::vector<Sample> samples,
                                   const std::array<float, kNumScenes + 1>& overrides,
                                   uint64_t seed) {
  std::vector<EntityId> heroes;
  for (const auto& s : samples) {
    if (std::find(heroes.begin(), heroes.end(), s.actor) == heroes.end()) {
      heroes.push_back(s.actor);
    }
  }
  std::sort(heroes.begin(), heroes.end());
  std::vector<uint8_t> keep(samples.size(), 1);
  Rng rng(seed ^ 0x62616c616e636560ull);
  for (EntityId hero : heroes) {
    std::array<std::vector<size_t>, kNumScenes + 1> by_scene;
    for (size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].actor == hero) {
        by_scene[static_cast<size_t>(samples[i].scene)].push_back(i);
      }
    }
    size_t min_count = 0;
    bool any = false;
    for (int k = 1; k <= kNumScenes; ++k) {
      size_t n = by_scene[static_cast<size_t>(k)].size();
      if (n == 0) continue;
      min_count = any ? std::min(min_count, n) : n;
      any = true;
    }
    if (!any) continue;
    for (int k = 1; k <= kNumScenes; ++k) {
      auto& idx = by_scene[static_cast<size_t>(k)];
      size_t target = std::min(
          idx.size(), static_cast<size_t>(std::llround(static_cast<double>(min_count) *
                                                       overrides[static_cast<size_t>(k)])));
      if (target >= idx.size()) continue;
      std::vector<size_t> pool = idx;
      rng.shuffle(pool);
      for (auto& i : idx) keep[i] = 0;
      for (size_t j = 0; j < target; ++j) keep[pool[j]] = 1;
    }
  }
  std::vector<Sample> out;
  out.reserve(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    if (keep[i]) out.push_back(std::move(samples[i]));
  }
  return out;
}

std::vector<Sample> normalize_attack_samples(std::vector<Sample> samples, int k, int gap) {
  if (k < 1) throw DataError("normalize_attack_samples: k must be >= 1");
  struct Key {
    uint32_t replay;
    EntityId actor, target;
    bool operator<(const Key& o) const {
      return std::tie(replay, actor, target) < std::tie(o.replay, o.actor, o.target);
    }
  };
  std::map<Key, std::vector<size_t>> groups;
  for (size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    if (s.labels.level1 != static_cast<int>(Level1::normal_attack) || s.target == 0) continue;
    if (s.scene != SceneKind::combat && s.scene != SceneKind::push_turret) continue;
    groups[{s.replay_index, s.actor, s.target}].push_back(i);
  }
  std::vector<uint8_t> keep(samples.size(), 1);
  for (auto& [key, idx] : groups) {
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return samples[a].tick < samples[b].tick; });
    size_t start = 0;
    for (size_t i = 1; i <= idx.size(); ++i) {
      bool split = i == idx.size() || static_cast<int>(samples[idx[i]].tick) -
                                              static_cast<int>(samples[idx[i - 1]].tick) >
                                          gap;
      if (!split) continue;
      size_t len = i - start;
      size_t m = std::min(static_cast<size_t>(k), len);
      for (size_t j = start; j < i; ++j) keep[idx[j]] = 0;
      if (m == 1) {
        keep[idx[start]] = 1;
      } else {
        for (size_t j = 0; j < m; ++j) {
          size_t pick = start + j * (len - 1) / (m - 1);
          keep[idx[pick]] = 1;
        }
      }
      start = i;
    }
  }
  std::vector<Sample> out;
  out.reserve(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    if (keep[i]) out.push_back(std::move(samples[i]));
  }
  return out;
}

Dataset build_dataset(const std::vector<Replay>& replays, EntityId hero,
                      const BuildFilters& filters, const RunConfig& cfg, uint64_t seed) {
  std::vector<size_t> pool;
  for (size_t i = 0; i < replays.size(); ++i) {
    for (const auto& h : replays[i].rosters) {
      if (h.id == hero) {
        pool.push_back(i);
        break;
      }
    }
  }
  if (pool.empty()) throw DataError("build_dataset: hero absent from every replay");

  // Performance filter: keep the top (1 - quantile) share by the hero's score.
  std::vector<size_t> kept = pool;
  {
    std::sort(kept.begin(), kept.end(), [&](size_t a, size_t b) {
      float sa = 0.0f, sb = 0.0f;
      for (const auto& h : replays[a].rosters) {
        if (h.id == hero) sa = h.performance_score;
      }
      for (const auto& h : replays[b].rosters) {
        if (h.id == hero) sb = h.performance_score;
      }
      return sa != sb ? sa > sb : a < b;
    });
    size_t drop = static_cast<size_t>(std::floor(filters.quantile * static_cast<double>(kept.size())));
    size_t keep_n = kept.size() - std::min(drop, kept.size());
    if (keep_n == 0) throw DataError("build_dataset: empty pool after performance filter");
    kept.resize(keep_n);
    std::sort(kept.begin(), kept.end());
  }

  uint64_t raw_ticks = 0;
  std::vector<Sample> samples;
  for (size_t ri : kept) {
    const Replay& replay = replays[ri];
    raw_ticks += replay.tick_count;
    ReplaySource src(replay, cfg.map);
    std::vector<SceneKind> scenes = scene_per_tick(src, hero, cfg.dataprep, cfg.arena.base_radius);
    std::vector<int> globals = global_intent_labels(src, hero, cfg.grid, cfg.labeling);
    std::vector<int> locals = local_intent_labels(src, hero, cfg.grid, cfg.labeling);
    std::vector<std::pair<int, int>> actions =
        action_labels(replay, src, hero, scenes, cfg.grid, cfg.labeling);
    for (int t = 1; t <= static_cast<int>(replay.tick_count); ++t) {
      const auto& [l1, l2] = actions[static_cast<size_t>(t - 1)];
      if (l1 < 0 || l2 < 0) continue;
      const FrameEntity* me = find_entity(src.entities_at(t), hero);
      if (!me || !me->alive) continue;
      SceneKind scene = scenes[static_cast<size_t>(t - 1)];
      if (filters.scene_filter && scene != *filters.scene_filter) continue;
      Sample s;
      s.replay_index = static_cast<uint32_t>(ri);
      s.tick = static_cast<uint32_t>(t);
      s.scene = scene;
      s.labels = {l1, l2, globals[static_cast<size_t>(t - 1)], locals[static_cast<size_t>(t - 1)]};
      s.actor = hero;
      if (l1 == static_cast<int>(Level1::normal_attack) ||
          l1 == static_cast<int>(Level1::skill2)) {
        auto slots = build_target_slots(cfg.map, src.entities_at(t), hero,
                                        cfg.arena.targeting_radius, cfg.arena.vision_radius);
        if (static_cast<size_t>(l2) < slots.size()) s.target = slots[static_cast<size_t>(l2)];
      }
      samples.push_back(std::move(s));
    }
  }

  if (filters.apply_scene_sampling) {
    std::vector<Sample> staged;
    for (int k = 1; k <= kNumScenes; ++k) {
      std::vector<Sample> of_kind;
      for (auto& s : samples) {
        if (s.scene == static_cast<SceneKind>(k)) of_kind.push_back(std::move(s));
      }
      const auto& r = cfg.dataprep.scene_ratios[static_cast<size_t>(k)];
      std::vector<Sample> tuned = tune_in_scene(
          std::move(of_kind), static_cast<SceneKind>(k), {r.begin(), r.end()}, seed);
      for (auto& s : tuned) staged.push_back(std::move(s));
    }
    std::sort(staged.begin(), staged.end(), [](const Sample& a, const Sample& b) {
      return std::tie(a.replay_index, a.tick) < std::tie(b.replay_index, b.tick);
    });
    staged = normalize_attack_samples(std::move(staged), cfg.dataprep.attack_k,
                                      cfg.labeling.series_gap);
    staged = balance_scenes(std::move(staged), cfg.dataprep.scene_override, seed);
    samples = std::move(staged);
  }

  {
    size_t i = 0;
    while (i < samples.size()) {  // samples are replay-ordered at this point
      uint32_t ri = samples[i].replay_index;
      ReplaySource src(replays[ri], cfg.map);
      while (i < samples.size() && samples[i].replay_index == ri) {
        samples[i].features = build_feature_set(src, static_cast<int>(samples[i].tick), hero, cfg);
        ++i;
      }
    }
  }

  Rng rng(seed);
  rng.shuffle(samples);

  // Split by replay id so near-duplicate frames never straddle the split.
  std::vector<uint32_t> ids;
  for (const auto& s : samples) {
    if (std::find(ids.begin(), ids.end(), s.replay_index) == ids.end()) {
      ids.push_back(s.replay_index);
    }
  }
  std::sort(ids.begin(), ids.end());
  Rng split_rng(seed ^ 0x73706c6974ull);
  split_rng.shuffle(ids);
  size_t train_n = ids.size();
  if (ids.size() >= 2) {
    train_n = static_cast<size_t>(
        std::llround(cfg.dataprep.train_fraction * static_cast<double>(ids.size())));
    train_n = std::clamp(train_n, static_cast<size_t>(1), ids.size() - 1);
  }
  std::vector<uint8_t> is_train_id(replays.size(), 0);
  for (size_t i = 0; i < train_n; ++i) is_train_id[ids[i]] = 1;

  Dataset data;
  data.dims = feature_dims(cfg.grid);
  data.config_digest = config_digest(cfg);
  data.seed = seed;
  for (auto& s : samples) {
    (is_train_id[s.replay_index] ? data.train : data.test).push_back(std::move(s));
  }

  // Manifest: settings, per-scene/per-action counts, retention.
  std::ostringstream m;
  m << "seed = " << seed << "\n";
  m << "config_digest = " << data.config_digest << "\n";
  m << "hero = " << hero << "\n";
  m << "replays_in = " << replays.size() << "\n";
  m << "replays_kept = " << kept.size() << "\n";
  m << "filter_quantile = " << filters.quantile << "\n";
  m << "scene_sampling = " << (filters.apply_scene_sampling ? 1 : 0) << "\n";
  if (filters.scene_filter) m << "scene_filter = " << scene_name(*filters.scene_filter) << "\n";
  uint64_t retained = data.train.size() + data.test.size();
  m << "raw_ticks = " << raw_ticks << "\n";
  m << "retained_samples = " << retained << "\n";
  m << "retention_ratio = "
    << (raw_ticks > 0 ? static_cast<double>(retained) / static_cast<double>(raw_ticks) : 0.0)
    << "\n";
  std::array<std::array<uint64_t, kNumLevel1>, kNumScenes + 1> counts{};
  for (const auto* split : {&data.train, &data.test}) {
    for (const auto& s : *split) {
      counts[static_cast<size_t>(s.scene)][static_cast<size_t>(s.labels.level1)] += 1;
    }
  }
  for (int k = 1; k <= kNumScenes; ++k) {
    m << "count." << scene_name(static_cast<SceneKind>(k));
    for (int a = 0; a < kNumLevel1; ++a) {
      m << (a == 0 ? " = " : ", ") << counts[static_cast<size_t>(k)][static_cast<size_t>(a)];
    }
    m << "\n";
  }
  m << "train_samples = " << data.train.size() << "\n";
  m << "test_samples = " << data.test.size() << "\n";
  data.manifest = m.str();
  return data;
}

// --- Dataset file ---

namespace {

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
}
void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void put_f32(std::vector<uint8_t>& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

struct Cursor {
  const std::vector<uint8_t>& in;
  size_t pos = 0;
  void need(size_t n) const {
    if (pos + n > in.size()) throw DataError("truncated dataset file");
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
};

constexpr uint16_t kNoLabel16 = 0xffff;

uint16_t label16(int v) { return v < 0 ? kNoLabel16 : static_cast<uint16_t>(v); }
int label_int(uint16_t v) { return v == kNoLabel16 ? -1 : static_cast<int>(v); }

void put_sample(std::vector<uint8_t>& out, const Sample& s) {
  put_u32(out, s.replay_index);
  put_u32(out, s.tick);
  put_u16(out, static_cast<uint16_t>(s.scene));
  put_u16(out, label16(s.labels.level1));
  put_u16(out, label16(s.labels.level2));
  put_u16(out, label16(s.labels.global_intent));
  put_u16(out, label16(s.labels.local_intent));
  for (float w : s.weights) put_f32(out, w);
  put_u32(out, s.actor);
  put_u32(out, s.target);
  for (float v : s.features.vec) put_f32(out, v);
  for (float v : s.features.local) put_f32(out, v);
  for (float v : s.features.global) put_f32(out, v);
}

Sample get_sample(Cursor& c, const FeatureDims& dims) {
  Sample s;
  s.replay_index = c.u32();
  s.tick = c.u32();
  uint16_t scene = c.u16();
  if (scene < 1 || scene > kNumScenes) throw DataError("bad scene tag in dataset");
  s.scene = static_cast<SceneKind>(scene);
  s.labels.level1 = label_int(c.u16());
  s.labels.level2 = label_int(c.u16());
  s.labels.global_intent = label_int(c.u16());
  s.labels.local_intent = label_int(c.u16());
  for (auto& w : s.weights) w = c.f32();
  s.actor = c.u32();
  s.target = c.u32();
  s.features.vec.resize(static_cast<size_t>(dims.vec_size()));
  s.features.local.resize(static_cast<size_t>(dims.local_size()));
  s.features.global.resize(static_cast<size_t>(dims.global_size()));
  for (auto& v : s.features.vec) v = c.f32();
  for (auto& v : s.features.local) v = c.f32();
  for (auto& v : s.features.global) v = c.f32();
  return s;
}

std::vector<uint8_t> encode_dataset(const Dataset& data) {
  std::vector<uint8_t> out;
  for (char ch : kDatasetMagic) out.push_back(static_cast<uint8_t>(ch));
  put_u16(out, kDatasetVersion);
  put_u64(out, data.config_digest);
  put_u64(out, data.seed);
  put_u16(out, static_cast<uint16_t>(data.dims.local_m));
  put_u16(out, static_cast<uint16_t>(data.dims.global_n));
  put_u32(out, static_cast<uint32_t>(data.manifest.size()));
  out.insert(out.end(), data.manifest.begin(), data.manifest.end());
  put_u32(out, static_cast<uint32_t>(data.train.size()));
  put_u32(out, static_cast<uint32_t>(data.test.size()));
  for (const auto& s : data.train) put_sample(out, s);
  for (const auto& s : data.test) put_sample(out, s);
  return out;
}

}  // namespace

void write_dataset_file(const Dataset& data, const std::string& path) {
  std::vector<uint8_t> bytes = encode_dataset(data);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot open for write: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw DataError("short write: " + path);
}

Dataset read_dataset_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open dataset: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Cursor c{bytes};
  c.need(4);
  if (std::memcmp(bytes.data(), kDatasetMagic, 4) != 0) throw DataError("bad dataset magic");
  c.pos = 4;
  uint16_t version = c.u16();
  if (version != kDatasetVersion) throw DataError("unsupported dataset version");
  Dataset data;
  data.config_digest = c.u64();
  data.seed = c.u64();
  data.dims.local_m = c.u16();
  data.dims.global_n = c.u16();
  uint32_t mlen = c.u32();
  c.need(mlen);
  data.manifest.assign(bytes.begin() + static_cast<ptrdiff_t>(c.pos),
                       bytes.begin() + static_cast<ptrdiff_t>(c.pos + mlen));
  c.pos += mlen;
  uint32_t train_n = c.u32();
  uint32_t test_n = c.u32();
  data.train.reserve(train_n);
  data.test.reserve(test_n);
  for (uint32_t i = 0; i < train_n; ++i) data.train.push_back(get_sample(c, data.dims));
  for (uint32_t i = 0; i < test_n; ++i) data.test.push_back(get_sample(c, data.dims));
  if (c.pos != bytes.size()) throw DataError("trailing bytes in dataset file");
  return data;
}

uint64_t dataset_digest(const Dataset& data) {
  std::vector<uint8_t> bytes = encode_dataset(data);
  return fnv1a(bytes.data(), bytes.size());
}

}  // namespace moba
