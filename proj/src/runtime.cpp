#include "moba/runtime.hpp"

#include <algorithm>

namespace moba {

namespace {

int argmax_n(const std::vector<float>& v, int n) {
  int best = 0;
  for (int i = 1; i < n && i < static_cast<int>(v.size()); ++i) {
    if (v[static_cast<size_t>(i)] > v[static_cast<size_t>(best)]) best = i;
  }
  return best;
}

}  // namespace

HeroAction decode_with_fallback(const Prediction& p, const LegalityView& legal) {
  std::array<int, kNumLevel1> order{0, 1, 2, 3, 4, 5, 6};
  std::sort(order.begin(), order.end(), [&p](int a, int b) {
    float pa = p.level1[static_cast<size_t>(a)];
    float pb = p.level1[static_cast<size_t>(b)];
    return pa != pb ? pa > pb : a < b;
  });
  for (int cls : order) {
    Level1 l1 = static_cast<Level1>(cls);
    const auto& head = p.level2[static_cast<size_t>(cls)];
    switch (l1) {
      case Level1::move:
        return {l1, static_cast<uint16_t>(argmax_n(head, kNumMoveBins))};
      case Level1::normal_attack:
        if (legal.slot_count > 0) {
          return {l1, static_cast<uint16_t>(argmax_n(head, legal.slot_count))};
        }
        break;
      case Level1::skill1:
        if (legal.skill_ready[0]) {
          return {l1, static_cast<uint16_t>(argmax_n(head, kNumMoveBins))};
        }
        break;
      case Level1::skill2:
        if (legal.skill_ready[1] && legal.slot_count > 0) {
          return {l1, static_cast<uint16_t>(argmax_n(head, legal.slot_count))};
        }
        break;
      case Level1::skill3:
        if (legal.skill_ready[2]) {
          return {l1, static_cast<uint16_t>(argmax_n(head, static_cast<int>(head.size())))};
        }
        break;
      case Level1::return_base:
      case Level1::idle:
        return {l1, 0};
    }
  }
  return {Level1::move, 0};  // unreachable: move is always legal
}

Agent::Agent(std::shared_ptr<const Network> net, const RunConfig& cfg, FeatureMask mask)
    : net_(std::move(net)),
      cfg_(cfg),
      mask_(mask),
      act_(net_->dims()),
      zero_vec_(static_cast<size_t>(feature_dims(cfg.grid).vec_size()), 0.0f),
      zero_local_(static_cast<size_t>(feature_dims(cfg.grid).local_size()), 0.0f),
      zero_global_(static_cast<size_t>(feature_dims(cfg.grid).global_size()), 0.0f) {
  if (net_->dims().local_m != cfg.grid.local_m || net_->dims().global_n != cfg.grid.global_n) {
    throw NnError("agent: checkpoint architecture does not match the configured grid");
  }
}

HeroAction Agent::act(const GameState& state, EntityId hero) {
  int applied_tick = static_cast<int>(state.tick) + 1;
  int obs_tick = applied_tick - total_delay();
  if (state.frame_ring.empty() || obs_tick < static_cast<int>(state.ring_base)) {
    return {Level1::idle, 0};  // delay warm-up
  }
  LiveSource src(state);
  FeatureSet fs = build_feature_set(src, obs_tick, hero, cfg_);
  const float* vec = mask_.zero_vector ? zero_vec_.data() : fs.vec.data();
  const float* local = mask_.zero_local ? zero_local_.data() : fs.local.data();
  const float* global = mask_.zero_global ? zero_global_.data() : fs.global.data();
  net_->forward(vec, local, global, act_);
  Prediction p = net_->predict(act_);

  auto frame = src.entities_at(obs_tick);
  const FrameEntity* me = find_entity(frame, hero);
  LegalityView legal;
  if (me && me->alive) {
    legal.slot_count = static_cast<int>(build_target_slots(cfg_.map, frame, hero,
                                                           cfg_.arena.targeting_radius,
                                                           cfg_.arena.vision_radius)
                                            .size());
    for (int k = 0; k < 3; ++k) legal.skill_ready[static_cast<size_t>(k)] = me->cooldowns[static_cast<size_t>(k)] == 0;
  }
  HeroAction canon = decode_with_fallback(p, legal);

  Team team = me ? me->team : Team::blue;
  HeroAction world = canon;
  switch (canon.level1) {
    case Level1::move:
    case Level1::skill1:
      world.level2 = static_cast<uint16_t>(canon_dir_bin(team, canon.level2));
      break;
    case Level1::skill3:
      world.level2 =
          static_cast<uint16_t>(canon_grid_cell(team, canon.level2, cfg_.grid.local_m));
      break;
    default:
      break;
  }
  return world;
}

}  // namespace moba
