#pragma once

#include <memory>

#include "moba/arena.hpp"
#include "moba/features.hpp"
#include "moba/nn.hpp"
#include "moba/train.hpp"

namespace moba {

// Legality of decode targets in the observed state.
struct LegalityView {
  int slot_count = 0;
  std::array<bool, 3> skill_ready{false, false, false};
};

// Two-step hierarchical decode: argmax level-1, then argmax within that head,
// falling back through the remaining level-1 classes by probability when the
// preferred decode is illegal (no target slot, skill on cooldown). move is
// always legal, so the chain terminates. Returns a canonical-frame action.
HeroAction decode_with_fallback(const Prediction& p, const LegalityView& legal);

// Online controller for one hero: observes the world with a fixed delay,
// builds features, runs the network, decodes an action. Instances share an
// immutable network; each instance is used from one thread.
class Agent {
 public:
  Agent(std::shared_ptr<const Network> net, const RunConfig& cfg, FeatureMask mask = {});

  int total_delay() const {
    return cfg_.runtime.observation_delay + cfg_.runtime.reaction_delay;
  }

  // Action for the step the caller is about to take (applied at tick
  // state.tick + 1), a pure function of the frame at applied_tick - delay.
  // Idle until that frame exists.
  HeroAction act(const GameState& state, EntityId hero);

 private:
  std::shared_ptr<const Network> net_;
  RunConfig cfg_;
  FeatureMask mask_;
  ActivationsT<float> act_;
  std::vector<float> zero_vec_, zero_local_, zero_global_;
};

}  // namespace moba
