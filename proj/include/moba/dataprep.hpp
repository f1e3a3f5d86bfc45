#pragma once

#include <optional>
#include <string>
#include <vector>

#include "moba/config.hpp"
#include "moba/features.hpp"
#include "moba/labeling.hpp"
#include "moba/nn.hpp"
#include "moba/replay.hpp"

namespace moba {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A maximal run of ticks with one scene kind; ticks are inclusive. Per hero,
// scenes partition [1, tick_count].
struct Scene {
  SceneKind kind = SceneKind::navigation;
  EntityId hero = 0;
  int start_tick = 0;
  int end_tick = 0;
};

std::vector<Scene> identify_scenes(const ReplaySource& src, EntityId hero,
                                   const DataprepParams& dp, float base_radius);

// Convenience: per-tick kinds (index 0 <-> tick 1).
std::vector<SceneKind> scene_per_tick(const ReplaySource& src, EntityId hero,
                                      const DataprepParams& dp, float base_radius);

struct Sample {
  uint32_t replay_index = 0;
  uint32_t tick = 0;
  SceneKind scene = SceneKind::navigation;
  SampleLabels labels;
  std::array<float, 4> weights{1.0f, 1.0f, 1.0f, 1.0f};
  EntityId actor = 0;
  EntityId target = 0;  // resolved attack/skill target, 0 = none
  FeatureSet features;  // filled by the feature-extraction stage
};

// Downsamples one scene's samples so the level-1 class counts sit at the
// largest-remainder rounding of the given ratios, limited by the scarcest
// ratio-linked class. return_base and idle are never touched.
std::vector<Sample> tune_in_scene(std::vector<Sample> samples, SceneKind kind,
                                  const std::vector<float>& ratios, uint64_t seed);

// Per hero, downsamples every present scene to the minimum per-scene count
// times its override multiplier (capped at availability).
std::vector<Sample> balance_scenes(std::vector<Sample> samples,
                                   const std::array<float, kNumScenes + 1>& overrides,
                                   uint64_t seed);

// Caps each attacking process (same actor, same target, gaps <= gap ticks) at
// k evenly spaced samples. Applies to attack samples in Combat and PushTurret.
std::vector<Sample> normalize_attack_samples(std::vector<Sample> samples, int k, int gap);

struct Dataset {
  FeatureDims dims;
  uint64_t config_digest = 0;
  uint64_t seed = 0;
  std::string manifest;
  std::vector<Sample> train;
  std::vector<Sample> test;
};

struct BuildFilters {
  float quantile = 0.5f;                   // keep the top (1-quantile) share by score
  std::optional<SceneKind> scene_filter;   // fine-tune flow: keep one scene only
  bool apply_scene_sampling = true;        // ablation switch
};

Dataset build_dataset(const std::vector<Replay>& replays, EntityId hero,
                      const BuildFilters& filters, const RunConfig& cfg, uint64_t seed);

constexpr char kDatasetMagic[4] = {'M', 'D', 'S', 'T'};
constexpr uint16_t kDatasetVersion = 1;

void write_dataset_file(const Dataset& data, const std::string& path);
Dataset read_dataset_file(const std::string& path);
uint64_t dataset_digest(const Dataset& data);  // digest of the encoded bytes

}  // namespace moba
