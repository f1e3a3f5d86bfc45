#pragma once

#include <vector>

#include "moba/config.hpp"
#include "moba/view.hpp"

namespace moba {

constexpr int kVectorGroups = 11;
constexpr int kGroupWidth = 16;
constexpr int kLocalChannels = 8;
constexpr int kGlobalChannels = 8;

// Multimodal input for one hero at one tick, in the hero's canonical frame.
struct FeatureSet {
  std::vector<float> vec;     // kVectorGroups * kGroupWidth
  std::vector<float> local;   // kLocalChannels * m * m, [channel][row][col]
  std::vector<float> global;  // kGlobalChannels * n * n

  bool operator==(const FeatureSet&) const = default;
};

struct FeatureDims {
  int local_m = 13;
  int global_n = 12;
  int vec_size() const { return kVectorGroups * kGroupWidth; }
  int local_size() const { return kLocalChannels * local_m * local_m; }
  int global_size() const { return kGlobalChannels * global_n * global_n; }
  int total() const { return vec_size() + local_size() + global_size(); }
};

inline FeatureDims feature_dims(const GridSpec& grid) {
  return {grid.local_m, grid.global_n};
}

// Works identically on a live state window and on a decoded replay: the hero's
// observation at `tick`, with history read from earlier frames (clamped to the
// first available frame).
FeatureSet build_feature_set(const WorldSource& src, int tick, EntityId hero,
                             const RunConfig& cfg);

}  // namespace moba
