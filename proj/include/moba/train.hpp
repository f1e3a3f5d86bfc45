#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "moba/dataprep.hpp"
#include "moba/nn.hpp"

namespace moba {

// Optimizer state, one (m, v) pair per parameter tensor in for_each order.
struct AdamState {
  std::vector<std::vector<float>> m;
  std::vector<std::vector<float>> v;
  int64_t step = 0;
};

AdamState make_adam_state(const Network& net);

// Bias-corrected Adam update over the accumulated gradients, with the L2 term
// applied as grad += 2*lambda*theta. Throws on non-finite gradients.
void adam_step(Network& net, AdamState& state, const TrainParams& tp);

// Which input modalities are fed as zeros (feature-ablation switches).
struct FeatureMask {
  bool zero_vector = false;
  bool zero_local = false;
  bool zero_global = false;
};

struct TrainOptions {
  TrainParams params;
  FeatureMask mask;
  uint64_t seed = 1;
};

// Minibatch training over the dataset's train split; per-epoch rows for train
// and test are appended to `log` as `epoch, split, loss, acc_level1,
// acc_level2, acc_global, acc_local` lines.
void train_model(Network& net, const Dataset& data, const TrainOptions& opts,
                 std::vector<std::string>* log);

struct EvalStats {
  double loss = 0.0;
  double acc_level1 = 0.0;
  double acc_level2 = 0.0;
  double acc_global = 0.0;
  double acc_local = 0.0;
};

EvalStats evaluate(const Network& net, const std::vector<Sample>& samples,
                   const TrainParams& tp, const FeatureMask& mask);

constexpr char kCheckpointMagic[4] = {'M', 'C', 'K', 'P'};
constexpr uint16_t kCheckpointVersion = 1;

void save_checkpoint(const Network& net, const std::string& path, uint64_t config_digest);
// Returns the stored config digest; throws on architecture mismatch.
uint64_t load_checkpoint(Network& net, const std::string& path);
std::vector<uint8_t> encode_checkpoint(const Network& net, uint64_t config_digest);

// Central finite differences against the analytic gradient in 64-bit mode.
// Returns the max relative error over sampled coordinates of every parameter
// tensor; relative error is |a-n| / max(|a|+|n|, 1e-3).
double gradient_check(uint64_t seed, const GridSpec& grid, int coords_per_tensor = 12);

}  // namespace moba
