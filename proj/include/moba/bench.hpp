#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "moba/dataprep.hpp"
#include "moba/replay.hpp"
#include "moba/runtime.hpp"

namespace moba {

struct BenchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Clopper-Pearson exact binomial interval from Beta quantiles, computed by
// bisection on the regularized incomplete beta function to 1e-9.
std::pair<double, double> exact_binomial_ci(long successes, long n, double confidence);
double regularized_incomplete_beta(double a, double b, double x);

// One hero's controller in a tournament team.
struct HeroPolicy {
  PolicyTier tier = PolicyTier::expert;            // used unless model is set
  std::shared_ptr<const Network> model;            // overrides tier
  FeatureMask mask;                                // feature ablations
};

struct TeamSpec {
  std::string name;
  std::vector<HeroPolicy> heroes;  // resized/cycled to the roster size
};

struct MatchRecord {
  int index = 0;
  uint64_t seed = 0;
  bool a_is_blue = true;
  GameResult result = GameResult::ongoing;
  int winner = -1;  // 0 = team A, 1 = team B, -1 = tie
  uint32_t duration_ticks = 0;
  int kills[2] = {0, 0};           // by team A / team B
  double gold_per_min[2] = {0, 0};
  int turrets[2] = {0, 0};
  int monsters[2] = {0, 0};
};

struct MatchStats {
  int matches = 0;
  int wins_a = 0, wins_b = 0, ties = 0;
  double win_rate = 0.0;            // ties count as half wins
  double ci_low = 0.0, ci_high = 1.0;
  double mean_kills[2] = {0, 0};
  double mean_duration_min = 0.0;
  double mean_gold_per_min[2] = {0, 0};
  double mean_turrets[2] = {0, 0};
  double mean_monsters[2] = {0, 0};
  std::vector<MatchRecord> records;
};

// Plays n matches with seeds seed..seed+n-1, sides swapped on odd indices.
// Matches run concurrently; aggregation is ordered by match index. A non-empty
// dump_dir receives one .mrpl file per match.
MatchStats run_tournament(const TeamSpec& team_a, const TeamSpec& team_b, int n, uint64_t seed,
                          const RunConfig& cfg, int threads = 0,
                          const std::string& dump_dir = "");

std::string format_table(const MatchStats& stats, const std::string& a_name,
                         const std::string& b_name);
std::string format_jsonl(const MatchStats& stats, const std::string& a_name,
                         const std::string& b_name);

struct AblationRow {
  std::string variant;
  double win_rate_vs_full = 0.0;
  double ci_low = 0.0, ci_high = 1.0;
  int matches = 0;
};

struct AblationReport {
  std::vector<AblationRow> rows;
  std::vector<std::string> notes;  // e.g. the macro-head gradient probe result
  std::string table_text;
};

// Trains one model per switch on an identical data budget and seed, then
// plays each against the full model. Valid switches: scene_sampling,
// macro_aux, local_image, global_image, vector. scene_sampling needs the
// replay pool to rebuild an unsampled dataset.
AblationReport run_ablation(const Dataset& full_data, const std::vector<Replay>* replays,
                            EntityId hero, const RunConfig& cfg,
                            const std::vector<std::string>& switches, uint64_t seed,
                            const Network* full_model = nullptr);

}  // namespace moba
