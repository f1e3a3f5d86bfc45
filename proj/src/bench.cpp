#include "moba/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

#include <json.hpp>

#include "moba/train.hpp"

namespace moba {

namespace {

// Continued fraction for the incomplete beta function (Lentz's method).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                 b * std::log(1.0 - x);
  double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * betacf(a, b, x) / a;
  }
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

namespace {

// Smallest x with I_x(a, b) >= p, found by bisection to 1e-9.
double beta_quantile(double p, double a, double b) {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 60 && hi - lo > 1e-9; ++i) {
    double mid = 0.5 * (lo + hi);
    if (regularized_incomplete_beta(a, b, mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::pair<double, double> exact_binomial_ci(long successes, long n, double confidence) {
  if (n < 1) throw BenchError("exact_binomial_ci: n must be >= 1");
  if (successes < 0 || successes > n) throw BenchError("exact_binomial_ci: successes out of range");
  if (confidence <= 0.0 || confidence >= 1.0) throw BenchError("exact_binomial_ci: bad confidence");
  double alpha = 1.0 - confidence;
  double s = static_cast<double>(successes);
  double nn = static_cast<double>(n);
  double low = successes == 0 ? 0.0 : beta_quantile(alpha / 2.0, s, nn - s + 1.0);
  double high = successes == n ? 1.0 : beta_quantile(1.0 - alpha / 2.0, s + 1.0, nn - s);
  return {low, high};
}

namespace {

MatchRecord play_match(const TeamSpec& team_a, const TeamSpec& team_b, int index, uint64_t seed,
                       const RunConfig& cfg, const std::string& dump_dir) {
  MatchRecord rec;
  rec.index = index;
  rec.seed = seed;
  rec.a_is_blue = index % 2 == 0;
  const TeamSpec& blue = rec.a_is_blue ? team_a : team_b;
  const TeamSpec& red = rec.a_is_blue ? team_b : team_a;
  int r = cfg.roster_size;
  Rosters rosters{r, r};

  auto hero_policy = [&](const TeamSpec& team, int slot) -> const HeroPolicy& {
    return team.heroes[static_cast<size_t>(slot) % team.heroes.size()];
  };
  std::vector<PolicyTier> tiers;
  std::vector<std::unique_ptr<Agent>> agents(static_cast<size_t>(2 * r));
  for (int i = 0; i < 2 * r; ++i) {
    const TeamSpec& team = i < r ? blue : red;
    const HeroPolicy& hp = hero_policy(team, i % r);
    if (hp.model) {
      tiers.push_back(PolicyTier::external);
      agents[static_cast<size_t>(i)] = std::make_unique<Agent>(hp.model, cfg, hp.mask);
    } else {
      tiers.push_back(hp.tier);
    }
  }
  PolicyFn policy = [&](GameState& s, EntityId id) -> HeroAction {
    auto& agent = agents[static_cast<size_t>(id - 1)];
    if (agent) return agent->act(s, id);
    return scripted_policy(s, id, tiers[static_cast<size_t>(id - 1)]);
  };
  Replay replay =
      run_match(cfg.map, cfg.arena, rosters, tiers, policy, seed, cfg.arena.max_ticks);
  if (!dump_dir.empty()) {
    char name[64];
    std::snprintf(name, sizeof(name), "/match_%04d.mrpl", index);
    write_replay_file(replay, dump_dir + name);
  }

  rec.duration_ticks = replay.tick_count;
  rec.result = replay.result;
  if (replay.result == GameResult::blue_win) {
    rec.winner = rec.a_is_blue ? 0 : 1;
  } else if (replay.result == GameResult::red_win) {
    rec.winner = rec.a_is_blue ? 1 : 0;
  } else {
    rec.winner = -1;
  }

  auto side_of_team = [&](Team t) { return (t == Team::blue) == rec.a_is_blue ? 0 : 1; };
  ReplaySource src(replay, cfg.map);
  for (const auto& ev : replay.events) {
    if (!ev.has_target) continue;
    auto frame = src.entities_at(static_cast<int>(ev.tick));
    const FrameEntity* victim = find_entity(frame, ev.target);
    const FrameEntity* actor = find_entity(frame, ev.actor);
    if (!victim || !actor) continue;
    if (ev.kind == EventKind::kill && victim->kind == EntityKind::hero &&
        actor->team != Team::neutral && actor->team != victim->team) {
      rec.kills[side_of_team(actor->team)] += 1;
    }
    if (ev.kind == EventKind::turret_destroyed && victim->team != Team::neutral) {
      rec.turrets[side_of_team(other_team(victim->team))] += 1;
    }
    if (ev.kind == EventKind::kill && victim->kind == EntityKind::monster &&
        actor->team != Team::neutral) {
      rec.monsters[side_of_team(actor->team)] += 1;
    }
  }
  if (replay.tick_count > 0) {
    double minutes = static_cast<double>(replay.tick_count) /
                     (static_cast<double>(cfg.arena.ticks_per_second) * 60.0);
    const auto& final_frame = replay.frames.back();
    double gold[2] = {0.0, 0.0};
    for (const auto& e : final_frame) {
      if (e.kind == EntityKind::hero) gold[side_of_team(e.team)] += e.gold;
    }
    if (minutes > 0.0) {
      rec.gold_per_min[0] = gold[0] / minutes;
      rec.gold_per_min[1] = gold[1] / minutes;
    }
  }
  return rec;
}

}  // namespace

MatchStats run_tournament(const TeamSpec& team_a, const TeamSpec& team_b, int n, uint64_t seed,
                          const RunConfig& cfg, int threads, const std::string& dump_dir) {
  if (n < 1) throw BenchError("run_tournament: n must be >= 1");
  if (team_a.heroes.empty() || team_b.heroes.empty()) {
    throw BenchError("run_tournament: empty team spec");
  }
  int workers = threads > 0
                    ? threads
                    : static_cast<int>(std::clamp(std::thread::hardware_concurrency(), 1u, 8u));
  workers = std::min(workers, n);

  MatchStats stats;
  stats.matches = n;
  stats.records.resize(static_cast<size_t>(n));
  auto run = [&](int wid) {
    for (int i = wid; i < n; i += workers) {
      stats.records[static_cast<size_t>(i)] =
          play_match(team_a, team_b, i, seed + static_cast<uint64_t>(i), cfg, dump_dir);
    }
  };
  std::vector<std::thread> pool;
  for (int wid = 1; wid < workers; ++wid) pool.emplace_back(run, wid);
  run(0);
  for (auto& t : pool) t.join();

  double dur = 0.0;
  for (const auto& rec : stats.records) {
    if (rec.winner == 0) stats.wins_a += 1;
    if (rec.winner == 1) stats.wins_b += 1;
    if (rec.winner < 0) stats.ties += 1;
    for (int s = 0; s < 2; ++s) {
      stats.mean_kills[s] += rec.kills[s];
      stats.mean_gold_per_min[s] += rec.gold_per_min[s];
      stats.mean_turrets[s] += rec.turrets[s];
      stats.mean_monsters[s] += rec.monsters[s];
    }
    dur += static_cast<double>(rec.duration_ticks);
  }
  for (int s = 0; s < 2; ++s) {
    stats.mean_kills[s] /= n;
    stats.mean_gold_per_min[s] /= n;
    stats.mean_turrets[s] /= n;
    stats.mean_monsters[s] /= n;
  }
  stats.mean_duration_min =
      dur / n / (static_cast<double>(cfg.arena.ticks_per_second) * 60.0);
  stats.win_rate =
      (static_cast<double>(stats.wins_a) + 0.5 * static_cast<double>(stats.ties)) /
      static_cast<double>(n);
  long s_for_ci = stats.wins_a + stats.ties / 2;
  auto [lo, hi] = exact_binomial_ci(s_for_ci, n, cfg.bench.confidence);
  stats.ci_low = lo;
  stats.ci_high = hi;
  return stats;
}

std::string format_table(const MatchStats& st, const std::string& a, const std::string& b) {
  char buf[256];
  std::string out;
  out += "Tournament        " + a + " vs " + b + "\n";
  std::snprintf(buf, sizeof(buf), "Matches           %d (ties %d)\n", st.matches, st.ties);
  out += buf;
  std::snprintf(buf, sizeof(buf), "Win rate [CI]     %.2f [%.2f; %.2f]\n", st.win_rate,
                st.ci_low, st.ci_high);
  out += buf;
  std::snprintf(buf, sizeof(buf), "Team kill         %.1f : %.1f\n", st.mean_kills[0],
                st.mean_kills[1]);
  out += buf;
  std::snprintf(buf, sizeof(buf), "Game duration     %.1f mins\n", st.mean_duration_min);
  out += buf;
  std::snprintf(buf, sizeof(buf), "Gold per min      %.2fk : %.2fk\n",
                st.mean_gold_per_min[0] / 1000.0, st.mean_gold_per_min[1] / 1000.0);
  out += buf;
  std::snprintf(buf, sizeof(buf), "Turret            %.1f : %.1f\n", st.mean_turrets[0],
                st.mean_turrets[1]);
  out += buf;
  std::snprintf(buf, sizeof(buf), "Monsters          %.1f : %.1f\n", st.mean_monsters[0],
                st.mean_monsters[1]);
  out += buf;
  return out;
}

std::string format_jsonl(const MatchStats& st, const std::string& a, const std::string& b) {
  std::string out;
  for (const auto& rec : st.records) {
    nlohmann::json j;
    j["match"] = rec.index;
    j["seed"] = rec.seed;
    j["blue"] = rec.a_is_blue ? a : b;
    j["red"] = rec.a_is_blue ? b : a;
    j["winner"] = rec.winner == 0 ? a : (rec.winner == 1 ? b : "tie");
    j["duration_ticks"] = rec.duration_ticks;
    j["kills"] = {rec.kills[0], rec.kills[1]};
    j["turrets"] = {rec.turrets[0], rec.turrets[1]};
    j["monsters"] = {rec.monsters[0], rec.monsters[1]};
    j["gold_per_min"] = {rec.gold_per_min[0], rec.gold_per_min[1]};
    out += j.dump() + "\n";
  }
  nlohmann::json summary;
  summary["summary"] = true;
  summary["team_a"] = a;
  summary["team_b"] = b;
  summary["matches"] = st.matches;
  summary["wins_a"] = st.wins_a;
  summary["wins_b"] = st.wins_b;
  summary["ties"] = st.ties;
  summary["win_rate_a"] = st.win_rate;
  summary["ci"] = {st.ci_low, st.ci_high};
  out += summary.dump() + "\n";
  return out;
}

AblationReport run_ablation(const Dataset& full_data, const std::vector<Replay>* replays,
                            EntityId hero, const RunConfig& cfg,
                            const std::vector<std::string>& switches, uint64_t seed,
                            const Network* full_model) {
  static const std::vector<std::string> kKnown = {"scene_sampling", "macro_aux", "local_image",
                                                  "global_image", "vector"};
  for (const auto& sw : switches) {
    if (std::find(kKnown.begin(), kKnown.end(), sw) == kKnown.end()) {
      throw BenchError("run_ablation: unknown switch '" + sw + "'");
    }
  }

  NetDims dims = net_dims(cfg.grid);
  std::shared_ptr<Network> full;
  if (full_model) {
    full = std::make_shared<Network>(*full_model);
  } else {
    full = std::make_shared<Network>(dims);
    full->init_params(seed);
    TrainOptions opts;
    opts.params = cfg.train;
    opts.seed = seed;
    train_model(*full, full_data, opts, nullptr);
  }

  AblationReport report;
  TeamSpec full_team{"full", {HeroPolicy{PolicyTier::external, full, {}}}};

  // Baseline row: the full model against itself (the tournament null).
  if (switches.empty()) {
    MatchStats st = run_tournament(full_team, full_team, cfg.bench.matches, seed, cfg);
    report.rows.push_back({"full", st.win_rate, st.ci_low, st.ci_high, st.matches});
  }

  int variant_idx = 0;
  for (const auto& sw : switches) {
    ++variant_idx;
    TrainOptions opts;
    opts.params = cfg.train;
    opts.seed = seed;
    FeatureMask mask;
    const Dataset* data = &full_data;
    Dataset rebuilt;
    if (sw == "scene_sampling") {
      if (!replays) {
        throw BenchError("run_ablation: scene_sampling needs the replay pool to rebuild data");
      }
      BuildFilters filters;
      filters.quantile = cfg.dataprep.filter_quantile;
      filters.apply_scene_sampling = false;
      rebuilt = build_dataset(*replays, hero, filters, cfg, seed);
      // Identical data budget: cap the unsampled split at the full split size.
      Rng rng(seed ^ 0x61626c617465ull);
      rng.shuffle(rebuilt.train);
      if (rebuilt.train.size() > full_data.train.size()) {
        rebuilt.train.resize(full_data.train.size());
      }
      data = &rebuilt;
    } else if (sw == "macro_aux") {
      opts.params.w_bg = 0.0f;
      opts.params.w_bl = 0.0f;
      opts.params.stop_intent_gradient = 1;
    } else if (sw == "local_image") {
      mask.zero_local = true;
    } else if (sw == "global_image") {
      mask.zero_global = true;
    } else if (sw == "vector") {
      mask.zero_vector = true;
    }
    opts.mask = mask;

    auto variant = std::make_shared<Network>(dims);
    variant->init_params(seed);

    if (sw == "macro_aux") {
      // Probe: with the auxiliary losses off and the intent softmax detached,
      // one batch of backprop must leave both intent heads' gradients at zero.
      Network probe(dims);
      probe.init_params(seed);
      probe.zero_grad();
      ActivationsT<float> act(dims);
      size_t probe_n = std::min<size_t>(64, data->train.size());
      LossWeights w{opts.params.w_a0, opts.params.w_a1, opts.params.w_bg, opts.params.w_bl};
      for (size_t i = 0; i < probe_n; ++i) {
        const Sample& s = data->train[i];
        probe.forward(s.features.vec.data(), s.features.local.data(), s.features.global.data(),
                      act);
        probe.backward(act, s.features.vec.data(), s.features.local.data(),
                       s.features.global.data(), s.labels, w, true);
      }
      bool all_zero = true;
      for (const auto* t : {&probe.intent_global.w, &probe.intent_global.b,
                            &probe.intent_local.w, &probe.intent_local.b}) {
        for (float gv : t->g) {
          if (gv != 0.0f) all_zero = false;
        }
      }
      report.notes.push_back(std::string("macro_aux gradient probe: intent heads ") +
                             (all_zero ? "received zero gradient" : "RECEIVED GRADIENT"));
      if (!all_zero) throw BenchError("macro_aux ablation leaks gradient into the intent heads");
    }

    train_model(*variant, *data, opts, nullptr);

    TeamSpec variant_team{sw, {HeroPolicy{PolicyTier::external, variant, mask}}};
    MatchStats st = run_tournament(variant_team, full_team, cfg.bench.matches,
                                   seed + static_cast<uint64_t>(variant_idx) * 100000ull, cfg);
    report.rows.push_back({sw, st.win_rate, st.ci_low, st.ci_high, st.matches});
  }

  std::string table = "Ablation                    Win rate vs full [CI]\n";
  for (const auto& row : report.rows) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "w/o %-24s%.2f [%.2f; %.2f]\n", row.variant.c_str(),
                  row.win_rate_vs_full, row.ci_low, row.ci_high);
    table += buf;
  }
  report.table_text = table;
  return report;
}

}  // namespace moba
