#pragma once

/**
 * Seeded batch execution: one agent, one environment, NB_SIMULATIONS
 * trials with consecutive seeds, aggregated into a summary row and
 * optionally written out as CSV. Each trial owns its RNG, agent and
 * environment; aggregation is a deterministic fold in seed order.
 */

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "btai/belief_chain.hpp"
#include "btai/bench/config.hpp"
#include "btai/env/deep_reward.hpp"
#include "btai/env/dsprites.hpp"
#include "btai/env/grid.hpp"
#include "btai/exhaustive.hpp"
#include "btai/planner.hpp"
#include "btai/pomcp.hpp"
#include "btai/vmp.hpp"

namespace btai::bench {

struct TrialRecord {
  std::uint64_t seed = 0;
  bool success = false;
  std::optional<double> terminal_reward;
  std::size_t steps = 0;
  double seconds = 0.0;
  std::string error;  // empty unless the trial aborted (e.g. budget exceeded)
};

struct SummaryRow {
  std::string env;
  std::string agent;
  std::size_t planning_iterations = 0;
  double p_success = 0.0;
  double p_failure = 0.0;
  std::optional<double> p_solved;
  double mean_time_s = 0.0;
  double std_time_s = 0.0;
  std::uint64_t seed = 0;
};

using Rng = std::mt19937_64;

namespace detail {

/// The observe / infer / plan / act loop shared by every planner task.
/// The environment adapter supplies reset, step, and the success flag.
template <typename EnvAdapter>
TrialRecord run_btai_trial(EnvAdapter& env, const ModelTensors& m,
                           const Preferences& prefs, const ExperimentConfig& cfg,
                           std::uint64_t seed) {
  TrialRecord rec;
  rec.seed = seed;
  Rng rng(seed);
  const auto start_time = std::chrono::steady_clock::now();

  std::size_t obs = env.reset(rng);
  BeliefChain chain = BeliefChain::start(m, obs);
  PlanTree tree = PlanTree::fresh(m.n_states(), m.n_obs());
  vmp::run_vmp(chain, tree, m);

  const PlannerConfig planner_cfg = cfg.planner();
  for (std::size_t cycle = 1; cycle <= cfg.nb_cycles; ++cycle) {
    plan(tree, chain, m, prefs, planner_cfg);
    const std::size_t u = select_action(*tree.root, planner_cfg, rng);
    const auto out = env.step(u, rng);
    rec.steps = cycle;
    if (out.terminal) {
      rec.terminal_reward = out.reward;
      break;
    }
    if (env.succeeded()) break;
    if (env.settled()) break;  // absorbing failure: the outcome cannot change
    auto [next_chain, next_tree] =
        integrate_step(std::move(chain), std::move(tree), u,
                       one_hot(out.observation, m.n_obs(), kObsAxis), m);
    chain = std::move(next_chain);
    tree = std::move(next_tree);
    vmp::run_vmp(chain, tree, m);
  }

  rec.success = env.succeeded();
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              start_time)
                    .count();
  return rec;
}

struct DeepAdapter {
  env::DeepRewardEnv env;

  template <typename R>
  std::size_t reset(R& rng) {
    env.reset();
    return env.observe(rng);
  }
  template <typename R>
  env::EnvOutcome step(std::size_t u, R& rng) {
    return {env.step(u, rng), 0.0, false};
  }
  bool succeeded() const { return env.at_goal(); }
  bool settled() const { return env.trapped(); }
};

struct MazeAdapter {
  const env::GridTask& task;
  env::Coord pos;
  bool reached = false;

  template <typename R>
  std::size_t reset(R&) {
    pos = task.spec.start;
    reached = false;
    return env::maze_observe(task.spec, pos);
  }
  template <typename R>
  env::EnvOutcome step(std::size_t u, R&) {
    pos = env::maze_step(task.spec, pos, static_cast<env::GridAction>(u));
    reached = reached || pos == task.spec.goal;
    return {env::maze_observe(task.spec, pos), 0.0, false};
  }
  bool succeeded() const { return reached; }
  bool settled() const { return false; }
};

struct LakeAdapter {
  const env::GridTask& task;
  const env::LakeDynamics& dyn;
  std::size_t state = 0;
  bool reached = false;

  template <typename R>
  std::size_t reset(R&) {
    state = dyn.start_state();
    reached = false;
    return state;
  }
  template <typename R>
  env::EnvOutcome step(std::size_t u, R&) {
    state = dyn.next_state(state, u);
    reached = reached || state == dyn.goal_state();
    return {state, dyn.reward(state), false};
  }
  bool succeeded() const { return reached; }
  bool settled() const { return false; }
};

struct DSpritesAdapter {
  env::DSpritesEnv env;

  template <typename R>
  std::size_t reset(R& rng) {
    return env.reset(rng);
  }
  template <typename R>
  env::EnvOutcome step(std::size_t u, R&) {
    return env.step(u);
  }
  bool succeeded() const { return env.terminal(); }
  bool settled() const { return false; }
};

/// Deterministic lake simulator for the sampling baseline.
struct LakeSim {
  const env::LakeDynamics& dyn;
  std::size_t n_actions() const { return dyn.n_actions(); }
  template <typename R>
  pomcp::SimStep step(std::size_t s, std::size_t a, R&) const {
    const std::size_t next = dyn.next_state(s, a);
    return {next, next, dyn.reward(next), false};
  }
};

inline TrialRecord run_pomcp_trial(const env::LakeDynamics& dyn,
                                   const ExperimentConfig& cfg,
                                   std::uint64_t seed) {
  TrialRecord rec;
  rec.seed = seed;
  Rng rng(seed);
  const auto start_time = std::chrono::steady_clock::now();

  pomcp::PomcpConfig pc{cfg.timeout, cfg.exp_const, cfg.discount,
                        cfg.n_particles, cfg.nb_cycles};
  LakeSim sim{dyn};
  pomcp::PomcpPlanner<LakeSim, Rng> planner(
      sim, pc, pomcp::ParticleSet(cfg.n_particles, dyn.start_state()));

  std::size_t state = dyn.start_state();
  for (std::size_t cycle = 1; cycle <= cfg.nb_cycles; ++cycle) {
    const std::size_t a = planner.search(rng, cfg.nb_cycles - cycle + 1);
    state = dyn.next_state(state, a);
    rec.steps = cycle;
    if (state == dyn.goal_state()) {
      rec.success = true;
      break;
    }
    planner.advance(a, state, rng);
  }

  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              start_time)
                    .count();
  return rec;
}

inline TrialRecord run_aci_trial(const env::DeepRewardTask& task,
                                 const ExperimentConfig& cfg,
                                 std::uint64_t seed) {
  TrialRecord rec;
  rec.seed = seed;
  Rng rng(seed);
  const auto start_time = std::chrono::steady_clock::now();

  env::DeepRewardEnv env = task.env;
  env.reset();
  const ModelTensors& m = task.model;
  std::size_t obs = env.observe(rng);
  Categorical belief = m.d;
  // Condition the prior on the first observation.
  for (std::size_t s = 0; s < belief.size(); ++s)
    belief[s] *= m.a_at(obs, s);
  double z = 0.0;
  for (double p : belief.probs) z += p;
  for (double& p : belief.probs) p /= z;

  for (std::size_t cycle = 1; cycle <= cfg.nb_cycles; ++cycle) {
    auto res = exhaustive::aci_select_action(m, task.prefs, belief, cfg.horizon,
                                             cfg.memory_cap_bytes);
    if (res.budget_exceeded) {
      rec.error = "budget-exceeded";
      rec.steps = cycle - 1;
      break;
    }
    obs = env.step(res.action, rng);
    rec.steps = cycle;
    // Exact Bayes filter step.
    std::vector<double> next(belief.size(), 0.0);
    for (std::size_t nxt = 0; nxt < next.size(); ++nxt) {
      double acc = 0.0;
      for (std::size_t prev = 0; prev < next.size(); ++prev)
        acc += m.b_at(nxt, prev, res.action) * belief[prev];
      next[nxt] = acc * m.a_at(obs, nxt);
    }
    z = 0.0;
    for (double p : next) z += p;
    for (double& p : next) p /= z;
    belief.probs = std::move(next);
    if (env.at_goal() || env.trapped()) break;
  }

  rec.success = env.at_goal();
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              start_time)
                    .count();
  return rec;
}

}  // namespace detail

/// Everything a batch needs, built once and shared read-only by trials.
struct TaskBundle {
  std::optional<env::DeepRewardTask> deep;
  std::optional<env::GridTask> grid;
  std::optional<env::LakeDynamics> lake;
  std::optional<env::DSpritesTask> sprites;
};

inline bool is_lake(EnvKind e) { return e == EnvKind::kLakeA || e == EnvKind::kLakeB; }
inline bool is_maze(EnvKind e) {
  return e == EnvKind::kMazeA || e == EnvKind::kMazeB || e == EnvKind::kMazeC;
}
inline bool is_deep(EnvKind e) {
  return e == EnvKind::kDeepEasy || e == EnvKind::kDeepMedium ||
         e == EnvKind::kDeepHard;
}

inline std::string grid_file(EnvKind e) {
  switch (e) {
    case EnvKind::kMazeA: return "maze_a.txt";
    case EnvKind::kMazeB: return "maze_b.txt";
    case EnvKind::kMazeC: return "maze_c.txt";
    case EnvKind::kLakeA: return "lake_a.txt";
    case EnvKind::kLakeB: return "lake_b.txt";
    default: throw ConfigError("environment has no grid file");
  }
}

inline TaskBundle build_task(const ExperimentConfig& cfg,
                             const std::string& data_dir) {
  TaskBundle bundle;
  if (is_deep(cfg.env)) {
    env::DeepRewardSpec spec = cfg.env == EnvKind::kDeepEasy
                                   ? env::DeepRewardSpec::easy()
                                   : cfg.env == EnvKind::kDeepMedium
                                         ? env::DeepRewardSpec::medium()
                                         : env::DeepRewardSpec::hard();
    bundle.deep = env::deep_reward_build(spec, cfg.gamma_preferences);
  } else if (is_maze(cfg.env)) {
    const auto spec = env::maze_load_file(data_dir + "/" + grid_file(cfg.env));
    bundle.grid = env::maze_build(spec, cfg.use_state_prefs, cfg.gamma_preferences);
  } else if (is_lake(cfg.env)) {
    const auto spec = env::lake_load_file(data_dir + "/" + grid_file(cfg.env));
    bundle.lake.emplace(spec);
    if (cfg.agent == AgentKind::kBtai)
      bundle.grid = env::lake_build(spec, cfg.gamma_preferences);
  } else {
    env::DSpritesSpec spec;
    spec.granularity = cfg.granularity;
    bundle.sprites = env::dsprites_build(spec, cfg.gamma_preferences);
  }
  return bundle;
}

inline TrialRecord run_trial(const ExperimentConfig& cfg, const TaskBundle& bundle,
                             std::uint64_t seed) {
  switch (cfg.agent) {
    case AgentKind::kBtai: {
      if (bundle.deep) {
        detail::DeepAdapter env{bundle.deep->env};
        return detail::run_btai_trial(env, bundle.deep->model, bundle.deep->prefs,
                                      cfg, seed);
      }
      if (bundle.sprites) {
        detail::DSpritesAdapter env{env::DSpritesEnv(bundle.sprites->spec)};
        return detail::run_btai_trial(env, bundle.sprites->model,
                                      bundle.sprites->prefs, cfg, seed);
      }
      if (bundle.lake) {
        detail::LakeAdapter env{*bundle.grid, *bundle.lake, 0, false};
        return detail::run_btai_trial(env, bundle.grid->model, bundle.grid->prefs,
                                      cfg, seed);
      }
      detail::MazeAdapter env{*bundle.grid, {}, false};
      return detail::run_btai_trial(env, bundle.grid->model, bundle.grid->prefs,
                                    cfg, seed);
    }
    case AgentKind::kPomcp:
      if (!bundle.lake) throw ConfigError("pomcp agent requires a lake environment");
      return detail::run_pomcp_trial(*bundle.lake, cfg, seed);
    case AgentKind::kAci:
      if (!bundle.deep)
        throw ConfigError("aci agent requires a deep reward environment");
      return detail::run_aci_trial(*bundle.deep, cfg, seed);
  }
  throw ConfigError("unknown agent");
}

/// NB_SIMULATIONS trials at seeds seed, seed+1, ... in order.
inline std::vector<TrialRecord> run_batch(const ExperimentConfig& cfg,
                                          const std::string& data_dir) {
  cfg.validate();
  const TaskBundle bundle = build_task(cfg, data_dir);
  std::vector<TrialRecord> records;
  records.reserve(cfg.nb_simulations);
  for (std::size_t i = 0; i < cfg.nb_simulations; ++i)
    records.push_back(run_trial(cfg, bundle, cfg.seed + i));
  return records;
}

inline SummaryRow aggregate(const std::vector<TrialRecord>& records,
                            const ExperimentConfig& cfg) {
  if (records.empty()) throw std::invalid_argument("aggregate: no records");
  SummaryRow row;
  row.env = env_name(cfg.env);
  row.agent = agent_name(cfg.agent);
  row.planning_iterations = cfg.agent == AgentKind::kPomcp ? cfg.timeout
                            : cfg.agent == AgentKind::kAci ? cfg.horizon
                                                           : cfg.nb_planning;
  row.seed = cfg.seed;

  std::size_t successes = 0;
  double mean = 0.0;
  for (const auto& r : records) {
    successes += r.success ? 1 : 0;
    mean += r.seconds;
  }
  const double n = static_cast<double>(records.size());
  row.p_success = static_cast<double>(successes) / n;
  row.p_failure = 1.0 - row.p_success;
  mean /= n;
  double var = 0.0;
  for (const auto& r : records) var += (r.seconds - mean) * (r.seconds - mean);
  row.mean_time_s = mean;
  row.std_time_s = records.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;

  if (cfg.env == EnvKind::kDSprites) {
    std::vector<double> rewards;
    rewards.reserve(records.size());
    for (const auto& r : records)
      rewards.push_back(r.terminal_reward.value_or(-1.0));
    row.p_solved = env::dsprites_score(rewards);
  }
  return row;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr const char* kCsvHeader =
    "env,agent,planning_iterations,p_success,p_failure,p_solved,mean_time_s,"
    "std_time_s,seed";

inline std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void emit_csv(const std::vector<SummaryRow>& summaries,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_csv: cannot write " + path);
  out << kCsvHeader << "\n";
  for (const auto& row : summaries) {
    out << row.env << ',' << row.agent << ',' << row.planning_iterations << ','
        << csv_number(row.p_success) << ',' << csv_number(row.p_failure) << ','
        << (row.p_solved ? csv_number(*row.p_solved) : std::string()) << ','
        << csv_number(row.mean_time_s) << ',' << csv_number(row.std_time_s) << ','
        << row.seed << "\n";
  }
  if (!out) throw std::runtime_error("emit_csv: write failed for " + path);
}

/// Inverse of emit_csv, for round-trip checks and tooling.
inline std::vector<SummaryRow> parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw std::runtime_error("parse_csv: bad header in " + path);
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() == 8) fields.push_back("");  // trailing empty seed guard
    if (fields.size() != 9)
      throw std::runtime_error("parse_csv: bad row '" + line + "'");
    SummaryRow row;
    row.env = fields[0];
    row.agent = fields[1];
    row.planning_iterations = std::stoul(fields[2]);
    row.p_success = std::stod(fields[3]);
    row.p_failure = std::stod(fields[4]);
    if (!fields[5].empty()) row.p_solved = std::stod(fields[5]);
    row.mean_time_s = std::stod(fields[6]);
    row.std_time_s = std::stod(fields[7]);
    row.seed = std::stoull(fields[8]);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace btai::bench
