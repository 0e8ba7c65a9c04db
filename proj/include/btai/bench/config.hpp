#pragma once

/**
 * Experiment configuration: `KEY = value` files with '#' comments, layered
 * on top of named presets that carry the published defaults for each task.
 * Unknown keys and malformed values are rejected with the key named.
 */

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "btai/planner.hpp"

namespace btai::bench {

enum class EnvKind {
  kDeepEasy, kDeepMedium, kDeepHard,
  kMazeA, kMazeB, kMazeC,
  kLakeA, kLakeB,
  kDSprites,
};

enum class AgentKind { kBtai, kPomcp, kAci };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  EnvKind env = EnvKind::kMazeB;
  AgentKind agent = AgentKind::kBtai;

  std::size_t nb_simulations = 100;
  std::size_t nb_cycles = 20;       // action-perception cycles per trial
  std::size_t nb_planning = 10;     // planning iterations per cycle
  double exploration_constant = 2.4;
  double gamma_preferences = 2.0;
  double omega = 100.0;
  EvaluationType evaluation_type = EvaluationType::kEfe;
  std::uint64_t seed = 1;

  // Sampling baseline.
  std::size_t timeout = 1000;
  double exp_const = 3.0;
  double discount = 0.9;
  std::size_t n_particles = 100;

  // Exhaustive baseline.
  std::size_t horizon = 3;
  std::uint64_t memory_cap_bytes = 16ull << 30;

  // Task-specific knobs.
  std::size_t granularity = 8;      // dSprites
  bool use_state_prefs = false;     // mazes

  PlannerConfig planner() const {
    return {nb_planning, exploration_constant, gamma_preferences, omega,
            evaluation_type};
  }

  void validate() const {
    if (nb_simulations == 0) throw ConfigError("NB_SIMULATIONS must be positive");
    if (nb_cycles == 0)
      throw ConfigError("NB_ACTION_PERCEPTION_CYCLES must be positive");
    if (nb_planning == 0) throw ConfigError("NB_PLANNING_STEPS must be positive");
    if (timeout == 0) throw ConfigError("TIMEOUT must be positive");
    if (n_particles == 0) throw ConfigError("NO_PARTICLES must be positive");
    if (horizon == 0) throw ConfigError("HORIZON must be positive");
    if (granularity != 4 && granularity != 8)
      throw ConfigError("GRANULARITY must be 4 or 8");
  }
};

inline const char* env_name(EnvKind e) {
  switch (e) {
    case EnvKind::kDeepEasy: return "deep_easy";
    case EnvKind::kDeepMedium: return "deep_medium";
    case EnvKind::kDeepHard: return "deep_hard";
    case EnvKind::kMazeA: return "maze_a";
    case EnvKind::kMazeB: return "maze_b";
    case EnvKind::kMazeC: return "maze_c";
    case EnvKind::kLakeA: return "lake_a";
    case EnvKind::kLakeB: return "lake_b";
    case EnvKind::kDSprites: return "dsprites";
  }
  return "?";
}

inline const char* agent_name(AgentKind a) {
  switch (a) {
    case AgentKind::kBtai: return "btai";
    case AgentKind::kPomcp: return "pomcp";
    case AgentKind::kAci: return "aci";
  }
  return "?";
}

inline EnvKind parse_env(const std::string& s) {
  static const std::map<std::string, EnvKind> table = {
      {"deep_easy", EnvKind::kDeepEasy},   {"deep_medium", EnvKind::kDeepMedium},
      {"deep_hard", EnvKind::kDeepHard},   {"maze_a", EnvKind::kMazeA},
      {"maze_b", EnvKind::kMazeB},         {"maze_c", EnvKind::kMazeC},
      {"lake_a", EnvKind::kLakeA},         {"lake_b", EnvKind::kLakeB},
      {"dsprites", EnvKind::kDSprites},
  };
  auto it = table.find(s);
  if (it == table.end()) throw ConfigError("ENV: unknown environment '" + s + "'");
  return it->second;
}

inline AgentKind parse_agent(const std::string& s) {
  if (s == "btai") return AgentKind::kBtai;
  if (s == "pomcp") return AgentKind::kPomcp;
  if (s == "aci") return AgentKind::kAci;
  throw ConfigError("AGENT: unknown agent '" + s + "'");
}

/**
 * Published per-task defaults. Each preset is a full configuration; config
 * files start from one (named explicitly via PRESET, or inferred from
 * ENV/AGENT) and override individual keys.
 */
inline std::vector<std::pair<std::string, ExperimentConfig>> preset_table() {
  std::vector<std::pair<std::string, ExperimentConfig>> presets;
  auto add = [&](const std::string& name, ExperimentConfig cfg) {
    presets.emplace_back(name, cfg);
  };

  ExperimentConfig deep;
  deep.env = EnvKind::kDeepEasy;
  deep.nb_cycles = 20;
  deep.nb_planning = 10;
  deep.gamma_preferences = 3.0;
  add("deep_easy", deep);
  add("deep_reward", deep);  // family alias
  deep.env = EnvKind::kDeepMedium;
  add("deep_medium", deep);
  deep.env = EnvKind::kDeepHard;
  deep.nb_planning = 20;
  add("deep_hard", deep);

  ExperimentConfig aci = deep;
  aci.agent = AgentKind::kAci;
  aci.env = EnvKind::kDeepEasy;
  aci.horizon = 3;
  add("deep_easy_aci", aci);
  aci.env = EnvKind::kDeepMedium;
  aci.horizon = 5;
  add("deep_medium_aci", aci);
  aci.env = EnvKind::kDeepHard;
  aci.horizon = 8;
  add("deep_hard_aci", aci);

  ExperimentConfig maze;
  maze.nb_cycles = 20;
  maze.gamma_preferences = 2.0;
  maze.env = EnvKind::kMazeA;
  maze.nb_planning = 10;
  add("maze_a_efe", maze);
  maze.evaluation_type = EvaluationType::kDoubleKl;
  add("maze_a_dkl", maze);
  maze.env = EnvKind::kMazeB;
  maze.evaluation_type = EvaluationType::kEfe;
  maze.nb_planning = 20;
  add("maze_b_efe", maze);
  maze.evaluation_type = EvaluationType::kDoubleKl;
  add("maze_b_dkl", maze);
  maze.use_state_prefs = true;
  maze.nb_planning = 15;
  add("maze_b_dkl_stateprefs", maze);
  maze.use_state_prefs = false;
  maze.env = EnvKind::kMazeC;
  maze.evaluation_type = EvaluationType::kEfe;
  maze.nb_planning = 10;
  add("maze_c_efe", maze);
  maze.evaluation_type = EvaluationType::kDoubleKl;
  add("maze_c_dkl", maze);

  ExperimentConfig lake;
  lake.nb_cycles = 30;
  lake.gamma_preferences = 2.0;
  lake.env = EnvKind::kLakeA;
  lake.nb_planning = 20;
  add("lake_a", lake);
  lake.env = EnvKind::kLakeB;
  lake.nb_planning = 50;
  add("lake_b", lake);

  ExperimentConfig pomcp = lake;
  pomcp.agent = AgentKind::kPomcp;
  pomcp.env = EnvKind::kLakeA;
  pomcp.timeout = 1000;
  pomcp.exp_const = 3.0;
  pomcp.discount = 0.9;
  pomcp.n_particles = 100;
  add("lake_a_pomcp", pomcp);
  pomcp.env = EnvKind::kLakeB;
  add("lake_b_pomcp", pomcp);

  ExperimentConfig sprites;
  sprites.env = EnvKind::kDSprites;
  sprites.nb_cycles = 30;
  sprites.nb_planning = 50;
  sprites.gamma_preferences = 2.0;
  sprites.granularity = 8;
  add("dsprites_g8", sprites);
  sprites.granularity = 4;
  add("dsprites_g4", sprites);

  return presets;
}

inline ExperimentConfig preset(const std::string& name) {
  for (const auto& [n, cfg] : preset_table())
    if (n == name) return cfg;
  throw ConfigError("PRESET: unknown preset '" + name + "'");
}

/// Canonical preset for an (env, agent, evaluation) combination.
inline ExperimentConfig default_for(EnvKind env, AgentKind agent,
                                    EvaluationType eval) {
  for (const auto& [n, cfg] : preset_table())
    if (cfg.env == env && cfg.agent == agent &&
        (agent != AgentKind::kBtai || cfg.evaluation_type == eval) &&
        !cfg.use_state_prefs)
      return cfg;
  // Fall back to the first preset matching env and agent.
  for (const auto& [n, cfg] : preset_table())
    if (cfg.env == env && cfg.agent == agent) return cfg;
  throw ConfigError("no preset for this environment/agent combination");
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (!in || !(in >> std::ws).eof())
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "TRUE" || value == "1") return true;
  if (value == "false" || value == "FALSE" || value == "0") return false;
  throw ConfigError(key + ": expected a boolean, got '" + value + "'");
}

}  // namespace detail

/// Parses `KEY = value` lines (already split from a file or a literal).
inline ExperimentConfig load_config_lines(const std::vector<std::string>& lines) {
  using detail::parse_number;
  using detail::trim;

  std::vector<std::pair<std::string, std::string>> entries;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = lines[i];
    if (auto hash = line.find('#'); hash != std::string::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(i + 1) + ": expected KEY = value");
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }

  // The preset establishes defaults; ENV is required when no preset given.
  std::optional<ExperimentConfig> cfg;
  std::optional<EnvKind> env_override;
  std::optional<AgentKind> agent_override;
  std::optional<EvaluationType> eval_override;
  for (const auto& [key, value] : entries) {
    if (key == "PRESET") cfg = preset(value);
    else if (key == "ENV") env_override = parse_env(value);
    else if (key == "AGENT") agent_override = parse_agent(value);
    else if (key == "EVALUATION_TYPE") {
      if (value == "EFE") eval_override = EvaluationType::kEfe;
      else if (value == "DOUBLE_KL") eval_override = EvaluationType::kDoubleKl;
      else throw ConfigError("EVALUATION_TYPE: expected EFE or DOUBLE_KL, got '" +
                             value + "'");
    }
  }
  if (!cfg) {
    if (!env_override) throw ConfigError("missing required key ENV (or PRESET)");
    cfg = default_for(*env_override, agent_override.value_or(AgentKind::kBtai),
                      eval_override.value_or(EvaluationType::kEfe));
  }
  if (env_override) cfg->env = *env_override;
  if (agent_override) cfg->agent = *agent_override;
  if (eval_override) cfg->evaluation_type = *eval_override;

  for (const auto& [key, value] : entries) {
    if (key == "PRESET" || key == "ENV" || key == "AGENT" ||
        key == "EVALUATION_TYPE")
      continue;
    if (key == "NB_SIMULATIONS")
      cfg->nb_simulations = parse_number<std::size_t>(key, value);
    else if (key == "NB_ACTION_PERCEPTION_CYCLES")
      cfg->nb_cycles = parse_number<std::size_t>(key, value);
    else if (key == "NB_PLANNING_STEPS")
      cfg->nb_planning = parse_number<std::size_t>(key, value);
    else if (key == "EXPLORATION_CONSTANT")
      cfg->exploration_constant = parse_number<double>(key, value);
    else if (key == "PRECISION_PRIOR_PREFERENCES")
      cfg->gamma_preferences = parse_number<double>(key, value);
    else if (key == "PRECISION_ACTION_SELECTION")
      cfg->omega = parse_number<double>(key, value);
    else if (key == "SEED")
      cfg->seed = parse_number<std::uint64_t>(key, value);
    else if (key == "TIMEOUT")
      cfg->timeout = parse_number<std::size_t>(key, value);
    else if (key == "EXP_CONST")
      cfg->exp_const = parse_number<double>(key, value);
    else if (key == "GAMMA")
      cfg->discount = parse_number<double>(key, value);
    else if (key == "NO_PARTICLES")
      cfg->n_particles = parse_number<std::size_t>(key, value);
    else if (key == "HORIZON")
      cfg->horizon = parse_number<std::size_t>(key, value);
    else if (key == "MEMORY_CAP_BYTES")
      cfg->memory_cap_bytes = parse_number<std::uint64_t>(key, value);
    else if (key == "GRANULARITY")
      cfg->granularity = parse_number<std::size_t>(key, value);
    else if (key == "USE_STATE_PREFS")
      cfg->use_state_prefs = detail::parse_bool(key, value);
    else
      throw ConfigError("unknown key '" + key + "'");
  }

  cfg->validate();
  return *cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return load_config_lines(lines);
}

}  // namespace btai::bench
