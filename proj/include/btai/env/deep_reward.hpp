#pragma once

/**
 * Deep reward task: a branching graph with n seemingly good paths (only
 * the unique longest one pays off) and m obviously bad actions. Any
 * off-path action falls into an absorbing bad state; finishing the longest
 * path reaches an absorbing good state. Observations are valenced
 * (pleasant / neutral / unpleasant), so the trap paths look identical to
 * the good path until one step past the shorter path's end.
 */

#include <array>
#include <cstddef>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "btai/categorical.hpp"
#include "btai/model.hpp"

namespace btai::env {

enum DeepRewardObs : std::size_t { kPleasant = 0, kNeutral = 1, kUnpleasant = 2 };

struct DeepRewardSpec {
  std::size_t bad_actions = 5;             // m
  std::size_t good_paths = 2;              // n
  std::vector<std::size_t> path_lengths;   // L_1 .. L_n

  void validate() const {
    if (good_paths == 0 || path_lengths.size() != good_paths)
      throw std::invalid_argument("DeepRewardSpec: one length per good path required");
    std::size_t longest = 0, count = 0;
    for (std::size_t len : path_lengths) {
      if (len == 0) throw std::invalid_argument("DeepRewardSpec: zero-length path");
      if (len > longest) {
        longest = len;
        count = 1;
      } else if (len == longest) {
        ++count;
      }
    }
    if (count != 1)
      throw std::invalid_argument("DeepRewardSpec: the longest path must be unique");
  }

  static DeepRewardSpec easy() { return {5, 2, {2, 3}}; }
  static DeepRewardSpec medium() { return {5, 2, {4, 5}}; }
  static DeepRewardSpec hard() { return {5, 2, {7, 9}}; }

  std::size_t n_actions() const { return bad_actions + good_paths; }
  std::size_t n_states() const {
    return 1 + std::accumulate(path_lengths.begin(), path_lengths.end(),
                               std::size_t{0}) + 2;
  }
  std::size_t longest_path() const {
    std::size_t best = 0;
    for (std::size_t k = 1; k < path_lengths.size(); ++k)
      if (path_lengths[k] > path_lengths[best]) best = k;
    return best;
  }
};

/// Deterministic state machine for the task; the agent's B mirrors it.
class DeepRewardEnv {
 public:
  explicit DeepRewardEnv(DeepRewardSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    // State layout: 0 = start, then each path's states in order, then bad, good.
    path_offsets_.resize(spec_.good_paths);
    std::size_t next = 1;
    for (std::size_t k = 0; k < spec_.good_paths; ++k) {
      path_offsets_[k] = next;
      next += spec_.path_lengths[k];
    }
    bad_state_ = next;
    good_state_ = next + 1;
  }

  const DeepRewardSpec& spec() const { return spec_; }
  std::size_t n_states() const { return good_state_ + 1; }
  std::size_t n_actions() const { return spec_.n_actions(); }
  std::size_t start_state() const { return 0; }
  std::size_t bad_state() const { return bad_state_; }
  std::size_t good_state() const { return good_state_; }
  std::size_t path_state(std::size_t path, std::size_t pos) const {
    return path_offsets_[path] + pos - 1;  // pos counts from 1
  }

  std::size_t next_state(std::size_t state, std::size_t action) const {
    if (state == bad_state_) return bad_state_;
    if (state == good_state_) return good_state_;
    if (state == 0) {
      return action < spec_.good_paths ? path_state(action, 1) : bad_state_;
    }
    // Somewhere on a path: identify it and the position within it.
    for (std::size_t k = 0; k < spec_.good_paths; ++k) {
      const std::size_t off = path_offsets_[k];
      const std::size_t len = spec_.path_lengths[k];
      if (state >= off && state < off + len) {
        const std::size_t pos = state - off + 1;
        if (pos == len)
          return k == spec_.longest_path() ? good_state_ : bad_state_;
        return action == 0 ? path_state(k, pos + 1) : bad_state_;
      }
    }
    throw std::logic_error("DeepRewardEnv: unknown state");
  }

  /// Emission distribution of a state over (pleasant, neutral, unpleasant).
  std::array<double, 3> emission(std::size_t state) const {
    if (state == good_state_) return {0.9, 0.05, 0.05};
    if (state == bad_state_) return {0.05, 0.05, 0.9};
    return {0.05, 0.9, 0.05};
  }

  void reset() { state_ = 0; }

  template <typename Rng>
  std::size_t step(std::size_t action, Rng& rng) {
    state_ = next_state(state_, action);
    return observe(rng);
  }

  template <typename Rng>
  std::size_t observe(Rng& rng) const {
    const auto e = emission(state_);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double r = unit(rng), acc = 0.0;
    for (std::size_t o = 0; o < 3; ++o) {
      acc += e[o];
      if (r <= acc) return o;
    }
    return 2;
  }

  std::size_t state() const { return state_; }
  bool at_goal() const { return state_ == good_state_; }
  bool trapped() const { return state_ == bad_state_; }

 private:
  DeepRewardSpec spec_;
  std::vector<std::size_t> path_offsets_;
  std::size_t bad_state_ = 0;
  std::size_t good_state_ = 0;
  std::size_t state_ = 0;
};

struct DeepRewardTask {
  DeepRewardEnv env;
  ModelTensors model;
  Preferences prefs;
};

/// Builds the simulator plus the matching model the agent is handed.
inline DeepRewardTask deep_reward_build(const DeepRewardSpec& spec,
                                        double gamma = 3.0) {
  spec.validate();
  DeepRewardEnv env(spec);
  const std::size_t ns = env.n_states(), nu = env.n_actions(), no = 3;

  NamedTensor a = make_likelihood(no, ns);
  for (std::size_t s = 0; s < ns; ++s) {
    const auto e = env.emission(s);
    for (std::size_t o = 0; o < no; ++o) a.values[o * ns + s] = e[o];
  }
  NamedTensor b = make_transition(ns, nu);
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t u = 0; u < nu; ++u)
      b.values[(env.next_state(s, u) * ns + s) * nu + u] = 1.0;

  ModelTensors model(std::move(a), std::move(b), one_hot(0, ns, kStateAxis),
                     uniform(nu, kActionAxis));
  Preferences prefs{softmax({2.0, 1.0, 0.0}, gamma, kObsAxis),
                    uniform(ns, kStateAxis), gamma};
  return {std::move(env), std::move(model), std::move(prefs)};
}

}  // namespace btai::env
