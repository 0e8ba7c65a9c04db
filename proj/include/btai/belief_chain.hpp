#pragma once

/**
 * Past and present beliefs of one agent.
 *
 * The chain records every observation made so far, the posterior over the
 * hidden state at each step, and the posterior over each executed action.
 * Executed actions are known, so their posteriors are pinned to the
 * corresponding one-hot vector and skipped by later inference sweeps.
 */

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "btai/categorical.hpp"
#include "btai/model.hpp"
#include "btai/tree.hpp"

namespace btai {

struct BeliefChain {
  std::vector<Categorical> observations;      // one-hot, o_0 .. o_t
  std::vector<Categorical> state_posteriors;  // D-hat_0 .. D-hat_t
  std::vector<Categorical> action_posteriors; // Theta-hat_0 .. Theta-hat_{t-1}
  std::vector<std::size_t> actions_taken;     // u_0 .. u_{t-1}
  std::vector<bool> action_pinned;            // executed steps are pinned

  std::size_t t() const { return observations.empty() ? 0 : observations.size() - 1; }

  bool consistent() const {
    return observations.size() == state_posteriors.size() &&
           action_posteriors.size() + 1 == observations.size() &&
           actions_taken.size() == action_posteriors.size() &&
           action_pinned.size() == action_posteriors.size();
  }

  /// Starts a trial: records o_0 and a uniform present posterior.
  static BeliefChain start(const ModelTensors& m, std::size_t obs_index) {
    BeliefChain chain;
    chain.observations.push_back(one_hot(obs_index, m.n_obs(), kObsAxis));
    chain.state_posteriors.push_back(uniform(m.n_states(), kStateAxis));
    return chain;
  }
};

/**
 * Closes one action-perception cycle: the executed action and the new
 * observation are appended to the chain (with the action posterior pinned
 * one-hot and a uniform initial posterior for the new state), and the
 * entire future tree is discarded in favour of a fresh empty root.
 */
inline std::pair<BeliefChain, PlanTree> integrate_step(BeliefChain chain,
                                                       PlanTree /*tree*/,
                                                       std::size_t u_executed,
                                                       const Categorical& o_new,
                                                       const ModelTensors& m) {
  if (u_executed >= m.n_actions())
    throw std::invalid_argument("integrate_step: action out of range");
  if (o_new.size() != m.n_obs())
    throw std::invalid_argument("integrate_step: observation length mismatch");
  chain.actions_taken.push_back(u_executed);
  chain.action_posteriors.push_back(one_hot(u_executed, m.n_actions(), kActionAxis));
  chain.action_pinned.push_back(true);
  chain.observations.push_back(o_new);
  chain.state_posteriors.push_back(uniform(m.n_states(), kStateAxis));
  return {std::move(chain), PlanTree::fresh(m.n_states(), m.n_obs())};
}

}  // namespace btai
