#pragma once

/**
 * Variational message passing over the chain and the future tree.
 *
 * Beliefs are mean-field categorical factors updated by coordinate ascent:
 * each update recomputes one factor from the log-space messages of its
 * neighbours and renormalises with a softmax. A sweep applies the updates
 * in a fixed deterministic order (past states from 0 to t, then future
 * nodes breadth-first, then unpinned actions); sweeps repeat until the
 * largest parameter change drops below tolerance.
 */

#include <cmath>
#include <cstddef>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "btai/belief_chain.hpp"
#include "btai/categorical.hpp"
#include "btai/model.hpp"
#include "btai/tree.hpp"

namespace btai::vmp {

inline constexpr double kDefaultTolerance = 1e-6;
inline constexpr std::size_t kDefaultMaxSweeps = 100;

namespace detail {

// r[s] = sum_o w[o] * log A[o, s]
inline void obs_weighted_log_a(const ModelTensors& m,
                               const std::vector<double>& w,
                               std::vector<double>& r) {
  const std::size_t ns = m.n_states(), no = m.n_obs();
  const auto& la = m.log_a();
  for (std::size_t o = 0; o < no; ++o) {
    const double wo = w[o];
    if (wo == 0.0) continue;
    const double* row = la.data() + o * ns;
    for (std::size_t s = 0; s < ns; ++s) r[s] += wo * row[s];
  }
}

// r[o] = sum_s w[s] * log A[o, s]
inline void state_weighted_log_a(const ModelTensors& m,
                                 const std::vector<double>& w,
                                 std::vector<double>& r) {
  const std::size_t ns = m.n_states(), no = m.n_obs();
  const auto& la = m.log_a();
  for (std::size_t o = 0; o < no; ++o) {
    const double* row = la.data() + o * ns;
    double acc = 0.0;
    for (std::size_t s = 0; s < ns; ++s) acc += w[s] * row[s];
    r[o] += acc;
  }
}

// r[next] += sum_u theta[u] sum_prev d_prev[prev] * log B[u][next, prev]
inline void forward_log_b(const ModelTensors& m, const std::vector<double>& d_prev,
                          const std::vector<double>& theta,
                          std::vector<double>& r) {
  const std::size_t ns = m.n_states(), nu = m.n_actions();
  for (std::size_t u = 0; u < nu; ++u) {
    const double wu = theta[u];
    if (wu == 0.0) continue;
    const auto& lb = m.log_b(u);
    for (std::size_t next = 0; next < ns; ++next) {
      const double* row = lb.data() + next * ns;
      double acc = 0.0;
      for (std::size_t prev = 0; prev < ns; ++prev) acc += d_prev[prev] * row[prev];
      r[next] += wu * acc;
    }
  }
}

// r[prev] += sum_u theta[u] sum_next d_next[next] * log B[u][next, prev]
inline void backward_log_b(const ModelTensors& m, const std::vector<double>& d_next,
                           const std::vector<double>& theta,
                           std::vector<double>& r) {
  const std::size_t ns = m.n_states(), nu = m.n_actions();
  for (std::size_t u = 0; u < nu; ++u) {
    const double wu = theta[u];
    if (wu == 0.0) continue;
    const auto& lb = m.log_b(u);
    for (std::size_t next = 0; next < ns; ++next) {
      const double wn = wu * d_next[next];
      if (wn == 0.0) continue;
      const double* row = lb.data() + next * ns;
      for (std::size_t prev = 0; prev < ns; ++prev) r[prev] += wn * row[prev];
    }
  }
}

// r[next] += sum_prev d_parent[prev] * log B[u][next, prev]
inline void parent_log_b(const ModelTensors& m, const std::vector<double>& d_parent,
                         std::size_t u, std::vector<double>& r) {
  const std::size_t ns = m.n_states();
  const auto& lb = m.log_b(u);
  for (std::size_t next = 0; next < ns; ++next) {
    const double* row = lb.data() + next * ns;
    double acc = 0.0;
    for (std::size_t prev = 0; prev < ns; ++prev) acc += d_parent[prev] * row[prev];
    r[next] += acc;
  }
}

// r[prev] += sum_next d_child[next] * log B[u][next, prev]
inline void child_log_b(const ModelTensors& m, const std::vector<double>& d_child,
                        std::size_t u, std::vector<double>& r) {
  const std::size_t ns = m.n_states();
  const auto& lb = m.log_b(u);
  for (std::size_t next = 0; next < ns; ++next) {
    const double wn = d_child[next];
    if (wn == 0.0) continue;
    const double* row = lb.data() + next * ns;
    for (std::size_t prev = 0; prev < ns; ++prev) r[prev] += wn * row[prev];
  }
}

}  // namespace detail

/**
 * Fixed-point update for the posterior over the hidden state at step tau.
 * The present step (tau == t) receives one message per root child instead
 * of a backward message; step 0 receives the initial prior instead of a
 * forward message.
 */
inline Categorical update_past_state(const BeliefChain& chain,
                                     const PlanTree& tree,
                                     const ModelTensors& m, std::size_t tau) {
  const std::size_t t = chain.t();
  if (tau > t) throw std::invalid_argument("update_past_state: tau out of range");
  const std::size_t ns = m.n_states();
  std::vector<double> logw(ns, 0.0);

  if (tau == 0) {
    for (std::size_t s = 0; s < ns; ++s) logw[s] = safe_log(m.d[s]);
  } else {
    detail::forward_log_b(m, chain.state_posteriors[tau - 1].probs,
                          chain.action_posteriors[tau - 1].probs, logw);
  }

  detail::obs_weighted_log_a(m, chain.observations[tau].probs, logw);

  if (tau == t) {
    for (const auto& child : tree.root->children)
      detail::child_log_b(m, child->state_posterior.probs, child->index.last(),
                          logw);
  } else {
    detail::backward_log_b(m, chain.state_posteriors[tau + 1].probs,
                           chain.action_posteriors[tau].probs, logw);
  }

  softmax_inplace(logw);
  return Categorical(std::move(logw), kStateAxis);
}

/**
 * Fixed-point update for the posterior over the action at step tau.
 * Returns nothing when the step is pinned to an executed action.
 */
inline std::optional<Categorical> update_past_action(const BeliefChain& chain,
                                                     const ModelTensors& m,
                                                     std::size_t tau) {
  if (tau >= chain.action_posteriors.size())
    throw std::invalid_argument("update_past_action: tau out of range");
  if (chain.action_pinned[tau]) return std::nullopt;
  const std::size_t ns = m.n_states(), nu = m.n_actions();
  const auto& d_now = chain.state_posteriors[tau].probs;
  const auto& d_next = chain.state_posteriors[tau + 1].probs;
  std::vector<double> logw(nu, 0.0);
  for (std::size_t u = 0; u < nu; ++u) {
    double acc = safe_log(m.theta[u]);
    const auto& lb = m.log_b(u);
    for (std::size_t next = 0; next < ns; ++next) {
      if (d_next[next] == 0.0) continue;
      const double* row = lb.data() + next * ns;
      double inner = 0.0;
      for (std::size_t prev = 0; prev < ns; ++prev) inner += d_now[prev] * row[prev];
      acc += d_next[next] * inner;
    }
    logw[u] = acc;
  }
  softmax_inplace(logw);
  return Categorical(std::move(logw), kActionAxis);
}

/// Fixed-point update for a future node's observation posterior.
inline Categorical update_future_obs(const TreeNode& node,
                                     const ModelTensors& m) {
  std::vector<double> logw(m.n_obs(), 0.0);
  detail::state_weighted_log_a(m, node.state_posterior.probs, logw);
  softmax_inplace(logw);
  return Categorical(std::move(logw), kObsAxis);
}

/**
 * Fixed-point update for a future node's state posterior: likelihood
 * message from its own observation factor, transition message from its
 * parent, and one message per expanded child.
 */
inline Categorical update_future_state(const TreeNode& node,
                                       const ModelTensors& m) {
  if (node.parent == nullptr)
    throw std::invalid_argument("update_future_state: node has no parent");
  std::vector<double> logw(m.n_states(), 0.0);
  detail::obs_weighted_log_a(m, node.obs_posterior.probs, logw);
  detail::parent_log_b(m, node.parent->state_posterior.probs, node.index.last(),
                       logw);
  for (const auto& child : node.children)
    detail::child_log_b(m, child->state_posterior.probs, child->index.last(),
                        logw);
  softmax_inplace(logw);
  return Categorical(std::move(logw), kStateAxis);
}

struct SweepOptions {
  double tolerance = kDefaultTolerance;
  std::size_t max_sweeps = kDefaultMaxSweeps;
};

/**
 * Runs sweeps over the chain and the whole tree until convergence.
 * Returns the number of sweeps used; hitting max_sweeps reports
 * non-convergence by returning max_sweeps.
 */
inline std::size_t run_vmp(BeliefChain& chain, PlanTree& tree,
                           const ModelTensors& m, SweepOptions opts = {}) {
  const std::size_t t = chain.t();
  std::size_t sweep = 0;
  while (sweep < opts.max_sweeps) {
    ++sweep;
    double delta = 0.0;

    for (std::size_t tau = 0; tau <= t; ++tau) {
      Categorical next = update_past_state(chain, tree, m, tau);
      delta = std::max(delta,
                       max_abs_delta(next.probs, chain.state_posteriors[tau].probs));
      chain.state_posteriors[tau] = std::move(next);
    }
    tree.root->state_posterior = chain.state_posteriors[t];

    // Future nodes breadth-first; each node refreshes states then observations.
    std::deque<TreeNode*> queue;
    for (const auto& c : tree.root->children) queue.push_back(c.get());
    while (!queue.empty()) {
      TreeNode* node = queue.front();
      queue.pop_front();
      Categorical s = update_future_state(*node, m);
      delta = std::max(delta, max_abs_delta(s.probs, node->state_posterior.probs));
      node->state_posterior = std::move(s);
      Categorical o = update_future_obs(*node, m);
      delta = std::max(delta, max_abs_delta(o.probs, node->obs_posterior.probs));
      node->obs_posterior = std::move(o);
      for (const auto& c : node->children) queue.push_back(c.get());
    }

    for (std::size_t tau = 0; tau + 1 <= t && tau < chain.action_posteriors.size();
         ++tau) {
      auto next = update_past_action(chain, m, tau);
      if (!next) continue;
      delta = std::max(delta,
                       max_abs_delta(next->probs, chain.action_posteriors[tau].probs));
      chain.action_posteriors[tau] = std::move(*next);
    }

    if (delta < opts.tolerance) break;
  }
  return sweep;
}

/**
 * Runs sweeps restricted to the freshly expanded children of one node,
 * which is the per-iteration inference step of the planner. The parent's
 * posterior is held fixed.
 */
inline std::size_t run_vmp_on_children(TreeNode& parent, const ModelTensors& m,
                                       SweepOptions opts = {}) {
  std::size_t sweep = 0;
  while (sweep < opts.max_sweeps) {
    ++sweep;
    double delta = 0.0;
    for (auto& child : parent.children) {
      Categorical s = update_future_state(*child, m);
      delta = std::max(delta, max_abs_delta(s.probs, child->state_posterior.probs));
      child->state_posterior = std::move(s);
      Categorical o = update_future_obs(*child, m);
      delta = std::max(delta, max_abs_delta(o.probs, child->obs_posterior.probs));
      child->obs_posterior = std::move(o);
    }
    if (delta < opts.tolerance) break;
  }
  return sweep;
}

/**
 * Mean-field variational free energy of the chain plus tree, used to check
 * that sweeps behave as coordinate ascent. Smaller is better; each
 * converged update can only decrease it.
 */
inline double free_energy(const BeliefChain& chain, const PlanTree& tree,
                          const ModelTensors& m) {
  const std::size_t t = chain.t();
  const std::size_t ns = m.n_states();
  double fe = 0.0;

  // Entropy terms enter as E[ln Q]; energy terms as -E[ln P].
  for (std::size_t tau = 0; tau <= t; ++tau) {
    const auto& d = chain.state_posteriors[tau].probs;
    fe -= entropy(d);
    const auto& obs = chain.observations[tau].probs;
    std::vector<double> like(ns, 0.0);
    detail::obs_weighted_log_a(m, obs, like);
    for (std::size_t s = 0; s < ns; ++s) fe -= d[s] * like[s];
    if (tau == 0) {
      for (std::size_t s = 0; s < ns; ++s) fe -= d[s] * safe_log(m.d[s]);
    } else {
      std::vector<double> fwd(ns, 0.0);
      detail::forward_log_b(m, chain.state_posteriors[tau - 1].probs,
                            chain.action_posteriors[tau - 1].probs, fwd);
      for (std::size_t s = 0; s < ns; ++s) fe -= d[s] * fwd[s];
    }
  }
  for (std::size_t tau = 0; tau < chain.action_posteriors.size(); ++tau) {
    const auto& th = chain.action_posteriors[tau].probs;
    fe -= entropy(th);
    for (std::size_t u = 0; u < th.size(); ++u) fe -= th[u] * safe_log(m.theta[u]);
  }

  // Future nodes: transition from parent plus own likelihood factor.
  std::deque<const TreeNode*> queue;
  for (const auto& c : tree.root->children) queue.push_back(c.get());
  while (!queue.empty()) {
    const TreeNode* node = queue.front();
    queue.pop_front();
    const auto& d = node->state_posterior.probs;
    const auto& e = node->obs_posterior.probs;
    fe -= entropy(d);
    fe -= entropy(e);
    std::vector<double> par(ns, 0.0);
    detail::parent_log_b(m, node->parent->state_posterior.probs,
                         node->index.last(), par);
    for (std::size_t s = 0; s < ns; ++s) fe -= d[s] * par[s];
    std::vector<double> like(ns, 0.0);
    detail::obs_weighted_log_a(m, e, like);
    for (std::size_t s = 0; s < ns; ++s) fe -= d[s] * like[s];
    for (const auto& c : node->children) queue.push_back(c.get());
  }
  return fe;
}

}  // namespace btai::vmp
