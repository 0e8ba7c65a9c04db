#pragma once

/**
 * Standard active inference planning core: enumerate every action sequence
 * up to the horizon, roll the state belief forward through each one,
 * accumulate the per-step expected free energy, and pick the first action
 * of the softmax policy posterior.
 *
 * The number of policies is |U|^H, so both time and the belief storage the
 * reference implementations keep per policy grow geometrically in the
 * horizon. The memory estimate is checked against a configurable cap
 * before anything is allocated; exceeding it yields a structured
 * budget-exceeded result instead of an allocation failure.
 */

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "btai/categorical.hpp"
#include "btai/model.hpp"

namespace btai::exhaustive {

inline constexpr std::uint64_t kDefaultMemoryCap = 16ull << 30;  // 16 GiB

// Belief-trajectory copies the reference implementation records per policy
// and step (one per variational iteration of its inner loop).
inline constexpr std::uint64_t kIterationRecordFactor = 16;

/// |U|^H with overflow saturation.
inline std::uint64_t policy_count(std::size_t horizon, std::size_t n_actions) {
  if (horizon == 0) throw std::invalid_argument("policy_count: horizon >= 1 required");
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < horizon; ++i) {
    if (count > std::numeric_limits<std::uint64_t>::max() / n_actions)
      return std::numeric_limits<std::uint64_t>::max();
    count *= n_actions;
  }
  return count;
}

/**
 * Lexicographic enumeration of all action sequences of a given length.
 * Enumeration past a configured cap raises budget-exceeded up front.
 */
class PolicyEnumerator {
 public:
  PolicyEnumerator(std::size_t horizon, std::size_t n_actions,
                   std::uint64_t max_policies =
                       std::numeric_limits<std::uint64_t>::max())
      : horizon_(horizon), n_actions_(n_actions),
        count_(policy_count(horizon, n_actions)) {
    if (n_actions == 0)
      throw std::invalid_argument("PolicyEnumerator: no actions");
    if (count_ > max_policies)
      throw std::length_error("PolicyEnumerator: policy count exceeds budget");
  }

  std::uint64_t count() const { return count_; }

  /// Writes the k-th policy (lexicographic) into `out`.
  void policy(std::uint64_t k, std::vector<std::size_t>& out) const {
    out.assign(horizon_, 0);
    for (std::size_t i = horizon_; i-- > 0;) {
      out[i] = static_cast<std::size_t>(k % n_actions_);
      k /= n_actions_;
    }
  }

 private:
  std::size_t horizon_;
  std::size_t n_actions_;
  std::uint64_t count_;
};

/**
 * Expected free energy of one policy: beliefs roll forward through B, the
 * predicted observations through A, and each step contributes observation
 * risk plus ambiguity.
 */
inline double policy_efe(const std::vector<std::size_t>& policy,
                         const ModelTensors& m, const Preferences& prefs,
                         const Categorical& belief_now) {
  const std::size_t ns = m.n_states(), no = m.n_obs();
  std::vector<double> s = belief_now.probs;
  std::vector<double> s_next(ns), o_pred(no);
  double efe = 0.0;
  const auto& h_col = m.col_entropy_a();
  for (std::size_t u : policy) {
    // s' = B[u] s
    for (std::size_t next = 0; next < ns; ++next) {
      double acc = 0.0;
      for (std::size_t prev = 0; prev < ns; ++prev)
        acc += m.b_at(next, prev, u) * s[prev];
      s_next[next] = acc;
    }
    s.swap(s_next);
    // o = A s
    for (std::size_t o = 0; o < no; ++o) {
      double acc = 0.0;
      for (std::size_t st = 0; st < ns; ++st) acc += m.a_at(o, st) * s[st];
      o_pred[o] = acc;
    }
    for (std::size_t o = 0; o < no; ++o)
      if (o_pred[o] > 0.0)
        efe += o_pred[o] * (std::log(o_pred[o]) - safe_log(prefs.c_obs[o]));
    for (std::size_t st = 0; st < ns; ++st) efe += s[st] * h_col[st];
  }
  return efe;
}

/**
 * Bytes the reference implementation would need for its per-policy belief
 * storage: one |S|-vector per policy, per step, per recorded variational
 * iteration, in doubles.
 */
inline std::uint64_t memory_estimate_bytes(std::size_t horizon,
                                           std::size_t n_actions,
                                           std::size_t n_states) {
  const std::uint64_t policies = policy_count(horizon, n_actions);
  const std::uint64_t per_policy =
      static_cast<std::uint64_t>(horizon) * n_states * sizeof(double) *
      kIterationRecordFactor;
  if (policies > std::numeric_limits<std::uint64_t>::max() / per_policy)
    return std::numeric_limits<std::uint64_t>::max();
  return policies * per_policy;
}

struct AciResult {
  bool budget_exceeded = false;
  std::uint64_t estimated_bytes = 0;
  std::uint64_t policies = 0;
  std::size_t action = 0;
  std::vector<double> first_action_marginal;
};

/**
 * Softmax policy posterior over all enumerated policies, marginalised onto
 * the first action; returns budget-exceeded (with the estimate) instead of
 * allocating when the projected storage is over the cap.
 */
inline AciResult aci_select_action(const ModelTensors& m, const Preferences& prefs,
                                   const Categorical& belief_now,
                                   std::size_t horizon,
                                   std::uint64_t memory_cap_bytes = kDefaultMemoryCap) {
  if (horizon == 0)
    throw std::invalid_argument("aci_select_action: horizon >= 1 required");
  AciResult result;
  result.policies = policy_count(horizon, m.n_actions());
  result.estimated_bytes =
      memory_estimate_bytes(horizon, m.n_actions(), m.n_states());
  if (result.estimated_bytes > memory_cap_bytes) {
    result.budget_exceeded = true;
    return result;
  }

  PolicyEnumerator policies(horizon, m.n_actions());
  std::vector<double> efe(policies.count());
  std::vector<std::size_t> policy;
  for (std::uint64_t k = 0; k < policies.count(); ++k) {
    policies.policy(k, policy);
    efe[k] = policy_efe(policy, m, prefs, belief_now);
  }

  // Policy posterior softmax(-EFE), reduced in fixed enumeration order.
  double max_neg = -std::numeric_limits<double>::infinity();
  for (double e : efe) max_neg = std::max(max_neg, -e);
  std::vector<double> marginal(m.n_actions(), 0.0);
  double z = 0.0;
  const std::uint64_t block = policies.count() / m.n_actions();
  for (std::uint64_t k = 0; k < policies.count(); ++k) {
    const double w = std::exp(-efe[k] - max_neg);
    marginal[static_cast<std::size_t>(k / block)] += w;
    z += w;
  }
  for (double& p : marginal) p /= z;

  result.first_action_marginal = marginal;
  std::size_t best = 0;
  for (std::size_t u = 1; u < marginal.size(); ++u)
    if (marginal[u] > marginal[best]) best = u;
  result.action = best;
  return result;
}

}  // namespace btai::exhaustive
