#pragma once

/**
 * The agent's model of a task and its target preferences.
 *
 * ModelTensors bundles the categorical parameters the agent is handed up
 * front: the likelihood A (observation given state), the transition
 * 3-tensor B (next state given previous state and action), the initial
 * state prior D and the per-step action prior Theta. Log-space copies and
 * per-state likelihood entropies are cached once since inference and node
 * evaluation consume them constantly.
 */

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "btai/categorical.hpp"
#include "btai/named_tensor.hpp"

namespace btai {

inline constexpr const char* kObsAxis = "observation";
inline constexpr const char* kStateAxis = "state";
inline constexpr const char* kNextStateAxis = "next_state";
inline constexpr const char* kActionAxis = "action";

struct ModelTensors {
  NamedTensor a;      // (observation, state)
  NamedTensor b;      // (next_state, state, action)
  Categorical d;      // initial state prior
  Categorical theta;  // per-step action prior

  ModelTensors() = default;
  ModelTensors(NamedTensor a_in, NamedTensor b_in, Categorical d_in,
               Categorical theta_in)
      : a(std::move(a_in)),
        b(std::move(b_in)),
        d(std::move(d_in)),
        theta(std::move(theta_in)) {
    finalize();
  }

  std::size_t n_obs() const { return a.shape[0]; }
  std::size_t n_states() const { return a.shape[1]; }
  std::size_t n_actions() const { return b.shape[2]; }

  double a_at(std::size_t o, std::size_t s) const {
    return a.values[o * n_states() + s];
  }
  double b_at(std::size_t next, std::size_t prev, std::size_t u) const {
    return b.values[(next * n_states() + prev) * n_actions() + u];
  }

  /// Builds the log-space caches; must be called after the tensors are set.
  void finalize() {
    const std::size_t ns = n_states(), no = n_obs(), nu = n_actions();
    log_a_.assign(no * ns, 0.0);
    for (std::size_t i = 0; i < no * ns; ++i) log_a_[i] = safe_log(a.values[i]);
    log_b_.assign(nu, std::vector<double>(ns * ns, 0.0));
    for (std::size_t next = 0; next < ns; ++next)
      for (std::size_t prev = 0; prev < ns; ++prev)
        for (std::size_t u = 0; u < nu; ++u)
          log_b_[u][next * ns + prev] = safe_log(b_at(next, prev, u));
    col_entropy_a_.assign(ns, 0.0);
    for (std::size_t s = 0; s < ns; ++s) {
      double h = 0.0;
      for (std::size_t o = 0; o < no; ++o) {
        double p = a_at(o, s);
        if (p > 0.0) h -= p * std::log(p);
      }
      col_entropy_a_[s] = h;
    }
    finalized_ = true;
  }

  // log A as a dense (observation x state) matrix.
  const std::vector<double>& log_a() const {
    require_finalized();
    return log_a_;
  }
  // log B[u] as a dense (next_state x state) matrix for action u.
  const std::vector<double>& log_b(std::size_t u) const {
    require_finalized();
    return log_b_[u];
  }
  // Entropy of the likelihood column for each state (the ambiguity weights).
  const std::vector<double>& col_entropy_a() const {
    require_finalized();
    return col_entropy_a_;
  }

 private:
  void require_finalized() const {
    if (!finalized_)
      throw std::logic_error("ModelTensors: finalize() not called");
  }

  std::vector<double> log_a_;
  std::vector<std::vector<double>> log_b_;
  std::vector<double> col_entropy_a_;
  bool finalized_ = false;
};

/// Target-distribution parameters: preferred observations and states.
struct Preferences {
  Categorical c_obs;
  Categorical c_states;
  double gamma = 1.0;
};

/**
 * Checks the stochasticity invariants and returns every violation with its
 * coordinates; an empty list means the model is well formed.
 */
inline std::vector<std::string> validate_model(const ModelTensors& m,
                                               double tol = kNormTolerance) {
  std::vector<std::string> violations;
  if (m.a.rank() != 2) {
    violations.push_back("A must have rank 2");
    return violations;
  }
  if (m.b.rank() != 3) {
    violations.push_back("B must have rank 3");
    return violations;
  }
  const std::size_t ns = m.n_states(), no = m.n_obs(), nu = m.n_actions();
  if (m.b.shape[0] != ns || m.b.shape[1] != ns)
    violations.push_back("B state extents do not match A");
  if (m.d.size() != ns) violations.push_back("D length does not match state count");
  if (m.theta.size() != nu)
    violations.push_back("Theta length does not match action count");
  if (!violations.empty()) return violations;

  for (std::size_t s = 0; s < ns; ++s) {
    double sum = 0.0;
    bool neg = false;
    for (std::size_t o = 0; o < no; ++o) {
      double p = m.a_at(o, s);
      if (p < 0.0) neg = true;
      sum += p;
    }
    if (neg) violations.push_back("A column " + std::to_string(s) + " has a negative entry");
    if (std::abs(sum - 1.0) > tol)
      violations.push_back("A column " + std::to_string(s) + " sums to " +
                           std::to_string(sum));
  }
  for (std::size_t u = 0; u < nu; ++u) {
    for (std::size_t prev = 0; prev < ns; ++prev) {
      double sum = 0.0;
      bool neg = false;
      for (std::size_t next = 0; next < ns; ++next) {
        double p = m.b_at(next, prev, u);
        if (p < 0.0) neg = true;
        sum += p;
      }
      if (neg)
        violations.push_back("B column (prev=" + std::to_string(prev) +
                             ", action=" + std::to_string(u) + ") has a negative entry");
      if (std::abs(sum - 1.0) > tol)
        violations.push_back("B column (prev=" + std::to_string(prev) +
                             ", action=" + std::to_string(u) + ") sums to " +
                             std::to_string(sum));
    }
  }
  if (!m.d.is_valid(tol)) violations.push_back("D is not a valid categorical");
  if (!m.theta.is_valid(tol))
    violations.push_back("Theta is not a valid categorical");
  return violations;
}

// Convenience builders used by the environment model constructors.

inline NamedTensor make_likelihood(std::size_t n_obs, std::size_t n_states) {
  return NamedTensor({n_obs, n_states}, {kObsAxis, kStateAxis});
}

inline NamedTensor make_transition(std::size_t n_states, std::size_t n_actions) {
  return NamedTensor({n_states, n_states, n_actions},
                     {kNextStateAxis, kStateAxis, kActionAxis});
}

/// Likelihood column with `weight` on the true observation and the
/// remainder spread uniformly over the others.
inline void set_noisy_column(NamedTensor& a, std::size_t state,
                             std::size_t true_obs, double weight = 0.9) {
  const std::size_t no = a.shape[0], ns = a.shape[1];
  const double rest = no > 1 ? (1.0 - weight) / static_cast<double>(no - 1) : 0.0;
  for (std::size_t o = 0; o < no; ++o)
    a.values[o * ns + state] = (o == true_obs) ? (no > 1 ? weight : 1.0) : rest;
}

}  // namespace btai
