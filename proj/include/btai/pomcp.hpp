#pragma once

/**
 * Partially observable Monte Carlo planning over histories.
 *
 * The search tree is keyed by action/observation histories; belief over
 * the hidden state is a particle multiset maintained by rejection
 * filtering. Each of `timeout` simulations samples a root particle,
 * descends by UCB1 (untried actions first), expands one node, and scores
 * the remainder of the episode with a uniform-random rollout discounted by
 * gamma. The recommended action maximises the root action values.
 *
 * The simulator concept: n_actions(), and step(state, action) returning
 * {next_state, observation, reward} deterministically or via the supplied
 * RNG stream.
 */

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <stdexcept>
#include <vector>

namespace btai::pomcp {

struct PomcpConfig {
  std::size_t timeout = 1000;       // simulations per decision
  double exploration_constant = 3.0;
  double discount = 0.9;
  std::size_t n_particles = 100;
  std::size_t horizon = 30;         // rollout + descent depth cap
};

struct SimStep {
  std::size_t next_state = 0;
  std::size_t observation = 0;
  double reward = 0.0;
  bool terminal = false;  // episode ends after this transition
};

/// Raised when rejection filtering exhausts its attempts without a match.
struct BeliefCollapse : std::runtime_error {
  BeliefCollapse() : std::runtime_error("pomcp: particle filter collapsed") {}
};

struct HistoryNode {
  std::size_t visits = 0;                        // N(h)
  std::vector<std::size_t> action_visits;        // N(h, a)
  std::vector<double> action_values;             // q(h, a)
  // Children keyed by (action, observation).
  std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<HistoryNode>> children;

  explicit HistoryNode(std::size_t n_actions)
      : action_visits(n_actions, 0), action_values(n_actions, 0.0) {}

  HistoryNode* child(std::size_t action, std::size_t obs) {
    auto it = children.find({action, obs});
    return it == children.end() ? nullptr : it->second.get();
  }

  HistoryNode& child_or_create(std::size_t action, std::size_t obs,
                               std::size_t n_actions) {
    auto& slot = children[{action, obs}];
    if (!slot) slot = std::make_unique<HistoryNode>(n_actions);
    return *slot;
  }
};

using ParticleSet = std::vector<std::size_t>;

template <typename Simulator, typename Rng>
class PomcpPlanner {
 public:
  PomcpPlanner(const Simulator& sim, PomcpConfig cfg, ParticleSet initial)
      : sim_(sim), cfg_(cfg), particles_(std::move(initial)),
        root_(std::make_unique<HistoryNode>(sim.n_actions())) {
    if (particles_.empty())
      throw std::invalid_argument("pomcp: empty initial particle set");
  }

  const ParticleSet& particles() const { return particles_; }
  const HistoryNode& root() const { return *root_; }

  /// Runs `timeout` simulations and returns the value-maximising action.
  std::size_t search(Rng& rng, std::size_t remaining_steps) {
    const std::size_t depth_cap = std::min(cfg_.horizon, remaining_steps);
    std::uniform_int_distribution<std::size_t> pick(0, particles_.size() - 1);
    for (std::size_t i = 0; i < cfg_.timeout; ++i) {
      std::size_t state = particles_[pick(rng)];
      simulate(*root_, state, 0, depth_cap, rng);
    }
    std::size_t best = 0;
    double best_q = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < root_->action_values.size(); ++a) {
      if (root_->action_visits[a] > 0 && root_->action_values[a] > best_q) {
        best_q = root_->action_values[a];
        best = a;
      }
    }
    return best;
  }

  /**
   * Rejection-filters the belief through the executed action, keeping
   * successors whose simulated observation matches, and moves the root to
   * the realised child so the subtree is reused.
   */
  void advance(std::size_t action, std::size_t observation, Rng& rng) {
    ParticleSet survivors;
    survivors.reserve(cfg_.n_particles);
    std::uniform_int_distribution<std::size_t> pick(0, particles_.size() - 1);
    const std::size_t max_attempts = 1000 * cfg_.n_particles;
    std::size_t attempts = 0;
    while (survivors.size() < cfg_.n_particles) {
      if (attempts++ >= max_attempts) {
        if (survivors.empty()) throw BeliefCollapse();
        // Reinvigorate with copies of survivors when acceptance is slow.
        std::uniform_int_distribution<std::size_t> dup(0, survivors.size() - 1);
        while (survivors.size() < cfg_.n_particles)
          survivors.push_back(survivors[dup(rng)]);
        break;
      }
      SimStep step = sim_.step(particles_[pick(rng)], action, rng);
      if (step.observation == observation) survivors.push_back(step.next_state);
    }
    particles_ = std::move(survivors);

    auto it = root_->children.find({action, observation});
    if (it != root_->children.end()) {
      std::unique_ptr<HistoryNode> next = std::move(it->second);
      root_ = std::move(next);
    } else {
      root_ = std::make_unique<HistoryNode>(sim_.n_actions());
    }
  }

 private:
  double simulate(HistoryNode& node, std::size_t state, std::size_t depth,
                  std::size_t depth_cap, Rng& rng) {
    if (depth >= depth_cap) return 0.0;

    // Untried actions first, in index order.
    std::size_t action = node.action_visits.size();
    for (std::size_t a = 0; a < node.action_visits.size(); ++a) {
      if (node.action_visits[a] == 0) {
        action = a;
        break;
      }
    }

    double ret;
    if (action < node.action_visits.size()) {
      SimStep step = sim_.step(state, action, rng);
      node.child_or_create(action, step.observation, sim_.n_actions());
      ret = step.reward;
      if (!step.terminal)
        ret += cfg_.discount * rollout(step.next_state, depth + 1, depth_cap, rng);
    } else {
      action = ucb1(node);
      SimStep step = sim_.step(state, action, rng);
      HistoryNode& child =
          node.child_or_create(action, step.observation, sim_.n_actions());
      ret = step.reward;
      if (!step.terminal)
        ret += cfg_.discount *
               simulate(child, step.next_state, depth + 1, depth_cap, rng);
    }

    node.visits += 1;
    node.action_visits[action] += 1;
    node.action_values[action] +=
        (ret - node.action_values[action]) /
        static_cast<double>(node.action_visits[action]);
    return ret;
  }

  std::size_t ucb1(const HistoryNode& node) const {
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    const double log_n = std::log(static_cast<double>(node.visits));
    for (std::size_t a = 0; a < node.action_visits.size(); ++a) {
      const double score =
          node.action_values[a] +
          cfg_.exploration_constant *
              std::sqrt(log_n / static_cast<double>(node.action_visits[a]));
      if (score > best_score) {
        best_score = score;
        best = a;
      }
    }
    return best;
  }

  double rollout(std::size_t state, std::size_t depth, std::size_t depth_cap,
                 Rng& rng) {
    double ret = 0.0, scale = 1.0;
    std::uniform_int_distribution<std::size_t> pick(0, sim_.n_actions() - 1);
    for (std::size_t d = depth; d < depth_cap; ++d) {
      SimStep step = sim_.step(state, pick(rng), rng);
      ret += scale * step.reward;
      if (step.terminal) break;
      scale *= cfg_.discount;
      state = step.next_state;
    }
    return ret;
  }

  const Simulator& sim_;
  PomcpConfig cfg_;
  ParticleSet particles_;
  std::unique_ptr<HistoryNode> root_;
};

}  // namespace btai::pomcp
