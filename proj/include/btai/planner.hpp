#pragma once

/**
 * Expected-free-energy guided tree search.
 *
 * Each planning iteration selects a leaf by descending the tree along the
 * maximum of the UCT criterion
 *
 *   UCT_J = -mean_cost_J + C_p * sqrt(ln n / n_J),
 *
 * expands it with one child per action, infers the children's posteriors,
 * scores every child with the configured cost functional, and propagates
 * the cheapest child's cost back towards the root. Actions are finally
 * sampled from a softmax over the root children's mean costs.
 */

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <random>
#include <stdexcept>
#include <vector>

#include "btai/belief_chain.hpp"
#include "btai/categorical.hpp"
#include "btai/model.hpp"
#include "btai/tree.hpp"
#include "btai/vmp.hpp"

namespace btai {

enum class EvaluationType { kEfe, kDoubleKl };

struct PlannerConfig {
  std::size_t planning_iterations = 10;
  double exploration_constant = 2.4;   // C_p
  double gamma_preferences = 2.0;      // precision used when building C
  double omega_action = 100.0;         // action-selection precision
  EvaluationType evaluation_type = EvaluationType::kEfe;

  void validate() const {
    if (planning_iterations < 1)
      throw std::invalid_argument("PlannerConfig: planning_iterations >= 1 required");
    if (exploration_constant < 0.0)
      throw std::invalid_argument("PlannerConfig: exploration constant must be >= 0");
    if (omega_action <= 0.0)
      throw std::invalid_argument("PlannerConfig: omega must be positive");
  }
};

/// UCT value of a candidate child given its parent's visit count.
inline double uct_score(const TreeNode& node, std::size_t parent_visits,
                        double exploration_constant) {
  return -node.mean_cost() +
         exploration_constant *
             std::sqrt(std::log(static_cast<double>(parent_visits)) /
                       static_cast<double>(node.visits));
}

/**
 * Descends from the root by argmax UCT until a leaf is reached. Ties break
 * towards the lowest action index. `root_visits` supplies n for the root's
 * own children (1 + completed planning iterations).
 */
inline TreeNode& select_leaf(TreeNode& root, std::size_t root_visits,
                             double exploration_constant) {
  TreeNode* node = &root;
  while (!node->is_leaf()) {
    const std::size_t n = (node == &root) ? root_visits : node->visits;
    TreeNode* best = nullptr;
    double best_score = -std::numeric_limits<double>::infinity();
    for (const auto& child : node->children) {
      const double score = uct_score(*child, n, exploration_constant);
      if (score > best_score) {
        best_score = score;
        best = child.get();
      }
    }
    node = best;
  }
  return *node;
}

/**
 * Attaches one child per action to a leaf, each with uniform posteriors,
 * the expansion counting as its first visit. Returns the new children.
 */
inline std::vector<TreeNode*> expand(TreeNode& leaf, const ModelTensors& m) {
  if (!leaf.is_leaf()) throw std::logic_error("expand: node already expanded");
  const std::size_t nu = m.n_actions();
  std::vector<TreeNode*> out;
  out.reserve(nu);
  for (std::size_t u = 0; u < nu; ++u) {
    auto child = std::make_unique<TreeNode>();
    child->index = append_action(leaf.index, u, nu);
    child->state_posterior = uniform(m.n_states(), kStateAxis);
    child->obs_posterior = uniform(m.n_obs(), kObsAxis);
    child->parent = &leaf;
    out.push_back(child.get());
    leaf.children.push_back(std::move(child));
  }
  return out;
}

/**
 * Expected free energy of a node: risk over observations (divergence from
 * the preferred observations) plus ambiguity (expected entropy of the
 * likelihood column).
 */
inline double evaluate_classic(const TreeNode& node, const ModelTensors& m,
                               const Preferences& prefs) {
  double cost = kl_divergence(node.obs_posterior, prefs.c_obs);
  const auto& h = m.col_entropy_a();
  const auto& d = node.state_posterior.probs;
  for (std::size_t s = 0; s < d.size(); ++s) cost += d[s] * h[s];
  return cost;
}

/// Pure cost: risk over states plus risk over observations.
inline double evaluate_pcost(const TreeNode& node, const ModelTensors& /*m*/,
                             const Preferences& prefs) {
  return kl_divergence(node.state_posterior, prefs.c_states) +
         kl_divergence(node.obs_posterior, prefs.c_obs);
}

inline double evaluate(const TreeNode& node, const ModelTensors& m,
                       const Preferences& prefs, EvaluationType type) {
  return type == EvaluationType::kEfe ? evaluate_classic(node, m, prefs)
                                      : evaluate_pcost(node, m, prefs);
}

/**
 * Propagates the cheapest fresh child's cost along the path from the
 * expanded leaf up to (excluding) the root, bumping each visit count.
 */
inline void backpropagate(TreeNode& expanded_leaf, const TreeNode& root) {
  if (expanded_leaf.children.empty())
    throw std::logic_error("backpropagate: leaf has no evaluated children");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& child : expanded_leaf.children)
    best = std::min(best, child->mean_cost());
  for (TreeNode* node = &expanded_leaf; node != nullptr && node != &root;
       node = node->parent) {
    node->aggregated_cost += best;
    node->visits += 1;
  }
}

/**
 * Runs exactly cfg.planning_iterations select / expand / infer / evaluate /
 * backpropagate cycles on the tree.
 */
inline void plan(PlanTree& tree, const BeliefChain& /*chain*/,
                 const ModelTensors& m, const Preferences& prefs,
                 const PlannerConfig& cfg) {
  cfg.validate();
  for (std::size_t iter = 0; iter < cfg.planning_iterations; ++iter) {
    const std::size_t root_visits = 1 + tree.expansions;
    TreeNode& leaf = select_leaf(*tree.root, root_visits, cfg.exploration_constant);
    expand(leaf, m);
    vmp::run_vmp_on_children(leaf, m);
    for (auto& child : leaf.children) {
      child->aggregated_cost = evaluate(*child, m, prefs, cfg.evaluation_type);
      child->visits = 1;
    }
    backpropagate(leaf, *tree.root);
    tree.expansions += 1;
  }
}

/// Softmax distribution over the root's children used for action selection.
inline Categorical action_distribution(const TreeNode& root, double omega) {
  if (root.children.empty())
    throw std::logic_error("action_distribution: root has no children");
  std::vector<double> neg_mean(root.children.size());
  for (std::size_t u = 0; u < root.children.size(); ++u)
    neg_mean[u] = -root.children[u]->mean_cost();
  return softmax(neg_mean, omega, kActionAxis);
}

/// Samples the next action from softmax(-omega * mean cost) at the root.
template <typename Rng>
std::size_t select_action(const TreeNode& root, const PlannerConfig& cfg,
                          Rng& rng) {
  Categorical dist = action_distribution(root, cfg.omega_action);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double r = unit(rng);
  double acc = 0.0;
  for (std::size_t u = 0; u < dist.size(); ++u) {
    acc += dist[u];
    if (r <= acc) return u;
  }
  return dist.size() - 1;
}

}  // namespace btai
