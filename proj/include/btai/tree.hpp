#pragma once

/**
 * The expandable future tree.
 *
 * Future states are indexed by the action sequence that reaches them, so a
 * node's identity is its multi-index. The root carries the empty index and
 * mirrors the present-time posterior; every expansion attaches one child
 * per action, each holding its own posterior over states and observations
 * plus the visit count and aggregated cost consumed by the search.
 */

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "btai/categorical.hpp"

namespace btai {

/// An action sequence naming a future node; empty means the present root.
struct MultiIndex {
  std::vector<std::size_t> actions;

  bool empty() const { return actions.empty(); }
  std::size_t depth() const { return actions.size(); }
  std::size_t last() const {
    if (actions.empty())
      throw std::logic_error("MultiIndex: root has no last action");
    return actions.back();
  }

  bool operator==(const MultiIndex& other) const {
    return actions == other.actions;
  }

  std::string str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < actions.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(actions[i]);
    }
    return s + ")";
  }
};

/// Returns I::u without mutating I.
inline MultiIndex append_action(const MultiIndex& index, std::size_t action,
                                std::size_t n_actions) {
  if (action >= n_actions)
    throw std::invalid_argument("append_action: action " +
                                std::to_string(action) + " out of range");
  MultiIndex out = index;
  out.actions.push_back(action);
  return out;
}

struct TreeNode {
  MultiIndex index;
  Categorical state_posterior;  // over states
  Categorical obs_posterior;    // over observations
  std::size_t visits = 1;       // the expansion itself counts as a visit
  double aggregated_cost = 0.0; // running sum; mean is taken on demand
  TreeNode* parent = nullptr;
  std::vector<std::unique_ptr<TreeNode>> children;

  bool is_leaf() const { return children.empty(); }
  double mean_cost() const {
    return aggregated_cost / static_cast<double>(visits);
  }

  /// Nodes in this subtree, the node itself included.
  std::size_t subtree_size() const {
    std::size_t n = 1;
    for (const auto& c : children) n += c->subtree_size();
    return n;
  }
};

/// Root plus the bookkeeping the search needs about the whole tree.
struct PlanTree {
  std::unique_ptr<TreeNode> root;
  std::size_t expansions = 0;  // since the last pruning

  PlanTree() : root(std::make_unique<TreeNode>()) {}

  static PlanTree fresh(std::size_t n_states, std::size_t n_obs) {
    PlanTree t;
    t.root->state_posterior = uniform(n_states, "state");
    t.root->obs_posterior = uniform(n_obs, "observation");
    return t;
  }

  std::size_t node_count() const { return root->subtree_size(); }
};

}  // namespace btai
