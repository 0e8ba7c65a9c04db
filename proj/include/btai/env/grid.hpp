#pragma once

/**
 * Grid tasks: mazes and frozen lakes, both loaded from plain ASCII maps.
 *
 * Legend: '#' wall or boundary, ' ' walkable, 'S' start, 'E' exit or
 * frisbee, 'H' hole (lakes only). Rows must be rectangular.
 *
 * The maze agent observes the Manhattan distance (through walls) between
 * its cell and the exit; moving into a wall degenerates to idling. The
 * lake agent observes its cell index; rewards ramp linearly from 0 at the
 * farthest cell to 1 on the frisbee, with -1 on every hole, and moves off
 * the boundary are no-ops.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "btai/categorical.hpp"
#include "btai/model.hpp"

namespace btai::env {

enum class Cell : char { kWall = '#', kEmpty = ' ', kStart = 'S', kGoal = 'E', kHole = 'H' };

enum GridAction : std::size_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kIdle = 4 };

struct Coord {
  std::size_t row = 0;
  std::size_t col = 0;
  bool operator==(const Coord&) const = default;
};

inline std::size_t manhattan(const Coord& a, const Coord& b) {
  const auto d = [](std::size_t x, std::size_t y) { return x > y ? x - y : y - x; };
  return d(a.row, b.row) + d(a.col, b.col);
}

struct GridSpec {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Cell> cells;  // row-major
  Coord start;
  Coord goal;

  Cell at(std::size_t row, std::size_t col) const { return cells[row * width + col]; }
  Cell at(const Coord& c) const { return at(c.row, c.col); }
  bool is_wall(const Coord& c) const { return at(c) == Cell::kWall; }
  bool is_hole(const Coord& c) const { return at(c) == Cell::kHole; }
  bool walkable(const Coord& c) const { return !is_wall(c); }
};

/**
 * Parses an ASCII grid. Requires rectangular rows, exactly one start and
 * one goal; reports the offending line and column on malformed input.
 */
inline GridSpec parse_grid(const std::vector<std::string>& rows,
                           bool holes_allowed) {
  if (rows.empty()) throw std::invalid_argument("grid: empty map");
  GridSpec g;
  g.height = rows.size();
  g.width = rows[0].size();
  if (g.width == 0) throw std::invalid_argument("grid: empty first row");
  g.cells.reserve(g.width * g.height);
  std::size_t starts = 0, goals = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != g.width)
      throw std::invalid_argument("grid: row " + std::to_string(r + 1) +
                                  " has length " + std::to_string(rows[r].size()) +
                                  ", expected " + std::to_string(g.width));
    for (std::size_t c = 0; c < g.width; ++c) {
      const char ch = rows[r][c];
      switch (ch) {
        case '#': g.cells.push_back(Cell::kWall); break;
        case ' ': g.cells.push_back(Cell::kEmpty); break;
        case 'S':
          g.cells.push_back(Cell::kStart);
          g.start = {r, c};
          ++starts;
          break;
        case 'E':
          g.cells.push_back(Cell::kGoal);
          g.goal = {r, c};
          ++goals;
          break;
        case 'H':
          if (!holes_allowed)
            throw std::invalid_argument("grid: hole at line " + std::to_string(r + 1) +
                                        ", column " + std::to_string(c + 1) +
                                        " not allowed in a maze");
          g.cells.push_back(Cell::kHole);
          break;
        default:
          throw std::invalid_argument(std::string("grid: unknown cell '") + ch +
                                      "' at line " + std::to_string(r + 1) +
                                      ", column " + std::to_string(c + 1));
      }
    }
  }
  if (starts != 1)
    throw std::invalid_argument("grid: expected exactly one 'S', found " +
                                std::to_string(starts));
  if (goals != 1)
    throw std::invalid_argument("grid: expected exactly one 'E', found " +
                                std::to_string(goals));
  return g;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open grid file: " + path);
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    rows.push_back(line);
  }
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  return rows;
}

inline GridSpec maze_load(const std::vector<std::string>& rows) {
  GridSpec g = parse_grid(rows, /*holes_allowed=*/false);
  for (std::size_t r = 0; r < g.height; ++r)
    for (std::size_t c = 0; c < g.width; ++c)
      if ((r == 0 || c == 0 || r + 1 == g.height || c + 1 == g.width) &&
          g.at(r, c) != Cell::kWall)
        throw std::invalid_argument("maze: border must be wall at line " +
                                    std::to_string(r + 1) + ", column " +
                                    std::to_string(c + 1));
  return g;
}

inline GridSpec maze_load_file(const std::string& path) {
  return maze_load(read_lines(path));
}

inline GridSpec lake_load(const std::vector<std::string>& rows) {
  return parse_grid(rows, /*holes_allowed=*/true);
}

inline GridSpec lake_load_file(const std::string& path) {
  return lake_load(read_lines(path));
}

// ---------------------------------------------------------------------------
// Maze
// ---------------------------------------------------------------------------

/// Manhattan distance between a cell and the exit, walls traversable.
inline std::size_t maze_observe(const GridSpec& spec, const Coord& pos) {
  if (spec.is_wall(pos))
    throw std::logic_error("maze_observe: position is a wall");
  return manhattan(pos, spec.goal);
}

/// One move; stepping into a wall or off the map degenerates to idling.
inline Coord maze_step(const GridSpec& spec, const Coord& pos, GridAction action) {
  Coord next = pos;
  switch (action) {
    case kUp:
      if (pos.row == 0) return pos;
      next.row -= 1;
      break;
    case kDown:
      if (pos.row + 1 >= spec.height) return pos;
      next.row += 1;
      break;
    case kLeft:
      if (pos.col == 0) return pos;
      next.col -= 1;
      break;
    case kRight:
      if (pos.col + 1 >= spec.width) return pos;
      next.col += 1;
      break;
    case kIdle:
      return pos;
    default:
      throw std::invalid_argument("maze_step: unknown action");
  }
  return spec.is_wall(next) ? pos : next;
}

/// Enumeration of walkable cells in row-major order; the agent's states.
struct CellIndex {
  std::vector<Coord> cells;
  std::vector<std::size_t> index_of;  // grid offset -> state index or npos

  explicit CellIndex(const GridSpec& spec) {
    index_of.assign(spec.width * spec.height, static_cast<std::size_t>(-1));
    for (std::size_t r = 0; r < spec.height; ++r)
      for (std::size_t c = 0; c < spec.width; ++c)
        if (spec.walkable({r, c})) {
          index_of[r * spec.width + c] = cells.size();
          cells.push_back({r, c});
        }
  }

  std::size_t size() const { return cells.size(); }
  std::size_t state(const GridSpec& spec, const Coord& pos) const {
    return index_of[pos.row * spec.width + pos.col];
  }
};

struct GridTask {
  GridSpec spec;
  CellIndex cells;
  ModelTensors model;
  Preferences prefs;

  std::size_t state_of(const Coord& pos) const { return cells.state(spec, pos); }
};

namespace detail {

/// Breadth-first (wall-aware) distance from every walkable cell to the
/// exit, the knowledge a modeller encodes in hand-crafted state
/// preferences; unlike the Manhattan observation it has no local minima.
inline std::vector<std::size_t> path_distances(const GridSpec& spec,
                                               const CellIndex& cells) {
  const std::size_t n = cells.size();
  std::vector<std::size_t> dist(n, static_cast<std::size_t>(-1));
  std::vector<std::size_t> queue;
  const std::size_t dst = cells.state(spec, spec.goal);
  dist[dst] = 0;
  queue.push_back(dst);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::size_t s = queue[head];
    for (GridAction a : {kUp, kDown, kLeft, kRight}) {
      const Coord next = maze_step(spec, cells.cells[s], a);
      const std::size_t ns = cells.state(spec, next);
      if (dist[ns] == static_cast<std::size_t>(-1)) {
        dist[ns] = dist[s] + 1;
        queue.push_back(ns);
      }
    }
  }
  return dist;
}

}  // namespace detail

/**
 * Builds the maze model: states are walkable cells, transitions follow
 * maze_step deterministically, and the likelihood concentrates 0.9 on the
 * cell's true distance observation. Preferences over observations ramp
 * towards the exit; state preferences are uniform unless requested, in
 * which case the shortest corridor scores 3, cells adjacent to the exit 2
 * and everything else 1.
 */
inline GridTask maze_build(const GridSpec& spec, bool use_state_prefs,
                           double gamma) {
  CellIndex cells(spec);
  const std::size_t ns = cells.size();
  const std::size_t nu = 5;

  std::size_t max_dist = 0;
  for (const Coord& c : cells.cells)
    max_dist = std::max(max_dist, maze_observe(spec, c));
  const std::size_t no = max_dist + 1;

  NamedTensor a = make_likelihood(no, ns);
  for (std::size_t s = 0; s < ns; ++s)
    set_noisy_column(a, s, maze_observe(spec, cells.cells[s]));

  NamedTensor b = make_transition(ns, nu);
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t u = 0; u < nu; ++u) {
      const Coord next = maze_step(spec, cells.cells[s], static_cast<GridAction>(u));
      b.values[(cells.state(spec, next) * ns + s) * nu + u] = 1.0;
    }

  // Preference ramp over distances: observation 0 (the exit) scores |O|.
  std::vector<double> v(no);
  for (std::size_t o = 0; o < no; ++o) v[o] = static_cast<double>(no - o);
  Categorical c_obs = softmax(v, gamma, kObsAxis);

  // Hand-crafted state preferences: three bands of wall-aware closeness to
  // the exit (near = 3, middle = 2, far = 1), cut at thirds of the longest
  // path distance.
  Categorical c_states = uniform(ns, kStateAxis);
  if (use_state_prefs) {
    const auto dist = detail::path_distances(spec, cells);
    std::size_t deepest = 0;
    for (std::size_t d : dist)
      if (d != static_cast<std::size_t>(-1)) deepest = std::max(deepest, d);
    std::vector<double> w(ns, 1.0);
    for (std::size_t s = 0; s < ns; ++s) {
      if (3 * dist[s] <= deepest)
        w[s] = 3.0;
      else if (3 * dist[s] <= 2 * deepest)
        w[s] = 2.0;
    }
    c_states = softmax(w, gamma, kStateAxis);
  }

  ModelTensors model(std::move(a), std::move(b),
                     one_hot(cells.state(spec, spec.start), ns, kStateAxis),
                     uniform(nu, kActionAxis));
  return {spec, std::move(cells), std::move(model),
          Preferences{std::move(c_obs), std::move(c_states), gamma}};
}

// ---------------------------------------------------------------------------
// Frozen lake
// ---------------------------------------------------------------------------

/// Reward of standing on a cell: -1 on holes, otherwise a linear ramp from
/// 0 at the farthest cell to exactly 1 on the frisbee.
inline double lake_reward(const GridSpec& spec, const Coord& pos,
                          std::size_t max_dist) {
  if (spec.is_hole(pos)) return -1.0;
  return 1.0 - static_cast<double>(manhattan(pos, spec.goal)) /
                   static_cast<double>(max_dist);
}

inline std::size_t lake_max_dist(const GridSpec& spec) {
  std::size_t max_dist = 0;
  for (std::size_t r = 0; r < spec.height; ++r)
    for (std::size_t c = 0; c < spec.width; ++c)
      if (spec.walkable({r, c}))
        max_dist = std::max(max_dist, manhattan({r, c}, spec.goal));
  return max_dist;
}

/// One move; leaving the lake through the boundary is a no-op.
inline std::pair<Coord, double> lake_step(const GridSpec& spec, const Coord& pos,
                                          GridAction action) {
  if (action == kIdle) throw std::invalid_argument("lake_step: no idle action");
  const Coord next = maze_step(spec, pos, action);  // boundary rows are walls
  return {next, lake_reward(spec, next, lake_max_dist(spec))};
}

/**
 * Builds the lake model: the agent observes its own cell index, so the
 * likelihood is a 0.9-concentrated identity; observation preferences
 * follow the reward ramp.
 */
inline GridTask lake_build(const GridSpec& spec, double gamma) {
  CellIndex cells(spec);
  const std::size_t ns = cells.size();
  const std::size_t nu = 4;
  const std::size_t no = ns;
  const std::size_t max_dist = lake_max_dist(spec);

  NamedTensor a = make_likelihood(no, ns);
  for (std::size_t s = 0; s < ns; ++s) set_noisy_column(a, s, s);

  NamedTensor b = make_transition(ns, nu);
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t u = 0; u < nu; ++u) {
      const Coord next = maze_step(spec, cells.cells[s], static_cast<GridAction>(u));
      b.values[(cells.state(spec, next) * ns + s) * nu + u] = 1.0;
    }

  // Preference scores are the cell rewards rescaled so that one Manhattan
  // step changes the score by one unit, the same spacing the maze ramp
  // uses; the raw [-1, 1] rewards would leave the softmax nearly flat.
  std::vector<double> v(no);
  for (std::size_t s = 0; s < ns; ++s)
    v[s] = lake_reward(spec, cells.cells[s], max_dist) *
           static_cast<double>(max_dist);
  Categorical c_obs = softmax(v, gamma, kObsAxis);

  ModelTensors model(std::move(a), std::move(b),
                     one_hot(cells.state(spec, spec.start), ns, kStateAxis),
                     uniform(nu, kActionAxis));
  return {spec, std::move(cells), std::move(model),
          Preferences{std::move(c_obs), uniform(ns, kStateAxis), gamma}};
}

/**
 * State-indexed lake dynamics with per-cell rewards precomputed, shared by
 * the planner harness and the sampling-based baseline (whose rollouts call
 * step millions of times).
 */
class LakeDynamics {
 public:
  explicit LakeDynamics(const GridSpec& spec)
      : spec_(spec), cells_(spec), max_dist_(lake_max_dist(spec)) {
    const std::size_t ns = cells_.size();
    reward_.resize(ns);
    for (std::size_t s = 0; s < ns; ++s)
      reward_[s] = lake_reward(spec_, cells_.cells[s], max_dist_);
    next_.assign(ns * 4, 0);
    for (std::size_t s = 0; s < ns; ++s)
      for (std::size_t u = 0; u < 4; ++u)
        next_[s * 4 + u] = cells_.state(
            spec_, maze_step(spec_, cells_.cells[s], static_cast<GridAction>(u)));
  }

  std::size_t n_states() const { return cells_.size(); }
  std::size_t n_actions() const { return 4; }
  std::size_t start_state() const { return cells_.state(spec_, spec_.start); }
  std::size_t goal_state() const { return cells_.state(spec_, spec_.goal); }
  std::size_t next_state(std::size_t s, std::size_t u) const { return next_[s * 4 + u]; }
  double reward(std::size_t s) const { return reward_[s]; }
  const GridSpec& spec() const { return spec_; }
  const CellIndex& cells() const { return cells_; }

 private:
  GridSpec spec_;
  CellIndex cells_;
  std::size_t max_dist_;
  std::vector<double> reward_;
  std::vector<std::size_t> next_;
};

}  // namespace btai::env
