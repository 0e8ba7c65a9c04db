#pragma once

/**
 * Tabular dSprites task. A single shape (square, heart or ellipse) sits at
 * a true pixel position on a 32x32 canvas; each action nudges it by eight
 * pixels, clipped at the borders. The agent only perceives the shape plus
 * a coarse-grained cell, and must drive squares to the bottom-left corner
 * and hearts/ellipses to the bottom-right, then step DOWN into an
 * imaginary row below the image. Entering that row ends the trial with a
 * reward ramping from 1 at the proper corner to -1 at the antipode.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

#include "btai/categorical.hpp"
#include "btai/model.hpp"

namespace btai::env {

enum DSpritesShape : std::size_t { kSquare = 0, kHeart = 1, kEllipse = 2 };
enum DSpritesAction : std::size_t { kMoveUp = 0, kMoveDown = 1, kMoveLeft = 2, kMoveRight = 3 };

struct DSpritesSpec {
  std::size_t granularity = 8;            // 4 or 8
  std::size_t image_extent = 32;          // positions per axis
  std::size_t repeats_per_action = 8;     // true pixels moved per cycle

  void validate() const {
    if (granularity == 0 || image_extent % granularity != 0)
      throw std::invalid_argument("DSpritesSpec: image extent must be divisible by granularity");
    if (repeats_per_action % granularity != 0)
      throw std::invalid_argument("DSpritesSpec: moves must align with the coarse grid");
  }

  std::size_t cols() const { return image_extent / granularity; }        // W
  std::size_t image_rows() const { return image_extent / granularity; }  // H
  std::size_t rows_with_imaginary() const { return image_rows() + 1; }   // H'
  std::size_t coarse_step() const { return repeats_per_action / granularity; }
  std::size_t n_states() const { return 3 * cols() * rows_with_imaginary(); }
  std::size_t imaginary_row() const { return image_rows(); }
  std::size_t goal_x(std::size_t shape) const {
    return shape == kSquare ? 0 : image_extent - 1;
  }
};

/// Index observed for a shape at a coarse position; the imaginary row is
/// the last row of each shape's table.
inline std::size_t dsprites_observe(const DSpritesSpec& spec, std::size_t shape,
                                    std::size_t x, std::size_t y_virtual) {
  if (shape > 2) throw std::invalid_argument("dsprites_observe: bad shape");
  if (x >= spec.image_extent)
    throw std::invalid_argument("dsprites_observe: x out of range");
  if (y_virtual >= spec.rows_with_imaginary())
    throw std::invalid_argument("dsprites_observe: row out of range");
  const std::size_t col = x / spec.granularity;
  const std::size_t h = spec.rows_with_imaginary();
  return shape * (spec.cols() * h) + col * h + y_virtual;
}

/// Same indexing applied to a coarse column directly (the agent's states).
inline std::size_t dsprites_state(const DSpritesSpec& spec, std::size_t shape,
                                  std::size_t col, std::size_t row) {
  const std::size_t h = spec.rows_with_imaginary();
  return shape * (spec.cols() * h) + col * h + row;
}

/// Fraction of runs solved, from the terminal reward of each run.
inline double dsprites_score(const std::vector<double>& rewards) {
  if (rewards.empty()) throw std::invalid_argument("dsprites_score: no runs");
  double total = 0.0;
  for (double r : rewards) total += r;
  const double n = static_cast<double>(rewards.size());
  return (total + n) / (2.0 * n);
}

struct EnvOutcome {
  std::size_t observation = 0;
  double reward = 0.0;
  bool terminal = false;
};

class DSpritesEnv {
 public:
  explicit DSpritesEnv(DSpritesSpec spec) : spec_(spec) { spec_.validate(); }

  const DSpritesSpec& spec() const { return spec_; }

  template <typename Rng>
  std::size_t reset(Rng& rng) {
    std::uniform_int_distribution<std::size_t> shape_pick(0, 2);
    std::uniform_int_distribution<std::size_t> pos_pick(0, spec_.image_extent - 1);
    shape_ = shape_pick(rng);
    x_ = pos_pick(rng);
    y_ = pos_pick(rng);
    terminal_ = false;
    return observe();
  }

  void set(std::size_t shape, std::size_t x, std::size_t y) {
    if (shape > 2 || x >= spec_.image_extent || y >= spec_.image_extent)
      throw std::invalid_argument("DSpritesEnv: state out of range");
    shape_ = shape;
    x_ = x;
    y_ = y;
    terminal_ = false;
  }

  std::size_t observe() const {
    return dsprites_observe(spec_, shape_, x_, y_ / spec_.granularity);
  }

  /// Executes one action (eight pixel moves); DOWN from the bottom image
  /// row enters the imaginary row and ends the trial.
  EnvOutcome step(std::size_t action) {
    if (terminal_) throw std::logic_error("DSpritesEnv: stepping a finished trial");
    const std::size_t k = spec_.repeats_per_action;
    const std::size_t hi = spec_.image_extent - 1;
    switch (action) {
      case kMoveUp:
        y_ = y_ > k ? y_ - k : 0;
        break;
      case kMoveDown:
        if (y_ / spec_.granularity == spec_.image_rows() - 1) {
          terminal_ = true;
          const double target = static_cast<double>(spec_.goal_x(shape_));
          const double dist = std::abs(static_cast<double>(x_) - target);
          return {imaginary_observation(), 1.0 - 2.0 * dist / static_cast<double>(hi),
                  true};
        }
        y_ = std::min(y_ + k, hi);
        break;
      case kMoveLeft:
        x_ = x_ > k ? x_ - k : 0;
        break;
      case kMoveRight:
        x_ = std::min(x_ + k, hi);
        break;
      default:
        throw std::invalid_argument("DSpritesEnv: unknown action");
    }
    return {observe(), 0.0, false};
  }

  std::size_t imaginary_observation() const {
    return dsprites_observe(spec_, shape_, x_, spec_.imaginary_row());
  }

  std::size_t shape() const { return shape_; }
  std::size_t x() const { return x_; }
  std::size_t y() const { return y_; }
  bool terminal() const { return terminal_; }

 private:
  DSpritesSpec spec_;
  std::size_t shape_ = 0;
  std::size_t x_ = 0;
  std::size_t y_ = 0;
  bool terminal_ = false;
};

struct DSpritesTask {
  DSpritesSpec spec;
  ModelTensors model;
  Preferences prefs;
};

/**
 * Builds the agent's coarse model: states and observations share the
 * (shape, column, row-with-imaginary) indexing, transitions move one
 * coarse step with the imaginary row absorbing, and preferences score the
 * proper corner's imaginary cell high, the other imaginary cells low and
 * every image cell neutral.
 */
inline DSpritesTask dsprites_build(const DSpritesSpec& spec, double gamma) {
  spec.validate();
  const std::size_t w = spec.cols(), h = spec.rows_with_imaginary();
  const std::size_t img_rows = spec.image_rows();
  const std::size_t k = spec.coarse_step();
  const std::size_t ns = spec.n_states();
  const std::size_t nu = 4;

  NamedTensor a = make_likelihood(ns, ns);
  for (std::size_t s = 0; s < ns; ++s) set_noisy_column(a, s, s);

  NamedTensor b = make_transition(ns, nu);
  auto set = [&](std::size_t next, std::size_t prev, std::size_t u) {
    b.values[(next * ns + prev) * nu + u] = 1.0;
  };
  for (std::size_t shape = 0; shape < 3; ++shape)
    for (std::size_t col = 0; col < w; ++col)
      for (std::size_t row = 0; row < h; ++row) {
        const std::size_t s = dsprites_state(spec, shape, col, row);
        if (row == spec.imaginary_row()) {
          for (std::size_t u = 0; u < nu; ++u) set(s, s, u);  // absorbing
          continue;
        }
        set(dsprites_state(spec, shape, col, row >= k ? row - k : 0), s, kMoveUp);
        set(dsprites_state(spec, shape, col,
                           row == img_rows - 1 ? spec.imaginary_row()
                                               : std::min(row + k, img_rows - 1)),
            s, kMoveDown);
        set(dsprites_state(spec, shape, col >= k ? col - k : 0, row), s, kMoveLeft);
        set(dsprites_state(spec, shape, std::min(col + k, w - 1), row), s, kMoveRight);
      }

  // The proper corner's imaginary cell carries the top preference, any
  // other entry point the bottom one. Image cells ramp towards the corner
  // so the search has a gradient everywhere, not just beside the exit row.
  std::vector<double> v(ns, 0.0);
  const double ramp_span =
      static_cast<double>((w - 1) + (img_rows - 1));
  for (std::size_t shape = 0; shape < 3; ++shape) {
    const std::size_t goal_col = spec.goal_x(shape) / spec.granularity;
    for (std::size_t col = 0; col < w; ++col) {
      for (std::size_t row = 0; row < img_rows; ++row) {
        const double dist =
            static_cast<double>((col > goal_col ? col - goal_col
                                                : goal_col - col) +
                                (img_rows - 1 - row));
        v[dsprites_state(spec, shape, col, row)] = -0.5 * dist / ramp_span;
      }
      v[dsprites_state(spec, shape, col, spec.imaginary_row())] =
          col == goal_col ? 2.0 : -4.0;
    }
  }
  Categorical c_obs = softmax(v, gamma, kObsAxis);

  // The trial starts somewhere in the image, never in the imaginary row.
  std::vector<double> d(ns, 0.0);
  std::size_t image_states = 0;
  for (std::size_t shape = 0; shape < 3; ++shape)
    for (std::size_t col = 0; col < w; ++col)
      for (std::size_t row = 0; row < img_rows; ++row) {
        d[dsprites_state(spec, shape, col, row)] = 1.0;
        ++image_states;
      }
  for (double& p : d) p /= static_cast<double>(image_states);

  ModelTensors model(std::move(a), std::move(b),
                     Categorical(std::move(d), kStateAxis),
                     uniform(nu, kActionAxis));
  return {spec, std::move(model),
          Preferences{std::move(c_obs), uniform(ns, kStateAxis), gamma}};
}

}  // namespace btai::env
