#pragma once

/**
 * Categorical distribution primitives.
 *
 * Every belief, prior and preference in this library is a categorical
 * distribution over a named model dimension (states, observations or
 * actions). All probability arithmetic is double precision, divergences
 * and entropies are in nats, and probabilities are clamped to a tiny
 * floor before any logarithm so that one-hot vectors stay finite.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace btai {

// Floor applied to every probability before taking a log.
inline constexpr double kProbFloor = 1e-32;

// Two distributions closer than this (max-norm) count as equal.
inline constexpr double kNormTolerance = 1e-9;

inline double clamped(double p) { return p < kProbFloor ? kProbFloor : p; }

inline double safe_log(double p) { return std::log(clamped(p)); }

/// A categorical distribution together with the model dimension it indexes.
struct Categorical {
  std::vector<double> probs;
  std::string dim_name;

  Categorical() = default;
  explicit Categorical(std::vector<double> p, std::string dim = {})
      : probs(std::move(p)), dim_name(std::move(dim)) {}

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }
  double& operator[](std::size_t i) { return probs[i]; }

  bool is_valid(double tol = kNormTolerance) const {
    double sum = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0)) return false;
      sum += p;
    }
    return !probs.empty() && std::abs(sum - 1.0) <= tol;
  }

  std::size_t argmax() const {
    return static_cast<std::size_t>(
        std::max_element(probs.begin(), probs.end()) - probs.begin());
  }
};

inline Categorical uniform(std::size_t n, std::string dim = {}) {
  if (n == 0) throw std::invalid_argument("uniform: size must be positive");
  return Categorical(std::vector<double>(n, 1.0 / static_cast<double>(n)),
                     std::move(dim));
}

/// Zero-based one-hot vector: 1 at `index`, 0 elsewhere.
inline Categorical one_hot(std::size_t index, std::size_t size,
                           std::string dim = {}) {
  if (size == 0) throw std::invalid_argument("one_hot: size must be positive");
  if (index >= size)
    throw std::invalid_argument("one_hot: index " + std::to_string(index) +
                                " out of range for size " +
                                std::to_string(size));
  std::vector<double> p(size, 0.0);
  p[index] = 1.0;
  return Categorical(std::move(p), std::move(dim));
}

/**
 * softmax(precision * values), computed with max subtraction so that large
 * precisions saturate instead of overflowing. The argmax of the input is
 * always the argmax of the output. precision = 0 yields the uniform
 * distribution.
 */
inline Categorical softmax(const std::vector<double>& values, double precision,
                           std::string dim = {}) {
  if (values.empty()) throw std::invalid_argument("softmax: empty input");
  if (!std::isfinite(precision) || precision < 0.0)
    throw std::invalid_argument("softmax: precision must be finite and >= 0");
  double vmax = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("softmax: non-finite input");
    vmax = std::max(vmax, v);
  }
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = std::exp(precision * (values[i] - vmax));
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return Categorical(std::move(out), std::move(dim));
}

/// In-place softmax over a raw log-weight buffer (hot path in inference).
inline void softmax_inplace(std::vector<double>& logw) {
  double vmax = -std::numeric_limits<double>::infinity();
  for (double v : logw) vmax = std::max(vmax, v);
  double sum = 0.0;
  for (double& v : logw) {
    v = std::exp(v - vmax);
    sum += v;
  }
  for (double& v : logw) v /= sum;
}

/**
 * KL divergence sum_i p_i (ln p_i - ln q_i), in nats, with 0 ln 0 := 0 and
 * q clamped away from zero. Nonnegative for valid inputs.
 */
inline double kl_divergence(const Categorical& p, const Categorical& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("kl_divergence: length mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) kl += p[i] * (std::log(p[i]) - safe_log(q[i]));
  }
  return kl;
}

/// Shannon entropy -sum p ln p in nats, with 0 ln 0 := 0.
inline double entropy(const Categorical& p) {
  double h = 0.0;
  for (double pi : p.probs) {
    if (pi > 0.0) h -= pi * std::log(pi);
  }
  return h;
}

inline double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double pi : p) {
    if (pi > 0.0) h -= pi * std::log(pi);
  }
  return h;
}

/// Largest absolute componentwise difference; used for convergence checks.
inline double max_abs_delta(const std::vector<double>& a,
                            const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace btai
