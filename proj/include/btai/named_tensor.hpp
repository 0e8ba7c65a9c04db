#pragma once

/**
 * Dense tensors with named axes and the generalized inner product.
 *
 * A NamedTensor is a row-major array whose axes carry labels like "state"
 * or "observation". The generalized inner product contracts the tensor
 * with one weighting vector per named axis, leaving exactly one free axis:
 *
 *   Z(x_j) = sum over all other axes of V1(x_1) * ... * W(x_1..x_N) * ...
 *
 * Factors are matched to axes by name, so the same matrix can be averaged
 * row-wise or column-wise without transposing anything.
 */

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "btai/categorical.hpp"

namespace btai {

struct NamedTensor {
  std::vector<double> values;        // row-major
  std::vector<std::string> dim_names;
  std::vector<std::size_t> shape;

  NamedTensor() = default;

  NamedTensor(std::vector<std::size_t> shape_in,
              std::vector<std::string> names_in, double fill = 0.0)
      : dim_names(std::move(names_in)), shape(std::move(shape_in)) {
    if (dim_names.size() != shape.size())
      throw std::invalid_argument("NamedTensor: one name per axis required");
    for (std::size_t i = 0; i < dim_names.size(); ++i)
      for (std::size_t j = i + 1; j < dim_names.size(); ++j)
        if (dim_names[i] == dim_names[j])
          throw std::invalid_argument("NamedTensor: duplicate axis name '" +
                                      dim_names[i] + "'");
    std::size_t n = 1;
    for (std::size_t e : shape) {
      if (e == 0) throw std::invalid_argument("NamedTensor: zero extent");
      n *= e;
    }
    values.assign(n, fill);
  }

  std::size_t rank() const { return shape.size(); }
  std::size_t numel() const { return values.size(); }

  std::size_t axis(const std::string& name) const {
    for (std::size_t i = 0; i < dim_names.size(); ++i)
      if (dim_names[i] == name) return i;
    throw std::invalid_argument("NamedTensor: unknown axis '" + name + "'");
  }

  std::size_t offset(const std::vector<std::size_t>& idx) const {
    std::size_t off = 0;
    for (std::size_t a = 0; a < shape.size(); ++a) off = off * shape[a] + idx[a];
    return off;
  }

  double at(const std::vector<std::size_t>& idx) const {
    return values[offset(idx)];
  }
  double& at(const std::vector<std::size_t>& idx) { return values[offset(idx)]; }

  /// Elementwise natural log with the shared probability floor.
  NamedTensor log_clamped() const {
    NamedTensor out = *this;
    for (double& v : out.values) v = safe_log(v);
    return out;
  }
};

/**
 * Generalized inner product: contracts `w` with one factor per axis except
 * a single free axis, returning the weighted average along that axis.
 * Factors are (axis name, weights) pairs; exactly rank-1 factors must be
 * given and every factor must match a distinct axis.
 */
inline std::vector<double> inner_product(
    const NamedTensor& w,
    const std::vector<std::pair<std::string, std::vector<double>>>& factors) {
  if (w.rank() == 0) throw std::invalid_argument("inner_product: rank-0 tensor");
  if (factors.size() + 1 != w.rank())
    throw std::invalid_argument(
        "inner_product: need exactly rank-1 factors, got " +
        std::to_string(factors.size()) + " for rank " + std::to_string(w.rank()));

  // Map each factor onto its axis; the one unmatched axis is the output.
  std::vector<const std::vector<double>*> weights(w.rank(), nullptr);
  for (const auto& [name, vec] : factors) {
    std::size_t a = w.axis(name);
    if (weights[a] != nullptr)
      throw std::invalid_argument("inner_product: duplicate factor for axis '" +
                                  name + "'");
    if (vec.size() != w.shape[a])
      throw std::invalid_argument("inner_product: factor length mismatch on '" +
                                  name + "'");
    weights[a] = &vec;
  }
  std::size_t free_axis = w.rank();
  for (std::size_t a = 0; a < w.rank(); ++a)
    if (weights[a] == nullptr) free_axis = a;

  std::vector<double> out(w.shape[free_axis], 0.0);

  // Single row-major sweep, accumulating each element into its output slot.
  std::vector<std::size_t> idx(w.rank(), 0);
  for (std::size_t flat = 0; flat < w.numel(); ++flat) {
    double term = w.values[flat];
    for (std::size_t a = 0; a < w.rank(); ++a)
      if (a != free_axis) term *= (*weights[a])[idx[a]];
    out[idx[free_axis]] += term;
    for (std::size_t a = w.rank(); a-- > 0;) {
      if (++idx[a] < w.shape[a]) break;
      idx[a] = 0;
    }
  }
  return out;
}

inline std::vector<double> inner_product(
    const NamedTensor& w,
    const std::vector<std::pair<std::string, Categorical>>& factors) {
  std::vector<std::pair<std::string, std::vector<double>>> raw;
  raw.reserve(factors.size());
  for (const auto& [name, cat] : factors) raw.emplace_back(name, cat.probs);
  return inner_product(w, raw);
}

}  // namespace btai
