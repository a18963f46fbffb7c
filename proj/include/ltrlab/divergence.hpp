// Exact Wasserstein-1 between equal-size empirical distributions, computed
// in primal form as a minimum-cost perfect matching (Hungarian method on
// 64-bit reals). Also the item-level / list-level empirical feature
// distributions and the distinguishability check
// W1 <= R(1 - min balanced 0-1 loss) on discrete samples.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ltrlab/losses.hpp"
#include "ltrlab/tensor.hpp"

namespace ltrlab::ot {

// n points with uniform weights in a common Euclidean space.
struct EmpiricalDist {
  std::vector<std::vector<double>> points;

  std::size_t size() const { return points.size(); }
  std::size_t dim() const { return points.empty() ? 0 : points[0].size(); }
  void validate() const {
    if (points.empty())
      throw std::invalid_argument("EmpiricalDist: need at least one point");
    for (const auto& p : points) {
      if (p.size() != points[0].size())
        throw std::invalid_argument("EmpiricalDist: ragged point dimensions");
      for (double v : p)
        if (!std::isfinite(v))
          throw std::invalid_argument("EmpiricalDist: non-finite coordinate");
    }
  }
};

inline double euclidean(const std::vector<double>& a,
                        const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// Minimum-cost assignment on a square cost matrix (Jonker-style shortest
// augmenting path, O(n^3)). Returns row -> column and the total cost.
inline double solve_assignment(const std::vector<std::vector<double>>& cost,
                               std::vector<int>& row_to_col) {
  const int n = int(cost.size());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  row_to_col.assign(n, -1);
  double total = 0.0;
  for (int j = 1; j <= n; ++j) {
    if (p[j]) {
      row_to_col[p[j] - 1] = j - 1;
      total += cost[p[j] - 1][j - 1];
    }
  }
  return total;
}

// W1 between equal-size uniform empirical distributions: (1/n) x the
// minimum-cost perfect matching under the Euclidean ground distance.
inline double wasserstein1_exact(const EmpiricalDist& p,
                                 const EmpiricalDist& q) {
  p.validate();
  q.validate();
  if (p.size() != q.size())
    throw std::invalid_argument(
        "wasserstein1_exact: sample counts differ (" +
        std::to_string(p.size()) + " vs " + std::to_string(q.size()) +
        "); resample to equal sizes upstream");
  if (p.dim() != q.dim())
    throw std::invalid_argument("wasserstein1_exact: dimension mismatch (" +
                                std::to_string(p.dim()) + " vs " +
                                std::to_string(q.dim()) + ")");
  const std::size_t n = p.size();
  std::vector<std::vector<double>> cost(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      cost[i][j] = euclidean(p.points[i], q.points[j]);
  std::vector<int> assignment;
  return solve_assignment(cost, assignment) / double(n);
}

// Pool all item vectors from all lists: n lists of l items -> n*l points.
inline EmpiricalDist item_level_dist(const std::vector<Tensor>& feature_lists) {
  EmpiricalDist d;
  for (const auto& z : feature_lists)
    for (std::size_t r = 0; r < z.rows(); ++r) {
      std::vector<double> v(z.cols());
      for (std::size_t c = 0; c < z.cols(); ++c) v[c] = z.at(r, c);
      d.points.push_back(std::move(v));
    }
  d.validate();
  return d;
}

// Flatten each list to R^(l*k) after sorting items by the canonical
// lexicographic key; lists are permutation-invariant, so the canonical
// order makes the flattened Euclidean metric well-defined.
inline EmpiricalDist list_level_dist(const std::vector<Tensor>& feature_lists) {
  EmpiricalDist d;
  if (feature_lists.empty())
    throw std::invalid_argument("list_level_dist: no lists");
  const std::size_t l = feature_lists[0].rows();
  const std::size_t k = feature_lists[0].cols();
  for (const auto& z : feature_lists) {
    if (z.rows() != l || z.cols() != k)
      throw std::invalid_argument(
          "list_level_dist: ragged list shapes (" + z.shape_str() + " vs [" +
          std::to_string(l) + "x" + std::to_string(k) + "])");
    std::vector<std::vector<double>> items(l);
    for (std::size_t r = 0; r < l; ++r) {
      items[r].resize(k);
      for (std::size_t c = 0; c < k; ++c) items[r][c] = z.at(r, c);
    }
    std::sort(items.begin(), items.end());
    std::vector<double> flat;
    flat.reserve(l * k);
    for (const auto& item : items)
      flat.insert(flat.end(), item.begin(), item.end());
    d.points.push_back(std::move(flat));
  }
  d.validate();
  return d;
}

struct DistinguishabilityBound {
  double w1;
  double min_balanced_loss;
  double bound;  // R * (1 - min loss)
  bool holds;
};

// Checks W1(p, q) <= R (1 - min_f balanced 0-1 loss) on discrete samples.
// R must dominate every cross-pair distance.
inline DistinguishabilityBound distinguishability_check(const EmpiricalDist& p,
                                  const EmpiricalDist& q, double diameter) {
  p.validate();
  q.validate();
  for (const auto& a : p.points)
    for (const auto& b : q.points)
      if (euclidean(a, b) > diameter)
        throw std::invalid_argument(
            "distinguishability_check: R = " + std::to_string(diameter) +
            " is smaller than an observed cross-pair distance " +
            std::to_string(euclidean(a, b)));
  const double w1 = wasserstein1_exact(p, q);
  const double min_loss = losses::min_balanced_01_loss(p.points, q.points);
  const double bound = diameter * (1.0 - min_loss);
  return {w1, min_loss, bound, w1 <= bound + 1e-9};
}

}  // namespace ltrlab::ot
