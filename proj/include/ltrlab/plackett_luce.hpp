// Plackett-Luce distribution over permutations: pmf (log-space), sequential
// sampling, exact and Monte-Carlo expected utility under p_exp(s), and the
// risk functional (maximum attainable utility minus expected utility).
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "ltrlab/metrics.hpp"
#include "ltrlab/rng.hpp"

namespace ltrlab::pl {

using metrics::RankAssignment;

struct PLModel {
  std::vector<double> weights;  // strictly positive

  void validate() const {
    if (weights.empty()) throw std::invalid_argument("PLModel: empty weights");
    for (double w : weights)
      if (!(w > 0.0) || !std::isfinite(w))
        throw std::invalid_argument(
            "PLModel: weights must be strictly positive and finite");
  }
};

namespace detail {

inline double logsumexp(const std::vector<double>& v, std::size_t begin,
                        std::size_t end) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = begin; i < end; ++i) m = std::max(m, v[i]);
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

// log pmf of the order (item indices by rank) under log-weights.
inline double log_pmf_of_order(const std::vector<double>& log_w,
                               const std::vector<int>& order) {
  std::vector<double> remaining(order.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    remaining[i] = log_w[order[i]];
  double lp = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i)
    lp += remaining[i] - logsumexp(remaining, i, remaining.size());
  return lp;
}

}  // namespace detail

// Visit every order (permutation of 0..l-1) in lexicographic order.
template <typename Fn>
void for_each_order(std::size_t l, Fn&& fn) {
  std::vector<int> order(l);
  std::iota(order.begin(), order.end(), 0);
  do {
    fn(const_cast<const std::vector<int>&>(order));
  } while (std::next_permutation(order.begin(), order.end()));
}

inline RankAssignment order_to_ranks(const std::vector<int>& order) {
  RankAssignment r;
  r.ranks.resize(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    r.ranks[order[pos]] = int(pos) + 1;
  return r;
}

inline double pl_pmf(const PLModel& model, const RankAssignment& r) {
  model.validate();
  r.validate();
  if (model.weights.size() != r.ranks.size())
    throw std::invalid_argument("pl_pmf: model has " +
                                std::to_string(model.weights.size()) +
                                " weights for a length-" +
                                std::to_string(r.ranks.size()) + " ranking");
  std::vector<double> log_w(model.weights.size());
  for (std::size_t i = 0; i < log_w.size(); ++i)
    log_w[i] = std::log(model.weights[i]);
  return std::exp(detail::log_pmf_of_order(log_w, metrics::rank_to_order(r)));
}

// Sequential sampling without replacement, proportional to remaining weights.
inline RankAssignment pl_sample(const PLModel& model, Rng& rng) {
  model.validate();
  const std::size_t l = model.weights.size();
  std::vector<int> pool(l);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> order;
  order.reserve(l);
  for (std::size_t stage = 0; stage < l; ++stage) {
    double total = 0.0;
    for (int i : pool) total += model.weights[i];
    const double u = rng.uniform() * total;
    double acc = 0.0;
    std::size_t pick = pool.size() - 1;
    for (std::size_t j = 0; j < pool.size(); ++j) {
      acc += model.weights[pool[j]];
      if (u < acc) {
        pick = j;
        break;
      }
    }
    order.push_back(pool[pick]);
    pool.erase(pool.begin() + std::ptrdiff_t(pick));
  }
  return order_to_ranks(order);
}

enum class Util { rr, ndcg };

inline Util util_from_name(const std::string& name) {
  if (name == "rr" || name == "mrr") return Util::rr;
  if (name == "ndcg") return Util::ndcg;
  throw std::invalid_argument("unknown utility metric: " + name);
}

inline double utility(Util u, const RankAssignment& r,
                      const std::vector<double>& y) {
  switch (u) {
    case Util::rr:
      return metrics::reciprocal_rank(r, y);
    case Util::ndcg:
      return metrics::ndcg(r, y);
  }
  throw std::logic_error("utility: unreachable");
}

// True for labels where the metric is defined and identically 0 is possible:
// RR on an all-zero list is 0 for every permutation.
inline bool all_zero(const std::vector<double>& y) {
  return std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; });
}

constexpr std::size_t kMaxExactLen = 8;

// E_{R ~ p_exp(s)}[u(R, y)] by enumeration over all l! permutations.
inline double expected_utility_exact(const std::vector<double>& s,
                                     const std::vector<double>& y, Util u) {
  if (s.size() != y.size())
    throw std::invalid_argument("expected_utility_exact: size mismatch");
  if (s.size() > kMaxExactLen)
    throw std::invalid_argument(
        "expected_utility_exact: list length " + std::to_string(s.size()) +
        " exceeds " + std::to_string(kMaxExactLen) +
        "; use expected_utility_mc");
  if (u == Util::rr && all_zero(y)) return 0.0;
  double total = 0.0;
  for_each_order(s.size(), [&](const std::vector<int>& order) {
    const double lp = detail::log_pmf_of_order(s, order);
    total += std::exp(lp) * utility(u, order_to_ranks(order), y);
  });
  return total;
}

struct McEstimate {
  double value;
  double standard_error;
};

inline McEstimate expected_utility_mc(const std::vector<double>& s,
                                      const std::vector<double>& y, Util u,
                                      std::size_t n_samples, Rng& rng) {
  if (n_samples < 1)
    throw std::invalid_argument("expected_utility_mc: need n_samples >= 1");
  if (u == Util::rr && all_zero(y)) return {0.0, 0.0};
  PLModel model;
  model.weights.resize(s.size());
  const double m = *std::max_element(s.begin(), s.end());
  for (std::size_t i = 0; i < s.size(); ++i)
    model.weights[i] = std::exp(s[i] - m);  // shift-invariant
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double v = utility(u, pl_sample(model, rng), y);
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / double(n_samples);
  if (n_samples == 1) return {mean, 0.0};
  const double var =
      std::max(0.0, (sumsq - sum * sum / double(n_samples)) /
                        double(n_samples - 1));
  return {mean, std::sqrt(var / double(n_samples))};
}

// max_r u(r, y), attained by the descending order of y for RR and NDCG.
inline double max_utility(const std::vector<double>& y, Util u) {
  if (u == Util::rr && all_zero(y)) return 0.0;
  return utility(u, metrics::ranks_from_scores(y), y);
}

// Mean over lists of (max-attainable utility - expected utility of f).
inline double risk(const std::vector<std::vector<double>>& scores_per_list,
                   const std::vector<metrics::RankedList>& lists, Util u) {
  if (scores_per_list.size() != lists.size())
    throw std::invalid_argument("risk: scores/lists count mismatch");
  if (lists.empty()) throw std::invalid_argument("risk: no lists");
  double total = 0.0;
  for (std::size_t i = 0; i < lists.size(); ++i) {
    if (!lists[i].labels)
      throw std::invalid_argument("risk: list " + lists[i].list_id +
                                  " has no labels");
    const auto& y = *lists[i].labels;
    // clamp away float noise: the enumerated expectation never exceeds the
    // maximizer by more than roundoff
    total += std::max(0.0, max_utility(y, u) -
                               expected_utility_exact(scores_per_list[i], y, u));
  }
  return total / double(lists.size());
}

}  // namespace ltrlab::pl
