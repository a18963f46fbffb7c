// Differentiable training losses (autodiff-attached): listwise softmax
// cross-entropy, pairwise logistic, and the adversarial logistic surrogate
// log(1 + e^((1-2a) a_hat)); plus the non-differentiable balanced 0-1
// discriminator loss and its exact minimum over discriminators (Bayes rule
// on empirical atoms), used by the theory checks.
#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ltrlab/autodiff.hpp"

namespace ltrlab::losses {

// A scalar loss node plus its per-list breakdown for reporting.
struct LossValue {
  ad::NodePtr node;
  std::vector<double> per_list;

  double value() const { return node->value.item(); }
};

namespace detail {
inline void check_labels(const std::vector<double>& y, std::size_t l,
                         const char* op) {
  if (y.size() != l)
    throw std::invalid_argument(std::string(op) + ": " +
                                std::to_string(y.size()) + " labels for " +
                                std::to_string(l) + " scores");
  for (double v : y)
    if (!(v >= 0.0))
      throw std::invalid_argument(std::string(op) +
                                  ": labels must be nonnegative");
}
}  // namespace detail

// -sum_i y_i log softmax(s)_i, stabilized via log-sum-exp. s is l x 1.
inline ad::NodePtr softmax_ce_node(const ad::NodePtr& s,
                                   const std::vector<double>& y) {
  const std::size_t l = s->value.rows();
  detail::check_labels(y, l, "softmax_ce_loss");
  double ysum = 0.0;
  for (double v : y) ysum += v;
  if (ysum == 0.0) return ad::constant(0.0);
  auto lse = ad::logsumexp(s, 0);                            // 1x1
  auto dot = ad::matmul(ad::constant(Tensor::row(y)), s);    // 1x1
  return ad::sub(ad::scalar_mul(lse, ysum), dot);
}

inline LossValue softmax_ce_loss(const ad::NodePtr& s,
                                 const std::vector<double>& y) {
  auto node = softmax_ce_node(s, y);
  return {node, {node->value.item()}};
}

// sum over ordered pairs with y_i > y_j of log(1 + e^(s_j - s_i)).
inline ad::NodePtr pairwise_logistic_node(const ad::NodePtr& s,
                                          const std::vector<double>& y) {
  const std::size_t l = s->value.rows();
  detail::check_labels(y, l, "pairwise_logistic_loss");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = 0; j < l; ++j)
      if (y[i] > y[j]) pairs.emplace_back(i, j);
  if (pairs.empty()) return ad::constant(0.0);
  // Difference operator D: row per pair, +1 at j, -1 at i; loss = sum softplus(D s).
  Tensor D(pairs.size(), l);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    D.at(p, pairs[p].second) = 1.0;
    D.at(p, pairs[p].first) = -1.0;
  }
  auto diffs = ad::matmul(ad::constant(std::move(D)), s);
  return ad::sum_all(ad::softplus(diffs));
}

inline LossValue pairwise_logistic_loss(const ad::NodePtr& s,
                                        const std::vector<double>& y) {
  auto node = pairwise_logistic_node(s, y);
  return {node, {node->value.item()}};
}

// log(1 + e^((1-2a) a_hat)); elementwise over logits, domain identity a.
inline ad::NodePtr adversarial_logistic_node(const ad::NodePtr& a_hat, int a) {
  if (a != 0 && a != 1)
    throw std::invalid_argument("adversarial_logistic: a must be 0 or 1");
  return ad::softplus(ad::scalar_mul(a_hat, a == 0 ? 1.0 : -1.0));
}

inline LossValue adversarial_logistic(double a_hat, int a) {
  auto node = adversarial_logistic_node(ad::constant(a_hat), a);
  return {node, {node->value.item()}};
}

// ---------------------------------------------------------------------------
// Balanced 0-1 loss: L(f) = E_mu[f] + E_mu'[1 - f], in [0, 2].

inline double balanced_01_loss(const std::vector<int>& decisions_on_mu,
                               const std::vector<int>& decisions_on_mu_prime) {
  if (decisions_on_mu.empty() || decisions_on_mu_prime.empty())
    throw std::invalid_argument("balanced_01_loss: empty sample set");
  double fp = 0.0, fn = 0.0;
  for (int d : decisions_on_mu) {
    if (d != 0 && d != 1)
      throw std::invalid_argument("balanced_01_loss: decisions must be 0/1");
    fp += d;
  }
  for (int d : decisions_on_mu_prime) {
    if (d != 0 && d != 1)
      throw std::invalid_argument("balanced_01_loss: decisions must be 0/1");
    fn += 1 - d;
  }
  return fp / double(decisions_on_mu.size()) +
         fn / double(decisions_on_mu_prime.size());
}

// Minimum balanced 0-1 loss over all discriminators on the empirical
// supports, via the Bayes rule f*(x) = 1[mu'(x) >= mu(x)] per atom.
inline double min_balanced_01_loss(
    const std::vector<std::vector<double>>& sample_mu,
    const std::vector<std::vector<double>>& sample_mu_prime) {
  if (sample_mu.empty() || sample_mu_prime.empty())
    throw std::invalid_argument("min_balanced_01_loss: empty sample set");
  std::map<std::vector<double>, std::pair<double, double>> atoms;
  for (const auto& x : sample_mu) atoms[x].first += 1.0 / double(sample_mu.size());
  for (const auto& x : sample_mu_prime)
    atoms[x].second += 1.0 / double(sample_mu_prime.size());
  double loss = 0.0;
  for (const auto& [x, mass] : atoms) {
    const auto [p, q] = mass;
    const int f_star = q >= p ? 1 : 0;
    loss += f_star * p + (1 - f_star) * q;
  }
  return loss;
}

}  // namespace ltrlab::losses
