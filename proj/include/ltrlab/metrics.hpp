// Ranking data types and exact evaluation metrics: reciprocal rank, DCG /
// NDCG (base-2 logarithm; the ratio is base-invariant), average precision,
// cutoff variants, graded-label binarization, and the paired two-tailed
// Student t-test used to compare methods.
//
// Rank conventions: ranks[i] is the 1-based predicted rank of item i;
// rank_to_order inverts that to 0-based item indices by rank position.
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ltrlab::metrics {

// An input list of items with optional ground-truth scores.
struct RankedList {
  std::vector<std::vector<double>> items;
  std::optional<std::vector<double>> labels;
  std::string list_id;

  std::size_t size() const { return items.size(); }
  void validate() const {
    if (items.empty()) throw std::invalid_argument("RankedList: empty list");
    if (labels) {
      if (labels->size() != items.size())
        throw std::invalid_argument("RankedList " + list_id + ": " +
                                    std::to_string(labels->size()) +
                                    " labels for " +
                                    std::to_string(items.size()) + " items");
      for (double y : *labels)
        if (!(y >= 0.0))
          throw std::invalid_argument("RankedList " + list_id +
                                      ": negative or non-finite label");
    }
  }
};

// A permutation r of {1..l}; r[i] is the predicted rank of item i.
struct RankAssignment {
  std::vector<int> ranks;

  std::size_t size() const { return ranks.size(); }
  void validate() const {
    std::vector<char> seen(ranks.size(), 0);
    for (int r : ranks) {
      if (r < 1 || std::size_t(r) > ranks.size() || seen[r - 1])
        throw std::invalid_argument(
            "RankAssignment: ranks are not a permutation of 1.." +
            std::to_string(ranks.size()));
      seen[r - 1] = 1;
    }
  }
};

// Descending order of s; ties broken by ascending item index.
inline RankAssignment ranks_from_scores(const std::vector<double>& s) {
  for (double v : s)
    if (!std::isfinite(v))
      throw std::invalid_argument("ranks_from_scores: non-finite score");
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return s[a] > s[b];
  });
  RankAssignment r;
  r.ranks.resize(s.size());
  for (std::size_t pos = 0; pos < idx.size(); ++pos)
    r.ranks[idx[pos]] = int(pos) + 1;
  return r;
}

// 0-based item indices ordered by rank: out[i] is the item at rank i+1.
inline std::vector<int> rank_to_order(const RankAssignment& r) {
  r.validate();
  std::vector<int> order(r.ranks.size());
  for (std::size_t i = 0; i < r.ranks.size(); ++i) order[r.ranks[i] - 1] = int(i);
  return order;
}

namespace detail {
inline void check_binary(const std::vector<double>& y, const char* op) {
  for (double v : y)
    if (v != 0.0 && v != 1.0)
      throw std::invalid_argument(std::string(op) +
                                  ": labels must be binary 0/1");
}
}  // namespace detail

// max({1/r_i : y_i = 1} u {0}); 0 when nothing relevant.
inline double reciprocal_rank(const RankAssignment& r,
                              const std::vector<double>& y) {
  detail::check_binary(y, "reciprocal_rank");
  if (y.size() != r.ranks.size())
    throw std::invalid_argument("reciprocal_rank: size mismatch");
  double best = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] == 1.0) best = std::max(best, 1.0 / double(r.ranks[i]));
  return best;
}

// Cutoff variant: 0 if the best relevant rank exceeds k.
inline double rr_at_k(const RankAssignment& r, const std::vector<double>& y,
                      int k) {
  detail::check_binary(y, "rr_at_k");
  double best = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] == 1.0 && r.ranks[i] <= k)
      best = std::max(best, 1.0 / double(r.ranks[i]));
  return best;
}

inline double dcg(const RankAssignment& r, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    s += y[i] / std::log2(double(r.ranks[i]) + 1.0);
  return s;
}

inline double dcg_at_k(const RankAssignment& r, const std::vector<double>& y,
                       int k) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (r.ranks[i] <= k) s += y[i] / std::log2(double(r.ranks[i]) + 1.0);
  return s;
}

// DCG of the descending order of y (the maximum over permutations).
inline double idcg(const std::vector<double>& y) {
  std::vector<double> sorted = y;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double s = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    s += sorted[i] / std::log2(double(i) + 2.0);
  return s;
}

inline double idcg_at_k(const std::vector<double>& y, int k) {
  std::vector<double> sorted = y;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double s = 0.0;
  for (std::size_t i = 0; i < sorted.size() && int(i) < k; ++i)
    s += sorted[i] / std::log2(double(i) + 2.0);
  return s;
}

inline double ndcg(const RankAssignment& r, const std::vector<double>& y) {
  const double ideal = idcg(y);
  if (!(ideal > 0.0))
    throw std::invalid_argument("ndcg: no relevant items (IDCG = 0)");
  return dcg(r, y) / ideal;
}

inline double ndcg_at_k(const RankAssignment& r, const std::vector<double>& y,
                        int k) {
  const double ideal = idcg_at_k(y, k);
  if (!(ideal > 0.0))
    throw std::invalid_argument("ndcg_at_k: no relevant items (IDCG = 0)");
  return dcg_at_k(r, y, k) / ideal;
}

// Interpolation-free AP: mean over relevant items of precision at their rank.
inline double average_precision(const RankAssignment& r,
                                const std::vector<double>& y) {
  detail::check_binary(y, "average_precision");
  const auto order = rank_to_order(r);
  double relevant_seen = 0.0, total_relevant = 0.0, ap = 0.0;
  for (double v : y) total_relevant += v;
  if (total_relevant == 0.0)
    throw std::invalid_argument("average_precision: no relevant items");
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    if (y[order[pos]] == 1.0) {
      relevant_seen += 1.0;
      ap += relevant_seen / double(pos + 1);
    }
  }
  return ap / total_relevant;
}

// Graded labels to binary: 1 iff grade >= positive_min.
inline std::vector<double> binarize(const std::vector<double>& grades,
                                    int positive_min) {
  std::vector<double> out(grades.size());
  for (std::size_t i = 0; i < grades.size(); ++i)
    out[i] = grades[i] >= double(positive_min) ? 1.0 : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Student t two-sided p-value via the regularized incomplete beta function.

namespace detail {

// Continued fraction for the incomplete beta (Lentz's method).
inline double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double reg_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * detail::beta_cf(a, b, x) / a;
  return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

struct TTestResult {
  double t;
  double p;  // two-sided
  std::size_t df;
};

// Paired two-tailed Student t-test; sample sd uses the n-1 denominator.
inline TTestResult paired_t_test(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("paired_t_test: unequal sample sizes");
  const std::size_t n = a.size();
  if (n < 2) throw std::invalid_argument("paired_t_test: need n >= 2");
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= double(n);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  if (ss == 0.0)
    throw std::invalid_argument(
        "paired_t_test: zero-variance differences (all identical)");
  const double sd = std::sqrt(ss / double(n - 1));
  const double t = mean / (sd / std::sqrt(double(n)));
  const double nu = double(n - 1);
  // P(|T| > t) = I_{nu/(nu+t^2)}(nu/2, 1/2)
  const double p = reg_incomplete_beta(nu / 2.0, 0.5, nu / (nu + t * t));
  return {t, p, n - 1};
}

// ---------------------------------------------------------------------------
// Per-list metric values plus aggregate means, serialized as TSV.

struct MetricReport {
  struct Row {
    std::string list_id;
    std::string metric;
    double value;
  };
  std::vector<Row> rows;
  std::map<std::string, std::size_t> skipped;  // metric -> lists excluded

  void add(const std::string& list_id, const std::string& metric,
           double value) {
    rows.push_back({list_id, metric, value});
  }
  void add_skipped(const std::string& metric) { ++skipped[metric]; }

  std::vector<double> per_list(const std::string& metric) const {
    std::vector<double> out;
    for (const auto& r : rows)
      if (r.metric == metric) out.push_back(r.value);
    return out;
  }

  // Per-list values keyed by list_id, for paired comparisons.
  std::map<std::string, double> by_list(const std::string& metric) const {
    std::map<std::string, double> out;
    for (const auto& r : rows)
      if (r.metric == metric) out[r.list_id] = r.value;
    return out;
  }

  std::vector<std::string> metric_names() const {
    std::vector<std::string> names;
    for (const auto& r : rows)
      if (std::find(names.begin(), names.end(), r.metric) == names.end())
        names.push_back(r.metric);
    return names;
  }

  std::map<std::string, double> means() const {
    std::map<std::string, double> sums;
    std::map<std::string, std::size_t> counts;
    for (const auto& r : rows) {
      sums[r.metric] += r.value;
      ++counts[r.metric];
    }
    std::map<std::string, double> out;
    for (auto& [k, v] : sums) out[k] = v / double(counts[k]);
    return out;
  }

  static std::string format_value(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
  }

  void write_tsv(std::ostream& os) const {
    os << "list_id\tmetric\tvalue\n";
    for (const auto& r : rows)
      os << r.list_id << '\t' << r.metric << '\t' << format_value(r.value)
         << '\n';
    for (const auto& [metric, mean] : means())
      os << "__mean__\t" << metric << '\t' << format_value(mean) << '\n';
    for (const auto& [metric, count] : skipped)
      os << "__skipped__\t" << metric << '\t' << count << '\n';
  }

  std::string to_tsv() const {
    std::ostringstream os;
    write_tsv(os);
    return os.str();
  }

  static MetricReport from_tsv(std::istream& is) {
    MetricReport rep;
    std::string line;
    if (!std::getline(is, line) || line != "list_id\tmetric\tvalue")
      throw std::runtime_error("MetricReport: bad or missing TSV header");
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const auto t1 = line.find('\t');
      const auto t2 = line.find('\t', t1 + 1);
      if (t1 == std::string::npos || t2 == std::string::npos)
        throw std::runtime_error("MetricReport: malformed row: " + line);
      const std::string id = line.substr(0, t1);
      const std::string metric = line.substr(t1 + 1, t2 - t1 - 1);
      const std::string val = line.substr(t2 + 1);
      if (id == "__mean__") continue;  // recomputed from rows
      if (id == "__skipped__") {
        rep.skipped[metric] = std::stoul(val);
        continue;
      }
      rep.rows.push_back({id, metric, std::stod(val)});
    }
    return rep;
  }
};

}  // namespace ltrlab::metrics
