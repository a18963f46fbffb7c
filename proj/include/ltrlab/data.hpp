// Dataset ingestion and generation: SVMLight/LETOR-style text files grouped
// by qid, feature-split manifests, synthetic domain-shift generation with
// known ground-truth constants, and the training-list construction with
// negative sampling.
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ltrlab/kv.hpp"
#include "ltrlab/metrics.hpp"
#include "ltrlab/rng.hpp"
#include "ltrlab/tensor.hpp"

namespace ltrlab::data {

using metrics::RankedList;

struct Dataset {
  std::vector<RankedList> lists;
  std::size_t feature_dim = 0;
  std::vector<std::size_t> shared_idx;    // 0-based; empty means all shared
  std::vector<std::size_t> disjoint_idx;  // 0-based; possibly empty
  std::string domain_tag;

  std::size_t shared_width() const {
    return shared_idx.empty() ? feature_dim - disjoint_idx.size()
                              : shared_idx.size();
  }
  std::size_t disjoint_width() const { return disjoint_idx.size(); }

  void validate() const {
    for (const auto& l : lists) {
      l.validate();
      for (const auto& item : l.items)
        if (item.size() != feature_dim)
          throw std::invalid_argument(
              "Dataset: list " + l.list_id + " item width " +
              std::to_string(item.size()) + " != feature_dim " +
              std::to_string(feature_dim));
    }
    for (std::size_t i : shared_idx)
      if (i >= feature_dim)
        throw std::invalid_argument("Dataset: shared index out of range");
    for (std::size_t i : disjoint_idx)
      if (i >= feature_dim)
        throw std::invalid_argument("Dataset: disjoint index out of range");
  }

  // Unsupervised contract: hand this view to DA training so target labels
  // can never be read.
  Dataset without_labels() const {
    Dataset d = *this;
    for (auto& l : d.lists) l.labels.reset();
    return d;
  }
};

// Model input matrix for one list: rows are items, columns rearranged as
// [shared segment, disjoint segment].
inline Tensor model_input(const Dataset& ds, const RankedList& list) {
  std::vector<std::size_t> cols;
  if (ds.shared_idx.empty() && ds.disjoint_idx.empty()) {
    cols.resize(ds.feature_dim);
    for (std::size_t i = 0; i < ds.feature_dim; ++i) cols[i] = i;
  } else if (ds.shared_idx.empty()) {
    for (std::size_t i = 0; i < ds.feature_dim; ++i)
      if (std::find(ds.disjoint_idx.begin(), ds.disjoint_idx.end(), i) ==
          ds.disjoint_idx.end())
        cols.push_back(i);
    cols.insert(cols.end(), ds.disjoint_idx.begin(), ds.disjoint_idx.end());
  } else {
    cols = ds.shared_idx;
    cols.insert(cols.end(), ds.disjoint_idx.begin(), ds.disjoint_idx.end());
  }
  Tensor out(list.items.size(), cols.size());
  for (std::size_t r = 0; r < list.items.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      out.at(r, c) = list.items[r][cols[c]];
  return out;
}

// ---------------------------------------------------------------------------
// LETOR text format: `<grade> qid:<id> <fid>:<val> ... [# comment]`

namespace detail {

inline std::runtime_error line_error(std::size_t lineno,
                                     const std::string& what) {
  return std::runtime_error("letor line " + std::to_string(lineno) + ": " +
                            what);
}

}  // namespace detail

inline Dataset parse_letor(std::istream& is) {
  struct Row {
    double grade;
    std::string qid;
    std::vector<std::pair<std::size_t, double>> feats;
  };
  std::vector<Row> rows;
  std::size_t max_fid = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    std::string body = hash == std::string::npos ? line : line.substr(0, hash);
    std::istringstream ls(body);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line
    Row row;
    // grade: nonnegative integer
    std::size_t pos = 0;
    long grade = -1;
    try {
      grade = std::stol(tok, &pos);
    } catch (const std::exception&) {
      throw detail::line_error(lineno, "bad grade: " + tok);
    }
    if (pos != tok.size() || grade < 0)
      throw detail::line_error(lineno,
                               "grade must be a nonnegative integer: " + tok);
    row.grade = double(grade);
    if (!(ls >> tok) || tok.rfind("qid:", 0) != 0)
      throw detail::line_error(lineno, "expected qid:<id> as second token");
    row.qid = tok.substr(4);
    if (row.qid.empty()) throw detail::line_error(lineno, "empty qid");
    std::size_t prev_fid = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw detail::line_error(lineno, "bad feature token: " + tok);
      std::size_t fid = 0;
      try {
        fid = std::stoul(tok.substr(0, colon));
      } catch (const std::exception&) {
        throw detail::line_error(lineno, "bad feature id: " + tok);
      }
      if (fid == 0) throw detail::line_error(lineno, "feature ids are 1-based");
      if (fid <= prev_fid)
        throw detail::line_error(
            lineno, "feature ids must be strictly increasing; saw " +
                        std::to_string(fid) + " after " +
                        std::to_string(prev_fid));
      prev_fid = fid;
      double val = 0.0;
      const std::string vs = tok.substr(colon + 1);
      try {
        std::size_t vpos = 0;
        val = std::stod(vs, &vpos);
        if (vpos != vs.size()) throw std::invalid_argument(vs);
      } catch (const std::exception&) {
        throw detail::line_error(lineno, "bad feature value: " + tok);
      }
      row.feats.emplace_back(fid, val);
      max_fid = std::max(max_fid, fid);
    }
    rows.push_back(std::move(row));
  }
  Dataset ds;
  ds.feature_dim = max_fid;
  std::map<std::string, std::size_t> qid_to_list;
  for (auto& row : rows) {
    auto it = qid_to_list.find(row.qid);
    if (it == qid_to_list.end()) {
      it = qid_to_list.emplace(row.qid, ds.lists.size()).first;
      RankedList l;
      l.list_id = row.qid;
      l.labels = std::vector<double>{};
      ds.lists.push_back(std::move(l));
    }
    RankedList& l = ds.lists[it->second];
    std::vector<double> item(max_fid, 0.0);
    for (const auto& [fid, val] : row.feats) item[fid - 1] = val;
    l.items.push_back(std::move(item));
    l.labels->push_back(row.grade);
  }
  return ds;
}

inline Dataset parse_letor_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open letor file " + path);
  return parse_letor(is);
}

// Bit-exact writer: grades as integers, every feature id written densely,
// values as shortest round-trip decimals.
inline void write_letor(const Dataset& ds, std::ostream& os) {
  char buf[64];
  for (const auto& l : ds.lists) {
    if (!l.labels)
      throw std::invalid_argument("write_letor: list " + l.list_id +
                                  " has no labels");
    for (std::size_t i = 0; i < l.items.size(); ++i) {
      const double g = (*l.labels)[i];
      if (g < 0.0 || g != std::floor(g))
        throw std::invalid_argument(
            "write_letor: grade " + std::to_string(g) + " in list " +
            l.list_id + " is not a nonnegative integer");
      os << std::int64_t(g) << " qid:" << l.list_id;
      for (std::size_t f = 0; f < ds.feature_dim; ++f) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), l.items[i][f]);
        os << ' ' << (f + 1) << ':' << std::string_view(buf, ptr - buf);
      }
      os << '\n';
    }
  }
}

inline void write_letor_file(const Dataset& ds, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write letor file " + path);
  write_letor(ds, os);
}

// Sidecar manifest: `shared = 1,5,7` / `disjoint = 2,3` with 1-based ids.
inline void apply_manifest(Dataset& ds,
                           const std::map<std::string, std::string>& manifest) {
  auto to_zero_based = [&](const std::string& csv) {
    std::vector<std::size_t> out;
    for (std::size_t id : kv::parse_id_list(csv)) {
      if (id == 0 || id > ds.feature_dim)
        throw std::runtime_error("manifest feature id " + std::to_string(id) +
                                 " out of range 1.." +
                                 std::to_string(ds.feature_dim));
      out.push_back(id - 1);
    }
    return out;
  };
  if (auto it = manifest.find("shared"); it != manifest.end())
    ds.shared_idx = to_zero_based(it->second);
  if (auto it = manifest.find("disjoint"); it != manifest.end())
    ds.disjoint_idx = to_zero_based(it->second);
}

// ---------------------------------------------------------------------------
// Synthetic generation with known ground-truth constants.

enum class ShiftKind { none, affine, listwise_correlation };

inline ShiftKind shift_from_name(const std::string& s) {
  if (s == "none") return ShiftKind::none;
  if (s == "affine") return ShiftKind::affine;
  if (s == "listwise_correlation") return ShiftKind::listwise_correlation;
  throw std::invalid_argument("unknown shift kind: " + s);
}

inline std::string shift_name(ShiftKind k) {
  switch (k) {
    case ShiftKind::none: return "none";
    case ShiftKind::affine: return "affine";
    case ShiftKind::listwise_correlation: return "listwise_correlation";
  }
  return "?";
}

struct SyntheticSpec {
  std::size_t list_len = 4;
  std::size_t feature_dim = 8;
  std::size_t n_lists = 128;  // per domain
  ShiftKind shift = ShiftKind::none;
  double rotation_angle = 0.0;     // radians, every (2i, 2i+1) plane
  double translation_scale = 0.0;  // translation = scale on every coord
  double interaction = 0.25;       // list-mean coupling strength
  double y_max = 4.0;
  // 0: items uniform on the cube; K > 0: items drawn from a mixture of K
  // well-separated clusters (centers shared across domains), so the label
  // signal is dominated by cluster-level score differences
  std::size_t latent_clusters = 0;
  double cluster_spread = 0.08;
  std::uint64_t seed = 1;

  static SyntheticSpec from_kv(const std::map<std::string, std::string>& m) {
    SyntheticSpec s;
    auto get = [&](const char* k) -> const std::string* {
      auto it = m.find(k);
      return it == m.end() ? nullptr : &it->second;
    };
    if (auto* v = get("list_len")) s.list_len = std::stoul(*v);
    if (auto* v = get("feature_dim")) s.feature_dim = std::stoul(*v);
    if (auto* v = get("n_lists")) s.n_lists = std::stoul(*v);
    if (auto* v = get("shift")) s.shift = shift_from_name(*v);
    if (auto* v = get("rotation_angle")) s.rotation_angle = std::stod(*v);
    if (auto* v = get("translation_scale")) s.translation_scale = std::stod(*v);
    if (auto* v = get("interaction")) s.interaction = std::stod(*v);
    if (auto* v = get("y_max")) s.y_max = std::stod(*v);
    if (auto* v = get("latent_clusters")) s.latent_clusters = std::stoul(*v);
    if (auto* v = get("cluster_spread")) s.cluster_spread = std::stod(*v);
    if (auto* v = get("seed")) s.seed = std::stoull(*v);
    return s;
  }
};

struct SyntheticTruth {
  double l_y = 0.0;  // exact Lipschitz constant of the label map
  std::vector<double> w, c;
  double interaction = 0.0;
  double y_max = 0.0;
  ShiftKind shift = ShiftKind::none;
  double rotation_angle = 0.0;
  double translation_scale = 0.0;
  std::string item_w1_flag;  // qualitative: "zero" / "small" / "positive"
  std::string list_w1_flag;

  std::vector<std::pair<std::string, std::string>> to_kv() const {
    auto num = [](double v) {
      char buf[64];
      auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      return std::string(buf, p);
    };
    auto vec = [&](const std::vector<double>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + num(v[i]);
      return s;
    };
    return {{"l_y", num(l_y)},
            {"w", vec(w)},
            {"c", vec(c)},
            {"interaction", num(interaction)},
            {"y_max", num(y_max)},
            {"shift", shift_name(shift)},
            {"rotation_angle", num(rotation_angle)},
            {"translation_scale", num(translation_scale)},
            {"item_w1_flag", item_w1_flag},
            {"list_w1_flag", list_w1_flag}};
  }
};

struct SyntheticData {
  Dataset source;
  Dataset target;
  SyntheticTruth truth;
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const std::vector<double>& a) {
  return std::sqrt(dot(a, a));
}

}  // namespace detail

// Labels for one list: y_i = clip(w . x_i + (a/l) c . mean_j x_j, 0, y_max).
inline std::vector<double> label_list(
    const std::vector<std::vector<double>>& items, const SyntheticTruth& t) {
  const std::size_t l = items.size();
  std::vector<double> mean(t.w.size(), 0.0);
  for (const auto& x : items)
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += x[j] / double(l);
  std::vector<double> y(l);
  for (std::size_t i = 0; i < l; ++i) {
    const double raw =
        detail::dot(t.w, items[i]) + t.interaction * detail::dot(t.c, mean);
    y[i] = std::min(std::max(raw, 0.0), t.y_max);
  }
  return y;
}

// Orthogonal rotation by the same angle in every consecutive coordinate
// plane (0,1), (2,3), ..., about the cube center (0.5, ..., 0.5), plus a
// constant translation on all coordinates.
inline std::vector<double> apply_affine(const std::vector<double>& x,
                                        double angle, double tscale) {
  std::vector<double> out = x;
  const double c = std::cos(angle), s = std::sin(angle);
  for (std::size_t i = 0; i + 1 < out.size(); i += 2) {
    const double a0 = x[i] - 0.5, a1 = x[i + 1] - 0.5;
    out[i] = c * a0 - s * a1 + 0.5;
    out[i + 1] = s * a0 + c * a1 + 0.5;
  }
  for (auto& v : out) v += tscale;
  return out;
}

inline std::vector<double> invert_affine(const std::vector<double>& x,
                                         double angle, double tscale) {
  std::vector<double> shifted = x;
  for (auto& v : shifted) v -= tscale;
  std::vector<double> out = shifted;
  const double c = std::cos(angle), s = std::sin(angle);
  for (std::size_t i = 0; i + 1 < out.size(); i += 2) {
    const double a0 = shifted[i] - 0.5, a1 = shifted[i + 1] - 0.5;
    out[i] = c * a0 + s * a1 + 0.5;
    out[i + 1] = -s * a0 + c * a1 + 0.5;
  }
  return out;
}

// Exact spectral norm of the pre-clip label map A = I (x) w^T +
// (a/l)(1 1^T) (x) c^T: the rows split into the mean subspace and its
// complement, giving max(|w|, |w + a c|).
inline double label_map_lipschitz(const std::vector<double>& w,
                                  const std::vector<double>& c, double a) {
  std::vector<double> wc(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) wc[i] = w[i] + a * c[i];
  return std::max(detail::norm2(w), detail::norm2(wc));
}

inline SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.list_len < 1 || spec.feature_dim < 1 || spec.n_lists < 1)
    throw std::invalid_argument("generate_synthetic: empty spec dimensions");
  if (spec.shift == ShiftKind::listwise_correlation && spec.n_lists % 2 != 0)
    throw std::invalid_argument(
        "generate_synthetic: listwise_correlation needs an even n_lists");
  Rng rng(spec.seed);

  SyntheticData out;
  SyntheticTruth& truth = out.truth;
  truth.w.resize(spec.feature_dim);
  truth.c.resize(spec.feature_dim);
  for (auto& v : truth.w) v = rng.uniform(0.3, 1.0);
  for (auto& v : truth.c) v = rng.uniform(-0.5, 0.5);
  truth.interaction = spec.interaction;
  truth.y_max = spec.y_max;
  truth.shift = spec.shift;
  truth.rotation_angle = spec.rotation_angle;
  truth.translation_scale = spec.translation_scale;
  truth.l_y = label_map_lipschitz(truth.w, truth.c, spec.interaction);

  std::vector<std::vector<double>> cluster_centers;
  for (std::size_t tries = 0; cluster_centers.size() < spec.latent_clusters;
       ++tries) {
    if (tries > 10000 * spec.latent_clusters)
      throw std::invalid_argument(
          "generate_synthetic: cannot place " +
          std::to_string(spec.latent_clusters) +
          " cluster centers at least 0.8 apart in dimension " +
          std::to_string(spec.feature_dim));
    std::vector<double> c(spec.feature_dim);
    for (auto& v : c) v = rng.uniform(0.1, 0.9);
    bool separated = true;
    for (const auto& other : cluster_centers) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < c.size(); ++j)
        d2 += (c[j] - other[j]) * (c[j] - other[j]);
      if (d2 < 0.64) separated = false;  // centers at least 0.8 apart
    }
    if (separated) cluster_centers.push_back(std::move(c));
  }
  auto draw_item = [&]() {
    std::vector<double> x(spec.feature_dim);
    if (cluster_centers.empty()) {
      for (auto& v : x) v = rng.uniform(0.0, 1.0);
      return x;
    }
    const auto& c = cluster_centers[std::size_t(
        rng.uniform_int(0, std::int64_t(cluster_centers.size()) - 1))];
    for (std::size_t j = 0; j < x.size(); ++j)
      x[j] = c[j] + rng.uniform(-spec.cluster_spread, spec.cluster_spread);
    return x;
  };
  auto draw_list_items = [&]() {
    std::vector<std::vector<double>> items(spec.list_len);
    for (auto& x : items) x = draw_item();
    return items;
  };
  auto make_list = [&](const std::string& id,
                       std::vector<std::vector<double>> items) {
    RankedList l;
    l.list_id = id;
    l.labels = label_list(items, truth);
    l.items = std::move(items);
    return l;
  };

  out.source.feature_dim = spec.feature_dim;
  out.source.domain_tag = "source";
  out.target.feature_dim = spec.feature_dim;
  out.target.domain_tag = "target";

  switch (spec.shift) {
    case ShiftKind::none: {
      for (std::size_t n = 0; n < spec.n_lists; ++n)
        out.source.lists.push_back(
            make_list("s" + std::to_string(n), draw_list_items()));
      for (std::size_t n = 0; n < spec.n_lists; ++n)
        out.target.lists.push_back(
            make_list("t" + std::to_string(n), draw_list_items()));
      truth.item_w1_flag = "small";
      truth.list_w1_flag = "small";
      break;
    }
    case ShiftKind::affine: {
      for (std::size_t n = 0; n < spec.n_lists; ++n)
        out.source.lists.push_back(
            make_list("s" + std::to_string(n), draw_list_items()));
      for (std::size_t n = 0; n < spec.n_lists; ++n) {
        std::vector<std::vector<double>> latent = draw_list_items();
        RankedList l;
        l.list_id = "t" + std::to_string(n);
        // labels are defined on the pre-shift coordinates
        l.labels = label_list(latent, truth);
        for (const auto& u : latent)
          l.items.push_back(apply_affine(u, spec.rotation_angle,
                                         spec.translation_scale));
        out.target.lists.push_back(std::move(l));
      }
      truth.item_w1_flag = "positive";
      truth.list_w1_flag = "positive";
      break;
    }
    case ShiftKind::listwise_correlation: {
      // Pools of 2l items split by sorted halves (source) vs alternating
      // positions (target): the same items appear in both domains, so item
      // marginals match exactly while the within-list joint structure
      // differs. Pool items come from two separated clusters (l per
      // cluster); sorted halves then give pure-cluster source lists and
      // the alternating split gives mixed-cluster target lists.
      for (std::size_t pair = 0; pair < spec.n_lists / 2; ++pair) {
        std::vector<std::vector<double>> pool(2 * spec.list_len);
        for (std::size_t j = 0; j < pool.size(); ++j) {
          const double center = j % 2 == 0 ? 0.3 : 0.7;
          auto& x = pool[j];
          x.resize(spec.feature_dim);
          for (auto& v : x) v = center + rng.uniform(-0.2, 0.2);
        }
        std::sort(pool.begin(), pool.end(),
                  [](const std::vector<double>& a,
                     const std::vector<double>& b) {
                    double sa = 0.0, sb = 0.0;
                    for (double v : a) sa += v;
                    for (double v : b) sb += v;
                    if (sa != sb) return sa < sb;
                    return a < b;
                  });
        std::vector<std::vector<double>> low(pool.begin(),
                                             pool.begin() + spec.list_len);
        std::vector<std::vector<double>> high(pool.begin() + spec.list_len,
                                              pool.end());
        std::vector<std::vector<double>> even, odd;
        for (std::size_t i = 0; i < pool.size(); ++i)
          (i % 2 == 0 ? even : odd).push_back(pool[i]);
        const std::string idx = std::to_string(pair);
        out.source.lists.push_back(make_list("s" + idx + "a", low));
        out.source.lists.push_back(make_list("s" + idx + "b", high));
        out.target.lists.push_back(make_list("t" + idx + "a", even));
        out.target.lists.push_back(make_list("t" + idx + "b", odd));
      }
      truth.item_w1_flag = "zero";
      truth.list_w1_flag = "positive";
      break;
    }
  }
  return out;
}

// Integer grades for LETOR export: grade = round((levels-1) * y / y_max).
inline Dataset quantize_labels(const Dataset& ds, std::size_t levels,
                               double y_max) {
  if (levels < 2)
    throw std::invalid_argument("quantize_labels: need at least 2 levels");
  Dataset out = ds;
  for (auto& l : out.lists) {
    if (!l.labels) continue;
    for (auto& y : *l.labels)
      y = std::round(double(levels - 1) *
                     std::min(std::max(y, 0.0), y_max) / y_max);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training-list construction: one positive plus sampled negatives.

struct CandidatePool {
  std::string query_id;
  std::vector<std::vector<double>> candidates;
  std::vector<std::size_t> positives;  // indices into candidates
  // Optional pretrained ordering, best first; the rank cutoff applies only
  // when this is present.
  std::optional<std::vector<std::size_t>> ranking;
};

inline RankedList build_training_list(const CandidatePool& pool,
                                      std::size_t list_len,
                                      std::size_t rank_cutoff, Rng& rng) {
  if (pool.positives.empty())
    throw std::invalid_argument("build_training_list: query " +
                                pool.query_id + " has no positive candidate");
  const std::size_t positive = pool.positives.front();
  std::vector<std::size_t> eligible;
  if (pool.ranking) {
    if (pool.ranking->size() != pool.candidates.size())
      throw std::invalid_argument("build_training_list: query " +
                                  pool.query_id +
                                  " ranking does not cover all candidates");
    for (std::size_t pos = 0; pos < pool.ranking->size(); ++pos) {
      const std::size_t cand = (*pool.ranking)[pos];
      if (pos + 1 > rank_cutoff && cand != positive) eligible.push_back(cand);
    }
  } else {
    for (std::size_t i = 0; i < pool.candidates.size(); ++i)
      if (i != positive) eligible.push_back(i);
  }
  if (eligible.size() + 1 < list_len)
    throw std::invalid_argument(
        "build_training_list: query " + pool.query_id + " has only " +
        std::to_string(eligible.size()) +
        " eligible negatives below the cutoff; need " +
        std::to_string(list_len - 1));
  // uniform sample without replacement
  std::vector<std::size_t> chosen;
  for (std::size_t k = 0; k < list_len - 1; ++k) {
    const std::size_t j =
        std::size_t(rng.uniform_int(0, std::int64_t(eligible.size()) - 1));
    chosen.push_back(eligible[j]);
    eligible.erase(eligible.begin() + std::ptrdiff_t(j));
  }
  RankedList out;
  out.list_id = pool.query_id;
  out.items.push_back(pool.candidates[positive]);
  std::vector<double> labels{1.0};
  for (std::size_t c : chosen) {
    out.items.push_back(pool.candidates[c]);
    labels.push_back(0.0);
  }
  out.labels = std::move(labels);
  return out;
}

inline std::vector<RankedList> build_training_lists(
    const std::vector<CandidatePool>& pools, std::size_t list_len,
    std::size_t rank_cutoff, Rng& rng) {
  std::vector<RankedList> out;
  out.reserve(pools.size());
  for (const auto& pool : pools)
    out.push_back(build_training_list(pool, list_len, rank_cutoff, rng));
  return out;
}

constexpr std::size_t kDefaultTrainListLen = 31;
constexpr std::size_t kDefaultNegativeRankCutoff = 300;

}  // namespace ltrlab::data
