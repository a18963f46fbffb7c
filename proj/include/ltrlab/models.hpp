// Trainable models. The composite scorer f = h.g is a per-item MLP with
// separate shared/disjoint input branches merged by a third layer (the
// feature map g), topped by a shared linear scoring head h. Domain
// discriminators come in two forms: an item-wise three-layer MLP, and a
// permutation-invariant set discriminator (per-item encoder, optional
// single self-attention layer without positional encoding, mean-pool,
// MLP head). Checkpoints serialize to a self-describing text container
// with hexfloat values, so round-trips are bit-exact.
#pragma once

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ltrlab/autodiff.hpp"
#include "ltrlab/losses.hpp"
#include "ltrlab/rng.hpp"

namespace ltrlab::models {

// Per-step bridge from parameter storage to graph nodes. Binding the same
// tensor twice within a step returns the same node, so gradients from every
// use accumulate; apply_sgd then writes the update back into storage.
class Binder {
 public:
  explicit Binder(bool trainable = true) : trainable_(trainable) {}

  ad::NodePtr operator()(Tensor& t) {
    auto it = bound_.find(&t);
    if (it != bound_.end()) return it->second;
    auto node = trainable_ ? ad::param(t) : ad::constant(t);
    bound_.emplace(&t, node);
    order_.push_back(&t);
    return node;
  }

  void apply_sgd(double lr) {
    for (Tensor* t : order_) {
      const auto& node = bound_.at(t);
      if (node->grad.numel() != t->numel()) continue;  // never reached
      for (std::size_t i = 0; i < t->numel(); ++i)
        (*t)[i] -= lr * node->grad[i];
    }
  }

  bool grads_finite() const {
    for (const auto& [t, node] : bound_)
      if (node->grad.numel() && !node->grad.all_finite()) return false;
    return true;
  }

 private:
  bool trainable_;
  std::map<Tensor*, ad::NodePtr> bound_;
  std::vector<Tensor*> order_;
};

namespace detail {

// Glorot-style uniform init in +-sqrt(6 / (fan_in + fan_out)).
inline Tensor init_weight(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  Tensor w(fan_in, fan_out);
  const double bound = std::sqrt(6.0 / double(fan_in + fan_out));
  for (std::size_t i = 0; i < w.numel(); ++i)
    w[i] = rng.uniform(-bound, bound);
  return w;
}

inline Tensor zeros_row(std::size_t n) { return Tensor(1, n); }

}  // namespace detail

// A list-level feature representation: l item vectors of dimension k.
struct FeatureList {
  Tensor vectors;  // l x k
  std::string list_id;
};

// ---------------------------------------------------------------------------
// Composite scorer f = h . g

struct ScorerConfig {
  std::size_t d_shared = 0;    // width of the shared feature segment
  std::size_t d_disjoint = 0;  // 0 means a single branch
  std::size_t hidden = 64;     // branch hidden width (1024 at full scale)
  std::size_t feature_dim = 32;  // k, branch output width (256 at full scale)
};

struct MLPScorer {
  ScorerConfig cfg;
  // shared branch
  Tensor w1s, b1s, w2s, b2s;
  // disjoint branch (empty when d_disjoint == 0)
  Tensor w1d, b1d, w2d, b2d;
  // merge layer and linear head
  Tensor w3, b3, w4, b4;

  static MLPScorer init(const ScorerConfig& cfg, Rng& rng) {
    if (cfg.d_shared == 0)
      throw std::invalid_argument("MLPScorer: d_shared must be positive");
    MLPScorer m;
    m.cfg = cfg;
    m.w1s = detail::init_weight(cfg.d_shared, cfg.hidden, rng);
    m.b1s = detail::zeros_row(cfg.hidden);
    m.w2s = detail::init_weight(cfg.hidden, cfg.feature_dim, rng);
    m.b2s = detail::zeros_row(cfg.feature_dim);
    std::size_t merged = cfg.feature_dim;
    if (cfg.d_disjoint > 0) {
      m.w1d = detail::init_weight(cfg.d_disjoint, cfg.hidden, rng);
      m.b1d = detail::zeros_row(cfg.hidden);
      m.w2d = detail::init_weight(cfg.hidden, cfg.feature_dim, rng);
      m.b2d = detail::zeros_row(cfg.feature_dim);
      merged = 2 * cfg.feature_dim;
    }
    m.w3 = detail::init_weight(merged, cfg.feature_dim, rng);
    m.b3 = detail::zeros_row(cfg.feature_dim);
    m.w4 = detail::init_weight(cfg.feature_dim, 1, rng);
    m.b4 = detail::zeros_row(1);
    return m;
  }

  // v_i = ReLU(W3 [branch_s(x_shared); branch_d(x_disjoint)] + b3),
  // each branch ReLU(W2 ReLU(W1 x + b1) + b2), applied item-wise.
  ad::NodePtr feature_map(Binder& bind, const Tensor& items) {
    if (items.cols() != cfg.d_shared + cfg.d_disjoint)
      throw std::invalid_argument(
          "feature_map: item width " + std::to_string(items.cols()) +
          " does not match shared+disjoint segment widths " +
          std::to_string(cfg.d_shared) + "+" + std::to_string(cfg.d_disjoint));
    auto x = ad::constant(items);
    auto branch = [&](const ad::NodePtr& seg, Tensor& w1, Tensor& b1,
                      Tensor& w2, Tensor& b2) {
      auto h1 = ad::relu(ad::add(ad::matmul(seg, bind(w1)), bind(b1)));
      return ad::relu(ad::add(ad::matmul(h1, bind(w2)), bind(b2)));
    };
    auto shared = branch(ad::slice_cols(x, 0, cfg.d_shared), w1s, b1s, w2s, b2s);
    ad::NodePtr merged = shared;
    if (cfg.d_disjoint > 0) {
      auto disjoint = branch(ad::slice_cols(x, cfg.d_shared, cfg.d_disjoint),
                             w1d, b1d, w2d, b2d);
      merged = ad::concat(shared, disjoint, 1);
    }
    return ad::relu(ad::add(ad::matmul(merged, bind(w3)), bind(b3)));
  }

  // s_i = W4 v_i + b4; one real per item.
  ad::NodePtr score_head(Binder& bind, const ad::NodePtr& features) {
    if (features->value.cols() != cfg.feature_dim)
      throw std::invalid_argument("score_head: features have " +
                                  std::to_string(features->value.cols()) +
                                  " columns, expected " +
                                  std::to_string(cfg.feature_dim));
    return ad::add(ad::matmul(features, bind(w4)), bind(b4));
  }

  ad::NodePtr scores(Binder& bind, const Tensor& items) {
    return score_head(bind, feature_map(bind, items));
  }

  // Exact spectral norm of the linear head: the Euclidean norm of w4.
  double head_spectral_norm() const {
    double s = 0.0;
    for (std::size_t i = 0; i < w4.numel(); ++i) s += w4[i] * w4[i];
    return std::sqrt(s);
  }

  void visit(const std::function<void(const std::string&, Tensor&)>& fn) {
    fn("w1s", w1s);
    fn("b1s", b1s);
    fn("w2s", w2s);
    fn("b2s", b2s);
    if (cfg.d_disjoint > 0) {
      fn("w1d", w1d);
      fn("b1d", b1d);
      fn("w2d", w2d);
      fn("b2d", b2d);
    }
    fn("w3", w3);
    fn("b3", b3);
    fn("w4", w4);
    fn("b4", b4);
  }
};

// ---------------------------------------------------------------------------
// Discriminators

struct ItemDiscConfig {
  std::size_t feature_dim = 32;
  std::size_t hidden = 32;
};

// Three-layer MLP R^k -> R, applied independently to each item vector.
struct ItemDiscriminator {
  ItemDiscConfig cfg;
  Tensor w1, b1, w2, b2, w3, b3;

  static ItemDiscriminator init(const ItemDiscConfig& cfg, Rng& rng) {
    ItemDiscriminator d;
    d.cfg = cfg;
    d.w1 = detail::init_weight(cfg.feature_dim, cfg.hidden, rng);
    d.b1 = detail::zeros_row(cfg.hidden);
    d.w2 = detail::init_weight(cfg.hidden, cfg.hidden, rng);
    d.b2 = detail::zeros_row(cfg.hidden);
    d.w3 = detail::init_weight(cfg.hidden, 1, rng);
    d.b3 = detail::zeros_row(1);
    return d;
  }

  // One logit per row of the input batch.
  ad::NodePtr discriminate_items(Binder& bind, const ad::NodePtr& items) {
    if (items->value.cols() != cfg.feature_dim)
      throw std::invalid_argument("discriminate_items: got width " +
                                  std::to_string(items->value.cols()) +
                                  ", expected " +
                                  std::to_string(cfg.feature_dim));
    auto h1 = ad::relu(ad::add(ad::matmul(items, bind(w1)), bind(b1)));
    auto h2 = ad::relu(ad::add(ad::matmul(h1, bind(w2)), bind(b2)));
    return ad::add(ad::matmul(h2, bind(w3)), bind(b3));
  }

  void visit(const std::function<void(const std::string&, Tensor&)>& fn) {
    fn("w1", w1);
    fn("b1", b1);
    fn("w2", w2);
    fn("b2", b2);
    fn("w3", w3);
    fn("b3", b3);
  }
};

struct SetDiscConfig {
  std::size_t feature_dim = 32;
  std::size_t hidden = 32;
  std::size_t embed_dim = 32;
  bool attention = true;  // single self-attention layer, no positional enc.
};

// Permutation-invariant list discriminator: per-item encoder, optional
// self-attention (equivariant), mean-pool (invariant), MLP head.
struct SetDiscriminator {
  SetDiscConfig cfg;
  Tensor we1, be1, we2, be2;      // per-item encoder phi
  Tensor wq, wk, wv, wo;          // attention projections
  Tensor wr1, br1, wr2, br2;      // head rho

  static SetDiscriminator init(const SetDiscConfig& cfg, Rng& rng) {
    SetDiscriminator d;
    d.cfg = cfg;
    d.we1 = detail::init_weight(cfg.feature_dim, cfg.hidden, rng);
    d.be1 = detail::zeros_row(cfg.hidden);
    d.we2 = detail::init_weight(cfg.hidden, cfg.embed_dim, rng);
    d.be2 = detail::zeros_row(cfg.embed_dim);
    if (cfg.attention) {
      d.wq = detail::init_weight(cfg.embed_dim, cfg.embed_dim, rng);
      d.wk = detail::init_weight(cfg.embed_dim, cfg.embed_dim, rng);
      d.wv = detail::init_weight(cfg.embed_dim, cfg.embed_dim, rng);
      d.wo = detail::init_weight(cfg.embed_dim, cfg.embed_dim, rng);
    }
    d.wr1 = detail::init_weight(cfg.embed_dim, cfg.hidden, rng);
    d.br1 = detail::zeros_row(cfg.hidden);
    d.wr2 = detail::init_weight(cfg.hidden, 1, rng);
    d.br2 = detail::zeros_row(1);
    return d;
  }

  // One logit per input list (l x k node).
  ad::NodePtr discriminate_list(Binder& bind, const ad::NodePtr& list) {
    if (list->value.cols() != cfg.feature_dim)
      throw std::invalid_argument("discriminate_list: got width " +
                                  std::to_string(list->value.cols()) +
                                  ", expected " +
                                  std::to_string(cfg.feature_dim));
    auto h = ad::relu(ad::add(ad::matmul(list, bind(we1)), bind(be1)));
    auto e = ad::relu(ad::add(ad::matmul(h, bind(we2)), bind(be2)));
    if (cfg.attention) {
      auto q = ad::matmul(e, bind(wq));
      auto k = ad::matmul(e, bind(wk));
      auto v = ad::matmul(e, bind(wv));
      auto scores = ad::scalar_mul(ad::matmul(q, ad::transpose(k)),
                                   1.0 / std::sqrt(double(cfg.embed_dim)));
      auto attn = ad::softmax(scores, 1);
      e = ad::add(e, ad::matmul(ad::matmul(attn, v), bind(wo)));
    }
    auto pooled = ad::mean(e, 0);  // 1 x embed_dim
    auto r = ad::relu(ad::add(ad::matmul(pooled, bind(wr1)), bind(br1)));
    return ad::add(ad::matmul(r, bind(wr2)), bind(br2));  // 1 x 1
  }

  void visit(const std::function<void(const std::string&, Tensor&)>& fn) {
    fn("we1", we1);
    fn("be1", be1);
    fn("we2", we2);
    fn("be2", be2);
    if (cfg.attention) {
      fn("wq", wq);
      fn("wk", wk);
      fn("wv", wv);
      fn("wo", wo);
    }
    fn("wr1", wr1);
    fn("br1", br1);
    fn("wr2", wr2);
    fn("br2", br2);
  }
};

// ---------------------------------------------------------------------------
// Ensemble adversarial loss, summed over discriminators:
//   sum_i [ mean over source of l_ad(f_i(.), 0) + mean over target of
//   l_ad(f_i(.), 1) ].

struct DiscriminatorEnsemble {
  enum class Kind { item, list };
  Kind kind = Kind::item;
  std::vector<ItemDiscriminator> item_discs;
  std::vector<SetDiscriminator> set_discs;

  static DiscriminatorEnsemble init_items(const ItemDiscConfig& cfg,
                                          std::size_t count, Rng& rng) {
    DiscriminatorEnsemble e;
    e.kind = Kind::item;
    for (std::size_t i = 0; i < count; ++i)
      e.item_discs.push_back(ItemDiscriminator::init(cfg, rng));
    return e;
  }
  static DiscriminatorEnsemble init_lists(const SetDiscConfig& cfg,
                                          std::size_t count, Rng& rng) {
    DiscriminatorEnsemble e;
    e.kind = Kind::list;
    for (std::size_t i = 0; i < count; ++i)
      e.set_discs.push_back(SetDiscriminator::init(cfg, rng));
    return e;
  }

  std::size_t size() const {
    return kind == Kind::item ? item_discs.size() : set_discs.size();
  }

  void visit(const std::function<void(const std::string&, Tensor&)>& fn) {
    std::size_t i = 0;
    auto prefixed = [&](const std::string& name, Tensor& t) {
      fn("disc" + std::to_string(i) + "." + name, t);
    };
    if (kind == Kind::item)
      for (auto& d : item_discs) {
        d.visit(prefixed);
        ++i;
      }
    else
      for (auto& d : set_discs) {
        d.visit(prefixed);
        ++i;
      }
  }
};

namespace detail {

// Stack l x k list nodes into one (sum l) x k node.
inline ad::NodePtr stack_rows(const std::vector<ad::NodePtr>& lists) {
  ad::NodePtr out = lists[0];
  for (std::size_t i = 1; i < lists.size(); ++i)
    out = ad::concat(out, lists[i], 0);
  return out;
}

}  // namespace detail

inline losses::LossValue ensemble_adversarial_loss(
    DiscriminatorEnsemble& ensemble, Binder& bind,
    const std::vector<ad::NodePtr>& source_features,
    const std::vector<ad::NodePtr>& target_features) {
  if (ensemble.size() == 0)
    throw std::invalid_argument(
        "ensemble_adversarial_loss: empty discriminator ensemble");
  if (source_features.empty() || target_features.empty())
    throw std::invalid_argument(
        "ensemble_adversarial_loss: empty domain batch");
  losses::LossValue out;
  ad::NodePtr total;
  auto domain_term = [&](const std::vector<ad::NodePtr>& features,
                         int a) -> ad::NodePtr {
    if (ensemble.kind == DiscriminatorEnsemble::Kind::item) {
      auto items = detail::stack_rows(features);
      ad::NodePtr sum;
      for (auto& d : ensemble.item_discs) {
        auto logits = d.discriminate_items(bind, items);
        auto term = ad::mean_all(losses::adversarial_logistic_node(logits, a));
        sum = sum ? ad::add(sum, term) : term;
      }
      return sum;
    }
    ad::NodePtr sum;
    for (auto& d : ensemble.set_discs) {
      ad::NodePtr per_disc;
      for (const auto& z : features) {
        auto term = losses::adversarial_logistic_node(
            d.discriminate_list(bind, z), a);
        per_disc = per_disc ? ad::add(per_disc, term) : term;
      }
      per_disc = ad::scalar_mul(per_disc, 1.0 / double(features.size()));
      sum = sum ? ad::add(sum, per_disc) : per_disc;
    }
    return sum;
  };
  total = ad::add(domain_term(source_features, 0),
                  domain_term(target_features, 1));
  out.node = total;
  out.per_list = {total->value.item()};
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoint container: text header with architecture hyperparameters, then
// named tensors with shapes, values as hexadecimal floating point.

struct Checkpoint {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::pair<std::string, Tensor>> tensors;

  void set_meta(const std::string& key, const std::string& value) {
    meta.emplace_back(key, value);
  }
  const std::string& get_meta(const std::string& key) const {
    for (const auto& [k, v] : meta)
      if (k == key) return v;
    throw std::runtime_error("Checkpoint: missing meta key " + key);
  }
  std::size_t meta_size_t(const std::string& key) const {
    return std::stoul(get_meta(key));
  }

  void add_tensor(const std::string& name, const Tensor& t) {
    tensors.emplace_back(name, t);
  }
  const Tensor& tensor(const std::string& name) const {
    for (const auto& [n, t] : tensors)
      if (n == name) return t;
    throw std::runtime_error("Checkpoint: missing tensor " + name);
  }

  void write(std::ostream& os) const {
    os << "ltrlab-checkpoint v1\n";
    for (const auto& [k, v] : meta) os << "meta\t" << k << '\t' << v << '\n';
    char buf[48];
    for (const auto& [name, t] : tensors) {
      os << "tensor\t" << name << '\t' << t.rows() << '\t' << t.cols() << '\n';
      for (std::size_t r = 0; r < t.rows(); ++r) {
        for (std::size_t c = 0; c < t.cols(); ++c) {
          std::snprintf(buf, sizeof(buf), "%a", t.at(r, c));
          os << (c ? " " : "") << buf;
        }
        os << '\n';
      }
    }
    os << "end\n";
  }

  void save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("Checkpoint: cannot open " + path);
    write(os);
  }

  static Checkpoint read(std::istream& is) {
    Checkpoint ck;
    std::string line;
    if (!std::getline(is, line) || line != "ltrlab-checkpoint v1")
      throw std::runtime_error("Checkpoint: bad magic line");
    while (std::getline(is, line)) {
      if (line == "end") return ck;
      std::istringstream ls(line);
      std::string tag;
      std::getline(ls, tag, '\t');
      if (tag == "meta") {
        std::string k, v;
        std::getline(ls, k, '\t');
        std::getline(ls, v);
        ck.meta.emplace_back(k, v);
      } else if (tag == "tensor") {
        std::string name, rs, cs;
        std::getline(ls, name, '\t');
        std::getline(ls, rs, '\t');
        std::getline(ls, cs);
        const std::size_t rows = std::stoul(rs), cols = std::stoul(cs);
        Tensor t(rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
          if (!std::getline(is, line))
            throw std::runtime_error("Checkpoint: truncated tensor " + name);
          const char* p = line.c_str();
          char* endp = nullptr;
          for (std::size_t c = 0; c < cols; ++c) {
            t.at(r, c) = std::strtod(p, &endp);
            if (endp == p)
              throw std::runtime_error("Checkpoint: bad value in " + name);
            p = endp;
          }
        }
        ck.tensors.emplace_back(name, std::move(t));
      } else {
        throw std::runtime_error("Checkpoint: unknown record " + tag);
      }
    }
    throw std::runtime_error("Checkpoint: missing end marker");
  }

  static Checkpoint load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("Checkpoint: cannot open " + path);
    return read(is);
  }
};

inline Checkpoint scorer_checkpoint(MLPScorer& m) {
  Checkpoint ck;
  ck.set_meta("arch", "mlp_scorer");
  ck.set_meta("d_shared", std::to_string(m.cfg.d_shared));
  ck.set_meta("d_disjoint", std::to_string(m.cfg.d_disjoint));
  ck.set_meta("hidden", std::to_string(m.cfg.hidden));
  ck.set_meta("feature_dim", std::to_string(m.cfg.feature_dim));
  m.visit([&](const std::string& name, Tensor& t) { ck.add_tensor(name, t); });
  return ck;
}

inline MLPScorer scorer_from_checkpoint(const Checkpoint& ck) {
  if (ck.get_meta("arch") != "mlp_scorer")
    throw std::runtime_error("scorer_from_checkpoint: arch is " +
                             ck.get_meta("arch"));
  ScorerConfig cfg;
  cfg.d_shared = ck.meta_size_t("d_shared");
  cfg.d_disjoint = ck.meta_size_t("d_disjoint");
  cfg.hidden = ck.meta_size_t("hidden");
  cfg.feature_dim = ck.meta_size_t("feature_dim");
  Rng rng(0);
  MLPScorer m = MLPScorer::init(cfg, rng);
  m.visit([&](const std::string& name, Tensor& t) {
    const Tensor& stored = ck.tensor(name);
    if (!stored.same_shape(t))
      throw std::runtime_error("scorer_from_checkpoint: tensor " + name +
                               " has shape " + stored.shape_str() +
                               ", expected " + t.shape_str());
    t = stored;
  });
  return m;
}

}  // namespace ltrlab::models
