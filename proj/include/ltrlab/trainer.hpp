// Joint adversarial training: zero-shot, item-level (ItemDA) and list-level
// (ListDA) alignment via gradient descent-ascent with gradient reversal.
// One forward pass per step computes the ranking loss on source and the
// adversarial loss on both domains through grad_reverse(., lambda); a single
// backward then yields d(L_S - lambda L_ad) for the scorer and d(L_ad) for
// the discriminators, which descend with their own learning rates.
// Updates are simultaneous each step.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ltrlab/data.hpp"
#include "ltrlab/losses.hpp"
#include "ltrlab/metrics.hpp"
#include "ltrlab/models.hpp"
#include "ltrlab/rng.hpp"

namespace ltrlab::trainer {

// Thrown when a loss or gradient goes non-finite; the CLI maps it to its
// numerical-abort exit code.
struct NumericalAbort : std::runtime_error {
  explicit NumericalAbort(const std::string& what)
      : std::runtime_error(what) {}
};

enum class Mode { zero_shot, item_da, list_da };

inline Mode mode_from_name(const std::string& name) {
  if (name == "zero_shot") return Mode::zero_shot;
  if (name == "item_da") return Mode::item_da;
  if (name == "list_da") return Mode::list_da;
  throw std::invalid_argument("unknown mode: " + name);
}

inline std::string mode_name(Mode m) {
  switch (m) {
    case Mode::zero_shot: return "zero_shot";
    case Mode::item_da: return "item_da";
    case Mode::list_da: return "list_da";
  }
  return "?";
}

enum class LossKind { softmax_ce, pairwise_logistic };

inline LossKind loss_from_name(const std::string& name) {
  if (name == "softmax_ce") return LossKind::softmax_ce;
  if (name == "pairwise_logistic") return LossKind::pairwise_logistic;
  throw std::invalid_argument("unknown loss: " + name);
}

struct TrainConfig {
  Mode mode = Mode::zero_shot;
  double lambda = 0.1;
  double eta_rank = 0.05;
  double eta_ad = 0.1;
  double decay_factor = 0.7;
  std::size_t decay_every = 500;
  std::size_t steps = 2000;
  std::size_t batch_size = 32;  // lists per domain per step
  std::size_t ensemble_size = 5;
  LossKind loss = LossKind::softmax_ce;
  std::uint64_t seed = 1;
  // model widths (full-scale rankers use 1024/256; these suit CPU runs)
  std::size_t hidden = 64;
  std::size_t feature_dim = 32;
  std::size_t disc_hidden = 32;
  bool attention = true;

  void validate() const {
    if (mode != Mode::zero_shot && !(lambda > 0.0))
      throw std::invalid_argument("TrainConfig: lambda must be > 0 for DA modes");
    if (!(eta_rank > 0.0) || !(eta_ad > 0.0))
      throw std::invalid_argument("TrainConfig: learning rates must be > 0");
    if (batch_size < 1 || steps < 1 || ensemble_size < 1)
      throw std::invalid_argument("TrainConfig: counts must be >= 1");
    if (!(decay_factor > 0.0) || decay_every < 1)
      throw std::invalid_argument("TrainConfig: bad decay schedule");
  }
};

// eta * factor^floor(step / every)
inline double lr_at(std::size_t step, double eta, double factor,
                    std::size_t every) {
  return eta * std::pow(factor, double(step / every));
}

struct StepMetrics {
  std::size_t step;
  double lr_rank, lr_ad;
  double loss_rank, loss_ad;

  std::string to_log_line() const {
    std::ostringstream os;
    os << step << '\t' << metrics::MetricReport::format_value(lr_rank) << '\t'
       << metrics::MetricReport::format_value(lr_ad) << '\t'
       << metrics::MetricReport::format_value(loss_rank) << '\t'
       << metrics::MetricReport::format_value(loss_ad);
    return os.str();
  }
};

struct TrainState {
  std::size_t step = 0;
  models::MLPScorer scorer;
  models::DiscriminatorEnsemble discs;
  // cumulative means over all completed steps
  double avg_loss_rank = 0.0;
  double avg_loss_ad = 0.0;
};

// One list per entry; inputs already in [shared; disjoint] column order.
struct ListBatch {
  std::vector<Tensor> inputs;
  std::vector<const std::vector<double>*> labels;  // null when unlabeled
};

namespace detail {

inline ad::NodePtr ranking_loss_node(LossKind kind, const ad::NodePtr& scores,
                                     const std::vector<double>& y) {
  return kind == LossKind::softmax_ce
             ? losses::softmax_ce_node(scores, y)
             : losses::pairwise_logistic_node(scores, y);
}

}  // namespace detail

// One simultaneous update. Returns the step metrics; the adversarial path is
// skipped entirely in zero-shot mode.
inline StepMetrics joint_step(TrainState& state, const ListBatch& source,
                              const ListBatch& target,
                              const TrainConfig& cfg) {
  cfg.validate();
  if (source.inputs.empty())
    throw std::invalid_argument("joint_step: empty source batch");
  if (cfg.mode != Mode::zero_shot && target.inputs.empty())
    throw std::invalid_argument("joint_step: mode " + mode_name(cfg.mode) +
                                " requires a nonempty target batch");
  // the decay schedule applies to the ranking learning rate only
  const double lr_rank =
      lr_at(state.step, cfg.eta_rank, cfg.decay_factor, cfg.decay_every);
  const double lr_ad = cfg.eta_ad;

  models::Binder scorer_bind(true);
  models::Binder disc_bind(true);

  // ranking loss on source
  std::vector<ad::NodePtr> source_features;
  ad::NodePtr loss_rank;
  for (std::size_t i = 0; i < source.inputs.size(); ++i) {
    if (!source.labels[i])
      throw std::invalid_argument("joint_step: unlabeled source list");
    auto z = state.scorer.feature_map(scorer_bind, source.inputs[i]);
    source_features.push_back(z);
    auto s = state.scorer.score_head(scorer_bind, z);
    auto li = detail::ranking_loss_node(cfg.loss, s, *source.labels[i]);
    loss_rank = loss_rank ? ad::add(loss_rank, li) : li;
  }
  loss_rank = ad::scalar_mul(loss_rank, 1.0 / double(source.inputs.size()));

  // adversarial loss on both domains through gradient reversal
  ad::NodePtr loss_ad;
  if (cfg.mode != Mode::zero_shot) {
    std::vector<ad::NodePtr> rev_src, rev_tgt;
    for (const auto& z : source_features)
      rev_src.push_back(ad::grad_reverse(z, cfg.lambda));
    for (const auto& x : target.inputs)
      rev_tgt.push_back(
          ad::grad_reverse(state.scorer.feature_map(scorer_bind, x),
                           cfg.lambda));
    loss_ad = models::ensemble_adversarial_loss(state.discs, disc_bind,
                                                rev_src, rev_tgt)
                  .node;
  }

  auto total = loss_ad ? ad::add(loss_rank, loss_ad) : loss_rank;
  if (!total->value.all_finite())
    throw NumericalAbort("joint_step: non-finite loss at step " +
                         std::to_string(state.step));
  ad::backward(total);
  if (!scorer_bind.grads_finite() || !disc_bind.grads_finite())
    throw NumericalAbort("joint_step: non-finite gradient at step " +
                         std::to_string(state.step));
  scorer_bind.apply_sgd(lr_rank);
  disc_bind.apply_sgd(lr_ad);

  StepMetrics m{state.step, lr_rank, lr_ad, loss_rank->value.item(),
                loss_ad ? loss_ad->value.item() : 0.0};
  const double n = double(state.step);
  state.avg_loss_rank = (state.avg_loss_rank * n + m.loss_rank) / (n + 1.0);
  state.avg_loss_ad = (state.avg_loss_ad * n + m.loss_ad) / (n + 1.0);
  ++state.step;
  return m;
}

// ---------------------------------------------------------------------------
// Evaluation

inline std::vector<double> score_list(models::MLPScorer& scorer,
                                      const Tensor& input) {
  models::Binder bind(false);
  auto s = scorer.scores(bind, input);
  std::vector<double> out(s->value.rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s->value.at(i, 0);
  return out;
}

// Metric names: "map", "mrr", "ndcg", with optional cutoff suffix "@k".
// Binary metrics binarize graded labels at grade >= positive_min. Lists
// with no relevant item are excluded from ndcg/map and counted as skipped;
// rr treats them as 0 per its definition.
inline metrics::MetricReport evaluate(models::MLPScorer& scorer,
                                      const data::Dataset& ds,
                                      const std::vector<std::string>& names,
                                      int positive_min = 1) {
  metrics::MetricReport rep;
  for (const auto& list : ds.lists) {
    if (!list.labels)
      throw std::invalid_argument("evaluate: list " + list.list_id +
                                  " has no labels");
    const auto scores = score_list(scorer, data::model_input(ds, list));
    const auto ranks = metrics::ranks_from_scores(scores);
    const auto& y = *list.labels;
    const auto y_bin = metrics::binarize(y, positive_min);
    for (const auto& name : names) {
      std::string base = name;
      int cutoff = 0;
      if (const auto at = name.find('@'); at != std::string::npos) {
        base = name.substr(0, at);
        cutoff = std::stoi(name.substr(at + 1));
        if (cutoff < 1)
          throw std::invalid_argument("evaluate: bad cutoff in " + name);
      }
      if (base == "mrr" || base == "rr") {
        rep.add(list.list_id, name,
                cutoff ? metrics::rr_at_k(ranks, y_bin, cutoff)
                       : metrics::reciprocal_rank(ranks, y_bin));
      } else if (base == "ndcg") {
        if (metrics::idcg(y) > 0.0)
          rep.add(list.list_id, name,
                  cutoff ? metrics::ndcg_at_k(ranks, y, cutoff)
                         : metrics::ndcg(ranks, y));
        else
          rep.add_skipped(name);
      } else if (base == "map" || base == "ap") {
        if (cutoff)
          throw std::invalid_argument("evaluate: map takes no cutoff");
        bool any = false;
        for (double v : y_bin) any = any || v == 1.0;
        if (any)
          rep.add(list.list_id, name, metrics::average_precision(ranks, y_bin));
        else
          rep.add_skipped(name);
      } else {
        throw std::invalid_argument("evaluate: unknown metric " + name);
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Full training loop

struct TrainResult {
  models::MLPScorer scorer;
  models::DiscriminatorEnsemble discs;
  std::vector<StepMetrics> log;  // one entry per step
  struct EvalPoint {
    std::size_t step;
    std::string domain;  // "source" / "target"
    std::string metric;
    double mean;
  };
  std::vector<EvalPoint> evals;  // periodic held-out metrics
};

// Optional periodic held-out evaluation during train().
struct EvalPlan {
  std::size_t every = 0;  // 0 disables
  const data::Dataset* source = nullptr;
  const data::Dataset* target = nullptr;
  std::vector<std::string> metrics{"ndcg"};
  int positive_min = 1;
};

namespace detail {

// Cyclic shuffled order over list indices; reshuffles each epoch.
class EpochSampler {
 public:
  EpochSampler(std::size_t n, Rng& rng) : n_(n), rng_(rng) { reshuffle(); }

  std::size_t next() {
    if (cursor_ == order_.size()) reshuffle();
    return order_[cursor_++];
  }

 private:
  void reshuffle() {
    order_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) order_[i] = i;
    rng_.shuffle(order_);
    cursor_ = 0;
  }
  std::size_t n_;
  Rng& rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

}  // namespace detail

// Runs cfg.steps joint steps over reshuffled epochs. Source must be
// labeled. For DA modes the target dataset is consumed through its
// unlabeled view, so target labels are never read.
inline TrainResult train(const data::Dataset& source,
                         const std::optional<data::Dataset>& target,
                         const TrainConfig& cfg,
                         const EvalPlan& eval_plan = {}) {
  cfg.validate();
  if (source.lists.empty())
    throw std::invalid_argument("train: empty source dataset");
  if (cfg.mode != Mode::zero_shot && (!target || target->lists.empty()))
    throw std::invalid_argument("train: mode " + mode_name(cfg.mode) +
                                " requires a target dataset");

  Rng rng(cfg.seed);
  models::ScorerConfig scfg;
  scfg.d_shared = source.shared_width();
  scfg.d_disjoint = source.disjoint_width();
  scfg.hidden = cfg.hidden;
  scfg.feature_dim = cfg.feature_dim;

  TrainState state;
  state.scorer = models::MLPScorer::init(scfg, rng);
  if (cfg.mode == Mode::item_da) {
    models::ItemDiscConfig dcfg{cfg.feature_dim, cfg.disc_hidden};
    state.discs = models::DiscriminatorEnsemble::init_items(
        dcfg, cfg.ensemble_size, rng);
  } else if (cfg.mode == Mode::list_da) {
    models::SetDiscConfig dcfg{cfg.feature_dim, cfg.disc_hidden,
                               cfg.disc_hidden, cfg.attention};
    state.discs = models::DiscriminatorEnsemble::init_lists(
        dcfg, cfg.ensemble_size, rng);
  }

  const data::Dataset target_unlabeled =
      cfg.mode == Mode::zero_shot || !target ? data::Dataset{}
                                             : target->without_labels();

  // Pre-render inputs once; lists are immutable during training.
  std::vector<Tensor> src_inputs;
  src_inputs.reserve(source.lists.size());
  for (const auto& l : source.lists)
    src_inputs.push_back(data::model_input(source, l));
  std::vector<Tensor> tgt_inputs;
  for (const auto& l : target_unlabeled.lists)
    tgt_inputs.push_back(data::model_input(target_unlabeled, l));

  detail::EpochSampler src_sampler(source.lists.size(), rng);
  std::optional<detail::EpochSampler> tgt_sampler;
  if (!tgt_inputs.empty())
    tgt_sampler.emplace(tgt_inputs.size(), rng);

  TrainResult result;
  result.log.reserve(cfg.steps);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    ListBatch sb, tb;
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      const std::size_t idx = src_sampler.next();
      sb.inputs.push_back(src_inputs[idx]);
      sb.labels.push_back(&*source.lists[idx].labels);
    }
    if (cfg.mode != Mode::zero_shot) {
      for (std::size_t b = 0; b < cfg.batch_size; ++b) {
        const std::size_t idx = tgt_sampler->next();
        tb.inputs.push_back(tgt_inputs[idx]);
        tb.labels.push_back(nullptr);
      }
    }
    result.log.push_back(joint_step(state, sb, tb, cfg));
    if (eval_plan.every > 0 &&
        (state.step % eval_plan.every == 0 || state.step == cfg.steps)) {
      auto record = [&](const data::Dataset* ds, const char* tag) {
        if (!ds) return;
        auto rep = evaluate(state.scorer, *ds, eval_plan.metrics,
                            eval_plan.positive_min);
        for (const auto& [metric, mean] : rep.means())
          result.evals.push_back({state.step, tag, metric, mean});
      };
      record(eval_plan.source, "source");
      record(eval_plan.target, "target");
    }
  }
  result.scorer = std::move(state.scorer);
  result.discs = std::move(state.discs);
  return result;
}

// Columns: step, lr_rank, lr_ad, loss_rank, loss_ad. One line per step,
// no header, so the line count equals the step count.
inline void write_training_log(const std::vector<StepMetrics>& log,
                               std::ostream& os) {
  for (const auto& m : log) os << m.to_log_line() << '\n';
}

}  // namespace ltrlab::trainer

