#include "ltrlab/trainer.hpp"

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "ltrlab/data.hpp"
#include "ltrlab/rng.hpp"

using namespace ltrlab;
using namespace ltrlab::trainer;

namespace {

data::Dataset labeled_synthetic(std::uint64_t seed, std::size_t n = 32,
                                std::size_t l = 4, std::size_t p = 6) {
  data::SyntheticSpec spec;
  spec.seed = seed;
  spec.n_lists = n;
  spec.list_len = l;
  spec.feature_dim = p;
  return data::generate_synthetic(spec).source;
}

TrainConfig small_config(Mode mode) {
  TrainConfig cfg;
  cfg.mode = mode;
  cfg.lambda = 0.5;
  cfg.eta_rank = 0.05;
  cfg.eta_ad = 0.1;
  cfg.steps = 5;
  cfg.batch_size = 4;
  cfg.ensemble_size = 2;
  cfg.hidden = 8;
  cfg.feature_dim = 6;
  cfg.disc_hidden = 6;
  cfg.seed = 3;
  return cfg;
}

ListBatch batch_of(const data::Dataset& ds, std::size_t from, std::size_t n,
                   bool with_labels) {
  ListBatch b;
  for (std::size_t i = from; i < from + n; ++i) {
    b.inputs.push_back(data::model_input(ds, ds.lists[i]));
    b.labels.push_back(with_labels ? &*ds.lists[i].labels : nullptr);
  }
  return b;
}

std::string scorer_bytes(models::MLPScorer& m) {
  std::ostringstream os;
  models::scorer_checkpoint(m).write(os);
  return os.str();
}

TrainState fresh_state(const TrainConfig& cfg, const data::Dataset& ds) {
  Rng rng(cfg.seed);
  models::ScorerConfig scfg{ds.shared_width(), ds.disjoint_width(),
                            cfg.hidden, cfg.feature_dim};
  TrainState st;
  st.scorer = models::MLPScorer::init(scfg, rng);
  if (cfg.mode == Mode::item_da)
    st.discs = models::DiscriminatorEnsemble::init_items(
        {cfg.feature_dim, cfg.disc_hidden}, cfg.ensemble_size, rng);
  else if (cfg.mode == Mode::list_da)
    st.discs = models::DiscriminatorEnsemble::init_lists(
        {cfg.feature_dim, cfg.disc_hidden, cfg.disc_hidden, true},
        cfg.ensemble_size, rng);
  return st;
}

}  // namespace

TEST_CASE("learning-rate schedule") {
  TrainConfig cfg;
  cfg.decay_factor = 0.7;
  cfg.decay_every = 500;
  CHECK(lr_at(0, 1.0, 0.7, 500) == doctest::Approx(1.0));
  CHECK(lr_at(499, 1.0, 0.7, 500) == doctest::Approx(1.0));
  CHECK(lr_at(500, 1.0, 0.7, 500) == doctest::Approx(0.7));
  CHECK(lr_at(1000, 1.0, 0.7, 500) == doctest::Approx(0.49));
}

TEST_CASE("config validation") {
  TrainConfig cfg = small_config(Mode::list_da);
  cfg.lambda = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config(Mode::zero_shot);
  cfg.lambda = 0.0;  // allowed outside DA modes
  CHECK_NOTHROW(cfg.validate());
  cfg.eta_rank = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_THROWS_AS(mode_from_name("sideways"), std::invalid_argument);
}

TEST_CASE("zero-shot step never touches discriminator parameters") {
  auto ds = labeled_synthetic(1);
  auto cfg = small_config(Mode::zero_shot);
  // state carries discriminators, but the zero-shot path must skip them
  auto st = fresh_state(small_config(Mode::item_da), ds);
  std::ostringstream before;
  st.discs.visit([&](const std::string& n, Tensor& t) {
    before << n;
    for (std::size_t i = 0; i < t.numel(); ++i) before << ' ' << t[i];
  });
  auto m = joint_step(st, batch_of(ds, 0, 4, true), {}, cfg);
  CHECK(m.loss_ad == 0.0);
  std::ostringstream after;
  st.discs.visit([&](const std::string& n, Tensor& t) {
    after << n;
    for (std::size_t i = 0; i < t.numel(); ++i) after << ' ' << t[i];
  });
  CHECK(before.str() == after.str());
}

TEST_CASE("DA modes require a target batch") {
  auto ds = labeled_synthetic(2);
  for (Mode mode : {Mode::item_da, Mode::list_da}) {
    auto cfg = small_config(mode);
    auto st = fresh_state(cfg, ds);
    CHECK_THROWS_AS(joint_step(st, batch_of(ds, 0, 4, true), {}, cfg),
                    std::invalid_argument);
  }
}

TEST_CASE("lambda -> 0 recovers the zero-shot scorer update") {
  auto ds = labeled_synthetic(3);
  auto tiny = small_config(Mode::list_da);
  tiny.lambda = 1e-9;
  tiny.steps = 1;
  auto st_da = fresh_state(tiny, ds);
  auto st_zs = fresh_state(tiny, ds);  // same seed, same init
  auto zs_cfg = tiny;
  zs_cfg.mode = Mode::zero_shot;
  joint_step(st_da, batch_of(ds, 0, 4, true), batch_of(ds, 4, 4, false),
             tiny);
  joint_step(st_zs, batch_of(ds, 0, 4, true), {}, zs_cfg);
  double max_diff = 0.0;
  st_da.scorer.visit([&](const std::string& name, Tensor& t) {
    st_zs.scorer.visit([&](const std::string& name2, Tensor& t2) {
      if (name != name2) return;
      for (std::size_t i = 0; i < t.numel(); ++i)
        max_diff = std::max(max_diff, std::abs(t[i] - t2[i]));
    });
  });
  CHECK(max_diff < 1e-6);
}

TEST_CASE("gradient reversal equals the direct -lambda adversarial gradient") {
  auto ds = labeled_synthetic(4);
  const double lambda = 0.37;
  for (Mode mode : {Mode::item_da, Mode::list_da}) {
    auto cfg = small_config(mode);
    cfg.lambda = lambda;
    auto st = fresh_state(cfg, ds);
    auto src = batch_of(ds, 0, 3, true);
    auto tgt = batch_of(ds, 3, 3, false);

    // route A: adversarial loss through grad_reverse, scorer grads only
    models::Binder bind_a(true), disc_a(true);
    std::vector<ad::NodePtr> rev_s, rev_t;
    for (const auto& x : src.inputs)
      rev_s.push_back(
          ad::grad_reverse(st.scorer.feature_map(bind_a, x), lambda));
    for (const auto& x : tgt.inputs)
      rev_t.push_back(
          ad::grad_reverse(st.scorer.feature_map(bind_a, x), lambda));
    auto loss_a =
        models::ensemble_adversarial_loss(st.discs, disc_a, rev_s, rev_t);
    ad::backward(loss_a.node);

    // route B: plain adversarial loss, multiply scorer grads by -lambda
    models::Binder bind_b(true), disc_b(true);
    std::vector<ad::NodePtr> zs, zt;
    for (const auto& x : src.inputs)
      zs.push_back(st.scorer.feature_map(bind_b, x));
    for (const auto& x : tgt.inputs)
      zt.push_back(st.scorer.feature_map(bind_b, x));
    auto loss_b =
        models::ensemble_adversarial_loss(st.discs, disc_b, zs, zt);
    ad::backward(loss_b.node);

    double max_diff = 0.0;
    st.scorer.visit([&](const std::string&, Tensor& t) {
      const auto na = bind_a(t);  // returns the cached bound node
      const auto nb = bind_b(t);
      for (std::size_t i = 0; i < t.numel(); ++i) {
        const double via_reversal = na->grad.numel() ? na->grad[i] : 0.0;
        const double direct = nb->grad.numel() ? nb->grad[i] : 0.0;
        max_diff = std::max(max_diff,
                            std::abs(via_reversal - (-lambda * direct)));
      }
    });
    CHECK(max_diff < 1e-10);
  }
}

TEST_CASE("dependency audit: head reads only the ranking loss, discriminators only the adversarial loss") {
  auto ds = labeled_synthetic(5);
  auto cfg = small_config(Mode::list_da);
  auto st = fresh_state(cfg, ds);
  auto src = batch_of(ds, 0, 3, true);
  auto tgt = batch_of(ds, 3, 3, false);

  auto head_grads_of = [&](bool with_adversarial) {
    models::Binder sb(true), db(true);
    std::vector<ad::NodePtr> feats, rev_s, rev_t;
    ad::NodePtr loss_rank;
    for (std::size_t i = 0; i < src.inputs.size(); ++i) {
      auto z = st.scorer.feature_map(sb, src.inputs[i]);
      feats.push_back(z);
      auto s = st.scorer.score_head(sb, z);
      auto li = losses::softmax_ce_node(s, *src.labels[i]);
      loss_rank = loss_rank ? ad::add(loss_rank, li) : li;
    }
    ad::NodePtr total = loss_rank;
    if (with_adversarial) {
      for (const auto& z : feats)
        rev_s.push_back(ad::grad_reverse(z, cfg.lambda));
      for (const auto& x : tgt.inputs)
        rev_t.push_back(
            ad::grad_reverse(st.scorer.feature_map(sb, x), cfg.lambda));
      total = ad::add(total, models::ensemble_adversarial_loss(
                                 st.discs, db, rev_s, rev_t)
                                 .node);
    }
    ad::backward(total);
    std::vector<double> head;
    auto n4 = sb(st.scorer.w4);
    auto nb4 = sb(st.scorer.b4);
    head.insert(head.end(), n4->grad.data().begin(), n4->grad.data().end());
    head.insert(head.end(), nb4->grad.data().begin(), nb4->grad.data().end());
    return head;
  };
  CHECK(head_grads_of(false) == head_grads_of(true));

  auto disc_grads_of = [&](bool with_ranking) {
    models::Binder sb(true), db(true);
    std::vector<ad::NodePtr> rev_s, rev_t;
    ad::NodePtr loss_rank;
    for (std::size_t i = 0; i < src.inputs.size(); ++i) {
      auto z = st.scorer.feature_map(sb, src.inputs[i]);
      rev_s.push_back(ad::grad_reverse(z, cfg.lambda));
      if (with_ranking) {
        auto li = losses::softmax_ce_node(st.scorer.score_head(sb, z),
                                          *src.labels[i]);
        loss_rank = loss_rank ? ad::add(loss_rank, li) : li;
      }
    }
    for (const auto& x : tgt.inputs)
      rev_t.push_back(
          ad::grad_reverse(st.scorer.feature_map(sb, x), cfg.lambda));
    auto total =
        models::ensemble_adversarial_loss(st.discs, db, rev_s, rev_t).node;
    if (loss_rank) total = ad::add(total, loss_rank);
    ad::backward(total);
    std::vector<double> grads;
    st.discs.visit([&](const std::string&, Tensor& t) {
      auto n = db(t);
      grads.insert(grads.end(), n->grad.data().begin(), n->grad.data().end());
    });
    return grads;
  };
  CHECK(disc_grads_of(false) == disc_grads_of(true));
}

TEST_CASE("item-level loss ignores list structure; list-level does not") {
  // construct feature lists in the two-list counterexample pattern
  auto cfg = small_config(Mode::item_da);
  cfg.feature_dim = 1;
  cfg.disc_hidden = 6;
  Rng rng(9);
  auto item_discs =
      models::DiscriminatorEnsemble::init_items({1, 6}, 2, rng);
  auto set_discs = models::DiscriminatorEnsemble::init_lists(
      {1, 6, 6, true}, 2, rng);

  auto as_nodes = [](std::vector<Tensor> ts) {
    std::vector<ad::NodePtr> out;
    for (auto& t : ts) out.push_back(ad::constant(t));
    return out;
  };
  // original batches: lists (1,2,3), (4,5,6); shuffling items across lists
  // gives (1,5,3), (4,2,6) with the same item pool
  auto src_orig = as_nodes({Tensor(3, 1, {1, 2, 3}), Tensor(3, 1, {4, 5, 6})});
  auto src_shuf = as_nodes({Tensor(3, 1, {1, 5, 3}), Tensor(3, 1, {4, 2, 6})});
  auto tgt = as_nodes({Tensor(3, 1, {1, 3, 5}), Tensor(3, 1, {2, 4, 6})});

  models::Binder b1(false), b2(false), b3(false), b4(false);
  const double item_orig =
      models::ensemble_adversarial_loss(item_discs, b1, src_orig, tgt).value();
  const double item_shuf =
      models::ensemble_adversarial_loss(item_discs, b2, src_shuf, tgt).value();
  CHECK(item_orig == doctest::Approx(item_shuf).epsilon(1e-12));

  const double list_orig =
      models::ensemble_adversarial_loss(set_discs, b3, src_orig, tgt).value();
  const double list_shuf =
      models::ensemble_adversarial_loss(set_discs, b4, src_shuf, tgt).value();
  CHECK(std::abs(list_orig - list_shuf) > 1e-9);
}

TEST_CASE("training is deterministic given the seed") {
  auto src = labeled_synthetic(6, 16);
  auto tgt = labeled_synthetic(7, 16);
  auto cfg = small_config(Mode::list_da);
  cfg.steps = 12;
  auto r1 = train(src, tgt, cfg);
  auto r2 = train(src, tgt, cfg);
  CHECK(scorer_bytes(r1.scorer) == scorer_bytes(r2.scorer));
  REQUIRE(r1.log.size() == r2.log.size());
  for (std::size_t i = 0; i < r1.log.size(); ++i)
    CHECK(r1.log[i].to_log_line() == r2.log[i].to_log_line());
}

TEST_CASE("training log has one line per step") {
  auto src = labeled_synthetic(8, 12);
  auto cfg = small_config(Mode::zero_shot);
  cfg.steps = 9;
  auto res = train(src, std::nullopt, cfg);
  CHECK(res.log.size() == 9);
  std::ostringstream os;
  write_training_log(res.log, os);
  std::size_t lines = 0;
  std::string line;
  std::istringstream is(os.str());
  while (std::getline(is, line)) ++lines;
  CHECK(lines == 9);  // exactly one line per step
}

TEST_CASE("source-only training reaches NDCG >= 0.95") {
  // regression constant from a reference run, not ground truth
  auto src = labeled_synthetic(42, 64, 4, 8);
  TrainConfig cfg;
  cfg.mode = Mode::zero_shot;
  cfg.eta_rank = 0.05;
  cfg.steps = 2000;
  cfg.batch_size = 16;
  cfg.hidden = 32;
  cfg.feature_dim = 16;
  cfg.seed = 1;
  auto res = train(src, std::nullopt, cfg);
  auto rep = evaluate(res.scorer, src, {"ndcg"});
  CHECK(rep.means().at("ndcg") >= 0.95);
}

TEST_CASE("non-finite parameters abort the step") {
  auto ds = labeled_synthetic(10);
  auto cfg = small_config(Mode::zero_shot);
  auto st = fresh_state(cfg, ds);
  st.scorer.b4[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(joint_step(st, batch_of(ds, 0, 2, true), {}, cfg),
                  NumericalAbort);
}

TEST_CASE("evaluate: metric names, cutoffs, skipped lists") {
  Rng rng(11);
  data::Dataset ds;
  ds.feature_dim = 2;
  metrics::RankedList a;
  a.list_id = "a";
  a.items = {{1, 0}, {0, 1}, {0.5, 0.5}};
  a.labels = std::vector<double>{2, 0, 1};
  ds.lists.push_back(a);
  metrics::RankedList zero;
  zero.list_id = "z";
  zero.items = {{1, 0}};
  zero.labels = std::vector<double>{0};
  ds.lists.push_back(zero);

  models::ScorerConfig scfg{2, 0, 4, 3};
  auto scorer = models::MLPScorer::init(scfg, rng);
  auto rep = evaluate(scorer, ds, {"ndcg@2", "mrr@10", "map"}, 1);
  CHECK(rep.per_list("ndcg@2").size() == 1);  // zero list skipped
  CHECK(rep.skipped.at("ndcg@2") == 1);
  CHECK(rep.per_list("mrr@10").size() == 2);  // rr defined as 0 there
  CHECK(rep.skipped.at("map") == 1);
  CHECK_THROWS_AS(evaluate(scorer, ds, {"unknown"}), std::invalid_argument);
  CHECK_THROWS_AS(evaluate(scorer, ds, {"map@5"}), std::invalid_argument);

  // MRR@10 equals RR truncated at 10, cross-checked directly
  const auto scores = score_list(scorer, data::model_input(ds, ds.lists[0]));
  const auto ranks = metrics::ranks_from_scores(scores);
  const auto y_bin = metrics::binarize(*ds.lists[0].labels, 1);
  CHECK(rep.by_list("mrr@10").at("a") ==
        doctest::Approx(metrics::rr_at_k(ranks, y_bin, 10)));
}

TEST_CASE("periodic held-out evaluation during training") {
  auto src = labeled_synthetic(12, 12);
  auto hold = labeled_synthetic(13, 6);
  auto cfg = small_config(Mode::zero_shot);
  cfg.steps = 10;
  EvalPlan plan;
  plan.every = 4;
  plan.source = &hold;
  plan.metrics = {"ndcg", "mrr@10"};
  auto res = train(src, std::nullopt, cfg, plan);
  // evaluations at steps 4, 8 and the final step, two metrics each
  REQUIRE(res.evals.size() == 6);
  CHECK(res.evals[0].step == 4);
  CHECK(res.evals.back().step == 10);
  for (const auto& e : res.evals) {
    CHECK(e.domain == "source");
    CHECK(e.mean >= 0.0);
    CHECK(e.mean <= 1.0);
  }
}

TEST_CASE("running loss averages accumulate") {
  auto ds = labeled_synthetic(14);
  auto cfg = small_config(Mode::zero_shot);
  auto st = fresh_state(cfg, ds);
  double sum = 0.0;
  for (int i = 0; i < 4; ++i)
    sum += joint_step(st, batch_of(ds, 0, 4, true), {}, cfg).loss_rank;
  CHECK(st.avg_loss_rank == doctest::Approx(sum / 4.0).epsilon(1e-12));
  CHECK(st.avg_loss_ad == 0.0);
}
