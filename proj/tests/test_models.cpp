#include "ltrlab/models.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "ltrlab/rng.hpp"

using namespace ltrlab;
using namespace ltrlab::models;

namespace {

Tensor random_items(std::size_t l, std::size_t p, Rng& rng, double lo = 0.0,
                    double hi = 1.0) {
  Tensor t(l, p);
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

Tensor permute_rows(const Tensor& t, const std::vector<std::size_t>& perm) {
  Tensor out(t.rows(), t.cols());
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c)
      out.at(r, c) = t.at(perm[r], c);
  return out;
}

}  // namespace

TEST_CASE("feature map with zero weights is zero") {
  Rng rng(1);
  ScorerConfig cfg{4, 2, 8, 6};
  auto m = MLPScorer::init(cfg, rng);
  m.visit([](const std::string&, Tensor& t) {
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = 0.0;
  });
  Binder bind(false);
  auto z = m.feature_map(bind, random_items(3, 6, rng));
  for (std::size_t i = 0; i < z->value.numel(); ++i)
    CHECK(z->value[i] == 0.0);
}

TEST_CASE("feature map is exactly permutation-equivariant") {
  Rng rng(2);
  ScorerConfig cfg{5, 3, 16, 8};
  auto m = MLPScorer::init(cfg, rng);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor items = random_items(6, 8, rng);
    std::vector<std::size_t> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    Binder b1(false), b2(false);
    auto z = m.feature_map(b1, items)->value;
    auto zp = m.feature_map(b2, permute_rows(items, perm))->value;
    for (std::size_t r = 0; r < 6; ++r)
      for (std::size_t c = 0; c < z.cols(); ++c)
        CHECK(zp.at(r, c) == z.at(perm[r], c));  // exact
  }
}

TEST_CASE("feature map output is finite on [0,1] inputs") {
  Rng rng(3);
  ScorerConfig cfg{6, 0, 32, 16};
  auto m = MLPScorer::init(cfg, rng);
  for (int trial = 0; trial < 10; ++trial) {
    Binder bind(false);
    auto z = m.feature_map(bind, random_items(7, 6, rng));
    CHECK(z->value.all_finite());
    CHECK(z->value.cols() == 16);
  }
}

TEST_CASE("feature map rejects wrong segment widths") {
  Rng rng(4);
  ScorerConfig cfg{4, 2, 8, 4};
  auto m = MLPScorer::init(cfg, rng);
  Binder bind(false);
  CHECK_THROWS_AS(m.feature_map(bind, random_items(3, 5, rng)),
                  std::invalid_argument);
}

TEST_CASE("score head") {
  Rng rng(5);
  ScorerConfig cfg{2, 0, 4, 1};  // k = 1
  auto m = MLPScorer::init(cfg, rng);
  m.w4 = Tensor(1, 1, {2.0});
  m.b4 = Tensor(1, 1, {0.0});
  Binder bind(false);
  auto v = ad::constant(Tensor::col({1.0, 3.0}));
  auto s = m.score_head(bind, v);
  CHECK(s->value.at(0, 0) == 2.0);
  CHECK(s->value.at(1, 0) == 6.0);

  m.w4 = Tensor(1, 1, {0.0});
  m.b4 = Tensor(1, 1, {-1.5});
  Binder bind2(false);
  auto s2 = m.score_head(bind2, v);
  CHECK(s2->value.at(0, 0) == -1.5);
  CHECK(s2->value.at(1, 0) == -1.5);
}

TEST_CASE("head Lipschitz constant: sampled ratios never exceed |w4|") {
  Rng rng(6);
  ScorerConfig cfg{3, 0, 8, 5};
  auto m = MLPScorer::init(cfg, rng);
  const double bound = m.head_spectral_norm();
  for (int trial = 0; trial < 200; ++trial) {
    Tensor a(1, 5), b(1, 5);
    for (std::size_t i = 0; i < 5; ++i) {
      a[i] = rng.uniform(-2, 2);
      b[i] = rng.uniform(-2, 2);
    }
    Binder bind(false);
    const double sa =
        m.score_head(bind, ad::constant(a))->value.item();
    const double sb =
        m.score_head(bind, ad::constant(b))->value.item();
    double dist = 0.0;
    for (std::size_t i = 0; i < 5; ++i)
      dist += (a[i] - b[i]) * (a[i] - b[i]);
    dist = std::sqrt(dist);
    if (dist > 0.0) CHECK(std::abs(sa - sb) <= bound * dist + 1e-12);
  }
}

TEST_CASE("set discriminator is permutation invariant") {
  Rng rng(7);
  for (bool attention : {false, true}) {
    SetDiscConfig cfg{6, 12, 10, attention};
    auto d = SetDiscriminator::init(cfg, rng);
    Tensor z = random_items(8, 6, rng, -1.0, 1.0);
    Binder bind(false);
    const double base =
        d.discriminate_list(bind, ad::constant(z))->value.item();
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<std::size_t> perm(8);
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(perm);
      Binder b2(false);
      const double permuted =
          d.discriminate_list(b2, ad::constant(permute_rows(z, perm)))
              ->value.item();
      CHECK(std::abs(permuted - base) < 1e-6);
    }
  }
}

TEST_CASE("set discriminator on singleton and constant lists") {
  Rng rng(8);
  for (bool attention : {false, true}) {
    SetDiscConfig cfg{4, 8, 8, attention};
    auto d = SetDiscriminator::init(cfg, rng);
    Tensor single = random_items(1, 4, rng, -1, 1);
    Binder b1(false);
    const double lone =
        d.discriminate_list(b1, ad::constant(single))->value.item();
    // identical items: mean pooling of equal embeddings equals the singleton
    Tensor repeated(5, 4);
    for (std::size_t r = 0; r < 5; ++r)
      for (std::size_t c = 0; c < 4; ++c) repeated.at(r, c) = single.at(0, c);
    Binder b2(false);
    const double rep =
        d.discriminate_list(b2, ad::constant(repeated))->value.item();
    CHECK(rep == doctest::Approx(lone).epsilon(1e-12));
  }
}

TEST_CASE("item discriminator is item-wise") {
  Rng rng(9);
  ItemDiscConfig cfg{5, 8};
  auto d = ItemDiscriminator::init(cfg, rng);
  Tensor v = random_items(4, 5, rng, -1, 1);
  Binder bind(false);
  auto logits = d.discriminate_items(bind, ad::constant(v))->value;
  CHECK(logits.rows() == 4);
  CHECK(logits.cols() == 1);

  // single item
  Tensor one(1, 5);
  for (std::size_t c = 0; c < 5; ++c) one.at(0, c) = v.at(2, c);
  Binder b2(false);
  CHECK(d.discriminate_items(b2, ad::constant(one))->value.item() ==
        logits.at(2, 0));

  // duplicated rows give duplicated logits; reordering reorders them
  std::vector<std::size_t> perm{3, 3, 0, 2};
  Tensor dup(4, 5);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 5; ++c) dup.at(r, c) = v.at(perm[r], c);
  Binder b3(false);
  auto dup_logits = d.discriminate_items(b3, ad::constant(dup))->value;
  for (std::size_t r = 0; r < 4; ++r)
    CHECK(dup_logits.at(r, 0) == logits.at(perm[r], 0));
}

TEST_CASE("ensemble adversarial loss values") {
  Rng rng(10);
  // one discriminator with all-zero parameters outputs 0 everywhere
  DiscriminatorEnsemble zero =
      DiscriminatorEnsemble::init_items({3, 4}, 1, rng);
  zero.visit([](const std::string&, Tensor& t) {
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = 0.0;
  });
  Binder bind(true);
  std::vector<ad::NodePtr> src{ad::constant(random_items(2, 3, rng))};
  std::vector<ad::NodePtr> tgt{ad::constant(random_items(2, 3, rng))};
  auto loss = ensemble_adversarial_loss(zero, bind, src, tgt);
  CHECK(loss.value() == doctest::Approx(2.0 * std::log(2.0)));

  // five identical discriminators: five times the single loss
  Rng rng_a(11), rng_b(11);
  auto one_d = DiscriminatorEnsemble::init_items({3, 4}, 1, rng_a);
  DiscriminatorEnsemble five;
  five.kind = DiscriminatorEnsemble::Kind::item;
  for (int i = 0; i < 5; ++i) {
    Rng r(11);
    five.item_discs.push_back(ItemDiscriminator::init({3, 4}, r));
  }
  Binder b1(false), b5(false);
  const double single =
      ensemble_adversarial_loss(one_d, b1, src, tgt).value();
  const double quint =
      ensemble_adversarial_loss(five, b5, src, tgt).value();
  CHECK(quint == doctest::Approx(5.0 * single).epsilon(1e-12));

  CHECK_THROWS_AS(ensemble_adversarial_loss(zero, bind, {}, tgt),
                  std::invalid_argument);
  DiscriminatorEnsemble empty;
  CHECK_THROWS_AS(ensemble_adversarial_loss(empty, bind, src, tgt),
                  std::invalid_argument);
}

TEST_CASE("discriminator training separates two clusters") {
  Rng rng(12);
  auto ensemble = DiscriminatorEnsemble::init_items({2, 16}, 1, rng);
  auto make_cluster = [&](double center) {
    Tensor t(8, 2);
    for (std::size_t i = 0; i < t.numel(); ++i)
      t[i] = center + rng.uniform(-0.1, 0.1);
    return t;
  };
  std::vector<ad::NodePtr> src{ad::constant(make_cluster(-1.0))};
  std::vector<ad::NodePtr> tgt{ad::constant(make_cluster(1.0))};
  Binder warm(false);
  const double before =
      ensemble_adversarial_loss(ensemble, warm, src, tgt).value();
  for (int step = 0; step < 200; ++step) {
    Binder bind(true);
    auto loss = ensemble_adversarial_loss(ensemble, bind, src, tgt);
    ad::backward(loss.node);
    bind.apply_sgd(0.5);
  }
  Binder after_bind(false);
  const double after =
      ensemble_adversarial_loss(ensemble, after_bind, src, tgt).value();
  CHECK(after < before);
  CHECK(after < 0.2);  // separable clusters drive the loss toward 0
}

TEST_CASE("initialization is reproducible bit-exactly") {
  ScorerConfig cfg{4, 3, 16, 8};
  Rng a(77), b(77);
  auto ma = MLPScorer::init(cfg, a);
  auto mb = MLPScorer::init(cfg, b);
  bool equal = true;
  ma.visit([&](const std::string& name, Tensor& t) {
    mb.visit([&](const std::string& name2, Tensor& t2) {
      if (name == name2) equal = equal && t == t2;
    });
  });
  CHECK(equal);
}

TEST_CASE("checkpoint round trip is bit-exact") {
  Rng rng(13);
  ScorerConfig cfg{5, 2, 8, 4};
  auto m = MLPScorer::init(cfg, rng);
  // poke in awkward values
  m.w3[0] = 0x1.fffffffffffffp-3;
  m.w3[1] = -0.0;
  m.b3[0] = 1e-300;
  auto ck = scorer_checkpoint(m);
  std::ostringstream os;
  ck.write(os);
  std::istringstream is(os.str());
  auto back = Checkpoint::read(is);
  auto m2 = scorer_from_checkpoint(back);
  bool equal = true;
  m.visit([&](const std::string& name, Tensor& t) {
    equal = equal && back.tensor(name) == t;
  });
  CHECK(equal);
  std::ostringstream os2;
  scorer_checkpoint(m2).write(os2);
  CHECK(os2.str() == os.str());
}
