#include "ltrlab/data.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "ltrlab/bound.hpp"
#include "ltrlab/divergence.hpp"
#include "ltrlab/rng.hpp"

using namespace ltrlab;
using namespace ltrlab::data;

namespace {

Dataset random_dataset(Rng& rng, std::size_t n_lists = 5,
                       std::size_t feature_dim = 6) {
  Dataset ds;
  ds.feature_dim = feature_dim;
  for (std::size_t q = 0; q < n_lists; ++q) {
    metrics::RankedList l;
    l.list_id = std::to_string(q + 1);
    const std::size_t len = std::size_t(rng.uniform_int(1, 5));
    std::vector<double> labels;
    for (std::size_t i = 0; i < len; ++i) {
      std::vector<double> item(feature_dim);
      for (auto& v : item)
        v = rng.uniform() < 0.2 ? 0.0 : rng.uniform(-2, 2);
      l.items.push_back(std::move(item));
      labels.push_back(double(rng.uniform_int(0, 4)));
    }
    l.labels = labels;
    ds.lists.push_back(std::move(l));
  }
  return ds;
}

bool datasets_equal(const Dataset& a, const Dataset& b) {
  if (a.feature_dim != b.feature_dim || a.lists.size() != b.lists.size())
    return false;
  for (std::size_t i = 0; i < a.lists.size(); ++i) {
    const auto& x = a.lists[i];
    const auto& y = b.lists[i];
    if (x.list_id != y.list_id || x.items != y.items) return false;
    if (x.labels.has_value() != y.labels.has_value()) return false;
    if (x.labels && *x.labels != *y.labels) return false;
  }
  return true;
}

std::vector<Tensor> list_tensors(const Dataset& ds) {
  std::vector<Tensor> out;
  for (const auto& l : ds.lists) {
    Tensor t(l.items.size(), ds.feature_dim);
    for (std::size_t r = 0; r < l.items.size(); ++r)
      for (std::size_t c = 0; c < ds.feature_dim; ++c)
        t.at(r, c) = l.items[r][c];
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

TEST_CASE("letor parsing basics") {
  std::istringstream is("2 qid:7 1:0.5 3:1.0\n");
  auto ds = parse_letor(is);
  CHECK(ds.feature_dim == 3);
  REQUIRE(ds.lists.size() == 1);
  CHECK(ds.lists[0].list_id == "7");
  CHECK(ds.lists[0].items[0] == std::vector<double>{0.5, 0.0, 1.0});
  CHECK((*ds.lists[0].labels)[0] == 2.0);
}

TEST_CASE("letor parsing groups lines by qid preserving file order") {
  std::istringstream is(
      "0 qid:b 1:1\n"
      "1 qid:a 1:2\n"
      "2 qid:b 1:3 # trailing comment\n");
  auto ds = parse_letor(is);
  REQUIRE(ds.lists.size() == 2);
  CHECK(ds.lists[0].list_id == "b");
  CHECK(ds.lists[0].items.size() == 2);
  CHECK((*ds.lists[0].labels) == std::vector<double>{0.0, 2.0});
  CHECK(ds.lists[1].list_id == "a");
}

TEST_CASE("letor parsing: empty file, malformed lines") {
  std::istringstream empty("");
  CHECK(parse_letor(empty).lists.empty());

  auto expect_line_error = [](const std::string& text, const char* frag) {
    std::istringstream is(text);
    try {
      parse_letor(is);
      FAIL_CHECK("expected error for: " << text);
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("line 1") != std::string::npos);
      CHECK(std::string(e.what()).find(frag) != std::string::npos);
    }
  };
  expect_line_error("x qid:1 1:0\n", "grade");
  expect_line_error("-1 qid:1 1:0\n", "grade");
  expect_line_error("1.5 qid:1 1:0\n", "grade");
  expect_line_error("1 1:0\n", "qid");
  expect_line_error("1 qid:1 2:0 2:1\n", "strictly increasing");
  expect_line_error("1 qid:1 3:0 2:1\n", "strictly increasing");
  expect_line_error("1 qid:1 0:1\n", "1-based");
  expect_line_error("1 qid:1 1:zz\n", "feature value");
}

TEST_CASE("letor round trip on random datasets") {
  Rng rng(314);
  for (int trial = 0; trial < 30; ++trial) {
    auto ds = random_dataset(rng);
    std::ostringstream os;
    write_letor(ds, os);
    std::istringstream is(os.str());
    auto back = parse_letor(is);
    // written densely, so the max feature id survives even if a trailing
    // column is all zeros only when some row uses it; compare per list
    REQUIRE(datasets_equal(ds, back));
    // writing again is byte-identical
    std::ostringstream os2;
    write_letor(back, os2);
    CHECK(os2.str() == os.str());
  }
}

TEST_CASE("letor writer wants integer grades") {
  Dataset ds;
  ds.feature_dim = 1;
  metrics::RankedList l;
  l.list_id = "1";
  l.items = {{0.5}};
  l.labels = std::vector<double>{0.25};
  ds.lists.push_back(l);
  std::ostringstream os;
  CHECK_THROWS_AS(write_letor(ds, os), std::invalid_argument);
}

TEST_CASE("manifest feature splits and model input ordering") {
  Dataset ds;
  ds.feature_dim = 4;
  metrics::RankedList l;
  l.list_id = "q";
  l.items = {{10, 20, 30, 40}};
  l.labels = std::vector<double>{1};
  ds.lists.push_back(l);

  std::istringstream manifest("shared = 2,4\ndisjoint = 1,3\n");
  apply_manifest(ds, kv::parse(manifest));
  CHECK(ds.shared_idx == std::vector<std::size_t>{1, 3});
  CHECK(ds.disjoint_idx == std::vector<std::size_t>{0, 2});
  CHECK(ds.shared_width() == 2);
  CHECK(ds.disjoint_width() == 2);

  Tensor in = model_input(ds, ds.lists[0]);
  CHECK(in.at(0, 0) == 20);
  CHECK(in.at(0, 1) == 40);
  CHECK(in.at(0, 2) == 10);
  CHECK(in.at(0, 3) == 30);

  std::istringstream bad("shared = 9\n");
  CHECK_THROWS_AS(apply_manifest(ds, kv::parse(bad)), std::runtime_error);
}

TEST_CASE("synthetic generation is deterministic per seed") {
  SyntheticSpec spec;
  spec.seed = 42;
  spec.shift = ShiftKind::affine;
  spec.rotation_angle = 0.7;
  spec.translation_scale = 0.3;
  auto a = generate_synthetic(spec);
  auto b = generate_synthetic(spec);
  CHECK(datasets_equal(a.source, b.source));
  CHECK(datasets_equal(a.target, b.target));
  CHECK(a.truth.l_y == b.truth.l_y);
  spec.seed = 43;
  auto c = generate_synthetic(spec);
  CHECK(!datasets_equal(a.source, c.source));
}

TEST_CASE("shift=none: list W1 shrinks with sample size") {
  // low dimension so the empirical W1 visibly decays over a 16x sample jump
  SyntheticSpec small;
  small.shift = ShiftKind::none;
  small.n_lists = 8;
  small.list_len = 2;
  small.feature_dim = 2;
  small.seed = 5;
  SyntheticSpec big = small;
  big.n_lists = 128;
  auto ds_small = generate_synthetic(small);
  auto ds_big = generate_synthetic(big);
  const double w1_small = ot::wasserstein1_exact(
      ot::list_level_dist(list_tensors(ds_small.source)),
      ot::list_level_dist(list_tensors(ds_small.target)));
  const double w1_big = ot::wasserstein1_exact(
      ot::list_level_dist(list_tensors(ds_big.source)),
      ot::list_level_dist(list_tensors(ds_big.target)));
  CHECK(w1_big < w1_small);
  // flattened lists live in R^32; empirical W1 decays slowly there, so only
  // expect it well under the typical inter-point distance
  CHECK(w1_big < 0.75 * w1_small);
}

TEST_CASE("listwise_correlation: item marginals match, list structure differs") {
  SyntheticSpec spec;
  spec.shift = ShiftKind::listwise_correlation;
  spec.n_lists = 32;
  spec.list_len = 4;
  spec.seed = 9;
  auto dsd = generate_synthetic(spec);
  const double item_w1 = ot::wasserstein1_exact(
      ot::item_level_dist(list_tensors(dsd.source)),
      ot::item_level_dist(list_tensors(dsd.target)));
  CHECK(item_w1 == 0.0);
  const double list_w1 = ot::wasserstein1_exact(
      ot::list_level_dist(list_tensors(dsd.source)),
      ot::list_level_dist(list_tensors(dsd.target)));
  CHECK(list_w1 > 0.1);
  CHECK(dsd.truth.item_w1_flag == "zero");
  CHECK(dsd.truth.list_w1_flag == "positive");

  SyntheticSpec odd = spec;
  odd.n_lists = 31;
  CHECK_THROWS_AS(generate_synthetic(odd), std::invalid_argument);
}

TEST_CASE("affine shift: inverse shift reproduces target labels") {
  SyntheticSpec spec;
  spec.shift = ShiftKind::affine;
  spec.rotation_angle = 1.1;
  spec.translation_scale = 0.6;
  spec.n_lists = 16;
  spec.seed = 21;
  auto dsd = generate_synthetic(spec);
  for (const auto& list : dsd.target.lists) {
    std::vector<std::vector<double>> recovered;
    for (const auto& x : list.items)
      recovered.push_back(data::invert_affine(
          x, spec.rotation_angle, spec.translation_scale));
    const auto labels = data::label_list(recovered, dsd.truth);
    for (std::size_t i = 0; i < labels.size(); ++i)
      CHECK(labels[i] ==
            doctest::Approx((*list.labels)[i]).epsilon(1e-9));
  }
}

TEST_CASE("label map Lipschitz constant matches the power-iteration oracle") {
  Rng rng(777);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t l = std::size_t(rng.uniform_int(2, 5));
    const std::size_t p = std::size_t(rng.uniform_int(2, 6));
    std::vector<double> w(p), c(p);
    for (auto& v : w) v = rng.uniform(-1, 1);
    for (auto& v : c) v = rng.uniform(-1, 1);
    const double a = rng.uniform(-1, 1);
    // explicit pre-clip matrix A: row i maps flattened lists to label i
    Tensor A(l, l * p);
    for (std::size_t i = 0; i < l; ++i)
      for (std::size_t j = 0; j < l; ++j)
        for (std::size_t f = 0; f < p; ++f)
          A.at(i, j * p + f) =
              (i == j ? w[f] : 0.0) + a / double(l) * c[f];
    CHECK(label_map_lipschitz(w, c, a) ==
          doctest::Approx(bound::spectral_norm(A, 20000)).epsilon(1e-4));
  }
}

TEST_CASE("synthetic labels are nonnegative with at least one positive") {
  for (auto shift : {ShiftKind::none, ShiftKind::affine,
                     ShiftKind::listwise_correlation}) {
    SyntheticSpec spec;
    spec.shift = shift;
    spec.n_lists = 24;
    spec.seed = 3;
    auto dsd = generate_synthetic(spec);
    for (const auto* ds : {&dsd.source, &dsd.target})
      for (const auto& l : ds->lists) {
        double best = 0.0;
        for (double y : *l.labels) {
          CHECK(y >= 0.0);
          best = std::max(best, y);
        }
        CHECK(best > 0.0);
      }
  }
}

TEST_CASE("label quantization to integer grades") {
  SyntheticSpec spec;
  spec.n_lists = 8;
  auto dsd = generate_synthetic(spec);
  auto q = quantize_labels(dsd.source, 5, spec.y_max);
  for (const auto& l : q.lists)
    for (double y : *l.labels) {
      CHECK(y == std::floor(y));
      CHECK(y >= 0.0);
      CHECK(y <= 4.0);
    }
  std::ostringstream os;
  write_letor(q, os);  // integer grades now accepted
  CHECK(!os.str().empty());
}

TEST_CASE("training list construction") {
  Rng rng(55);
  CandidatePool tiny;
  tiny.query_id = "q0";
  tiny.candidates = {{1.0}, {2.0}};
  tiny.positives = {0};
  auto list = build_training_list(tiny, 2, 300, rng);
  CHECK(list.items == std::vector<std::vector<double>>{{1.0}, {2.0}});
  CHECK(*list.labels == std::vector<double>{1.0, 0.0});

  // default length 31 with exactly one positive and no duplicates
  CandidatePool pool;
  pool.query_id = "q1";
  for (int i = 0; i < 400; ++i) pool.candidates.push_back({double(i)});
  pool.positives = {7};
  for (int trial = 0; trial < 10; ++trial) {
    auto l = build_training_list(pool, kDefaultTrainListLen, 0, rng);
    CHECK(l.items.size() == 31);
    double positives = 0.0;
    for (double y : *l.labels) positives += y;
    CHECK(positives == 1.0);
    std::set<std::vector<double>> unique(l.items.begin(), l.items.end());
    CHECK(unique.size() == l.items.size());
  }

  // with a supplied ranking, sampled negatives sit strictly below the cutoff
  pool.ranking = std::vector<std::size_t>{};
  for (std::size_t i = 0; i < 400; ++i) pool.ranking->push_back(i);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng r(seed);
    auto l = build_training_list(pool, 31, kDefaultNegativeRankCutoff, r);
    for (std::size_t i = 1; i < l.items.size(); ++i) {
      // candidate id doubles as its value; rank position == id + 1 here
      CHECK(l.items[i][0] >= 300.0);
    }
  }

  CandidatePool starved;
  starved.query_id = "q-starved";
  starved.candidates = {{0.0}, {1.0}};
  starved.positives = {0};
  try {
    build_training_list(starved, 5, 0, rng);
    FAIL_CHECK("expected error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("q-starved") != std::string::npos);
  }

  CandidatePool no_pos;
  no_pos.query_id = "q2";
  no_pos.candidates = {{0.0}};
  CHECK_THROWS_AS(build_training_list(no_pos, 1, 0, rng),
                  std::invalid_argument);
}

TEST_CASE("synthetic spec from kv") {
  std::istringstream is(
      "list_len = 5\nfeature_dim = 3\nn_lists = 10\nshift = affine\n"
      "rotation_angle = 0.5\ntranslation_scale = 0.25\nseed = 99\n");
  auto spec = SyntheticSpec::from_kv(kv::parse(is));
  CHECK(spec.list_len == 5);
  CHECK(spec.feature_dim == 3);
  CHECK(spec.n_lists == 10);
  CHECK(spec.shift == ShiftKind::affine);
  CHECK(spec.rotation_angle == 0.5);
  CHECK(spec.seed == 99);

  std::istringstream bad("shift = sideways\n");
  CHECK_THROWS_AS(SyntheticSpec::from_kv(kv::parse(bad)),
                  std::invalid_argument);
}

TEST_CASE("unsupervised view strips labels") {
  Rng rng(1);
  auto ds = random_dataset(rng);
  auto view = ds.without_labels();
  for (const auto& l : view.lists) CHECK(!l.labels.has_value());
  CHECK(ds.lists[0].labels.has_value());  // original untouched
}
