// ltrlab command-line front end: synthetic data generation, adversarial
// domain-adaptation training (zero_shot / item_da / list_da), evaluation,
// method comparison with paired t-tests, and the generalization-bound
// report. Every command is deterministic given (config, seed) and leaves a
// run manifest in its output directory.
//
// Exit codes: 0 success, 2 usage/config error, 3 numerical abort.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ltrlab/bound.hpp"
#include "ltrlab/data.hpp"
#include "ltrlab/divergence.hpp"
#include "ltrlab/kv.hpp"
#include "ltrlab/metrics.hpp"
#include "ltrlab/models.hpp"
#include "ltrlab/trainer.hpp"

namespace fs = std::filesystem;
using namespace ltrlab;

namespace {

constexpr const char* kVersion = "ltrlab 1.0.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path prepare_out_dir(const std::string& out, bool force) {
  fs::path dir(out);
  if (fs::exists(dir)) {
    if (!force)
      throw UsageError("output directory " + out +
                       " already exists (use --force to reuse)");
    if (!fs::is_directory(dir))
      throw UsageError("output path " + out + " is not a directory");
    return dir;
  }
  std::error_code ec;
  if (!fs::create_directories(dir, ec))
    throw UsageError("cannot create output directory " + out + ": " +
                     ec.message());
  return dir;
}

void write_run_manifest(const fs::path& dir, const std::string& command,
                        const std::vector<std::pair<std::string, std::string>>&
                            inputs,
                        std::uint64_t seed) {
  std::vector<std::pair<std::string, std::string>> rows;
  rows.emplace_back("version", kVersion);
  rows.emplace_back("command", command);
  rows.emplace_back("seed", std::to_string(seed));
  for (const auto& [k, v] : inputs) rows.emplace_back(k, v);
  kv::write_file((dir / "run_manifest.txt").string(), rows);
}

data::Dataset load_dataset(const std::string& letor_path,
                           const std::string& manifest_path) {
  auto ds = data::parse_letor_file(letor_path);
  if (!manifest_path.empty())
    data::apply_manifest(ds, kv::parse_file(manifest_path));
  ds.validate();
  return ds;
}

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const std::string t = kv::trim(tok);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

// --cutoff k1,k2 appends @k variants of every cutoff-capable base metric.
std::vector<std::string> expand_metrics(const std::string& metrics_csv,
                                        const std::string& cutoff_csv) {
  auto names = split_csv(metrics_csv);
  for (const auto& k : split_csv(cutoff_csv))
    for (const auto& m : split_csv(metrics_csv))
      if ((m == "ndcg" || m == "mrr" || m == "rr"))
        names.push_back(m + "@" + k);
  return names;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string spec_path, out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t eval_lists = 0;
  std::size_t label_grades = 5;
  bool force = false;
};

int cmd_gen(const GenArgs& a) {
  if (!fs::exists(a.spec_path))
    throw UsageError("spec file not found: " + a.spec_path);
  auto spec = data::SyntheticSpec::from_kv(kv::parse_file(a.spec_path));
  if (a.seed_set) spec.seed = a.seed;
  const auto dir = prepare_out_dir(a.out, a.force);

  auto dsd = data::generate_synthetic(spec);
  auto write_domain = [&](const data::Dataset& ds, const std::string& stem) {
    data::write_letor_file(
        data::quantize_labels(ds, a.label_grades, spec.y_max),
        (dir / (stem + ".letor")).string());
  };
  write_domain(dsd.source, "source_train");
  write_domain(dsd.target, "target_train");
  if (a.eval_lists > 0) {
    auto eval_spec = spec;
    eval_spec.n_lists = a.eval_lists;
    eval_spec.seed = spec.seed + 0x9e3779b9u;  // disjoint stream
    auto eval = data::generate_synthetic(eval_spec);
    write_domain(eval.source, "source_eval");
    write_domain(eval.target, "target_eval");
  }

  // feature-split manifest: synthetic features are all shared
  std::string all_ids;
  for (std::size_t i = 1; i <= spec.feature_dim; ++i)
    all_ids += (i > 1 ? "," : "") + std::to_string(i);
  kv::write_file((dir / "feature_manifest.txt").string(),
                 {{"shared", all_ids}, {"disjoint", ""}});

  auto truth_rows = dsd.truth.to_kv();
  truth_rows.emplace_back("label_grades", std::to_string(a.label_grades));
  kv::write_file((dir / "truth.txt").string(), truth_rows);

  write_run_manifest(dir, "gen", {{"spec", a.spec_path}}, spec.seed);
  std::cout << "gen: wrote " << dir.string() << " (shift "
            << data::shift_name(spec.shift) << ", " << spec.n_lists
            << " lists/domain)\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string config_path;
  std::string source, target;
  std::string source_manifest, target_manifest;
  std::string eval_source, eval_target;
  std::string out;
  std::string mode, loss;
  double lambda = -1, eta_rank = -1, eta_ad = -1;
  long steps = -1, batch_size = -1, ensemble = -1;
  long decay_every = -1;
  double decay_factor = -1;
  long hidden = -1, feature_dim = -1, disc_hidden = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string metrics_csv = "ndcg,ndcg@5,mrr@10,map";
  std::string cutoffs;
  int positive_min = 1;
  long eval_every = 0;
  std::string grid_lambda, grid_eta_ad;
  bool force = false;
};

trainer::TrainConfig config_from(const TrainArgs& a) {
  trainer::TrainConfig cfg;
  if (!a.config_path.empty()) {
    auto kvs = kv::parse_file(a.config_path);
    auto get = [&](const char* k) -> const std::string* {
      auto it = kvs.find(k);
      return it == kvs.end() ? nullptr : &it->second;
    };
    if (auto* v = get("mode")) cfg.mode = trainer::mode_from_name(*v);
    if (auto* v = get("lambda")) cfg.lambda = std::stod(*v);
    if (auto* v = get("eta_rank")) cfg.eta_rank = std::stod(*v);
    if (auto* v = get("eta_ad")) cfg.eta_ad = std::stod(*v);
    if (auto* v = get("decay_factor")) cfg.decay_factor = std::stod(*v);
    if (auto* v = get("decay_every")) cfg.decay_every = std::stoul(*v);
    if (auto* v = get("steps")) cfg.steps = std::stoul(*v);
    if (auto* v = get("batch_size")) cfg.batch_size = std::stoul(*v);
    if (auto* v = get("ensemble_size")) cfg.ensemble_size = std::stoul(*v);
    if (auto* v = get("loss")) cfg.loss = trainer::loss_from_name(*v);
    if (auto* v = get("seed")) cfg.seed = std::stoull(*v);
    if (auto* v = get("hidden")) cfg.hidden = std::stoul(*v);
    if (auto* v = get("feature_dim")) cfg.feature_dim = std::stoul(*v);
    if (auto* v = get("disc_hidden")) cfg.disc_hidden = std::stoul(*v);
    if (auto* v = get("attention")) cfg.attention = *v == "true" || *v == "1";
  }
  // flags override file values
  if (!a.mode.empty()) cfg.mode = trainer::mode_from_name(a.mode);
  if (!a.loss.empty()) cfg.loss = trainer::loss_from_name(a.loss);
  if (a.lambda >= 0) cfg.lambda = a.lambda;
  if (a.eta_rank >= 0) cfg.eta_rank = a.eta_rank;
  if (a.eta_ad >= 0) cfg.eta_ad = a.eta_ad;
  if (a.steps >= 0) cfg.steps = std::size_t(a.steps);
  if (a.batch_size >= 0) cfg.batch_size = std::size_t(a.batch_size);
  if (a.ensemble >= 0) cfg.ensemble_size = std::size_t(a.ensemble);
  if (a.decay_every >= 0) cfg.decay_every = std::size_t(a.decay_every);
  if (a.decay_factor >= 0) cfg.decay_factor = a.decay_factor;
  if (a.hidden >= 0) cfg.hidden = std::size_t(a.hidden);
  if (a.feature_dim >= 0) cfg.feature_dim = std::size_t(a.feature_dim);
  if (a.disc_hidden >= 0) cfg.disc_hidden = std::size_t(a.disc_hidden);
  if (a.seed_set) cfg.seed = a.seed;
  return cfg;
}

void run_one_training(const trainer::TrainConfig& cfg,
                      const data::Dataset& source,
                      const std::optional<data::Dataset>& target,
                      const TrainArgs& a, const fs::path& dir) {
  trainer::EvalPlan plan;
  std::optional<data::Dataset> eval_src, eval_tgt;
  if (a.eval_every > 0) {
    plan.every = std::size_t(a.eval_every);
    plan.metrics = expand_metrics(a.metrics_csv, a.cutoffs);
    plan.positive_min = a.positive_min;
    if (!a.eval_source.empty()) {
      eval_src = load_dataset(a.eval_source, a.source_manifest);
      plan.source = &*eval_src;
    }
    if (!a.eval_target.empty()) {
      eval_tgt = load_dataset(a.eval_target, a.target_manifest);
      plan.target = &*eval_tgt;
    }
  }
  auto result = trainer::train(source, target, cfg, plan);
  if (!result.evals.empty()) {
    std::ofstream os(dir / "evals.tsv");
    os << "step\tdomain\tmetric\tmean\n";
    for (const auto& e : result.evals)
      os << e.step << '\t' << e.domain << '\t' << e.metric << '\t'
         << metrics::MetricReport::format_value(e.mean) << '\n';
  }

  models::Checkpoint ck = models::scorer_checkpoint(result.scorer);
  ck.set_meta("mode", trainer::mode_name(cfg.mode));
  ck.set_meta("seed", std::to_string(cfg.seed));
  result.discs.visit([&](const std::string& name, Tensor& t) {
    ck.add_tensor(name, t);
  });
  ck.save((dir / "checkpoint.txt").string());

  std::ofstream log(dir / "train_log.tsv");
  trainer::write_training_log(result.log, log);

  const auto metric_names = expand_metrics(a.metrics_csv, a.cutoffs);
  auto eval_to = [&](const std::string& path, const std::string& manifest,
                     const std::string& stem) {
    if (path.empty()) return;
    auto ds = load_dataset(path, manifest);
    auto rep =
        trainer::evaluate(result.scorer, ds, metric_names, a.positive_min);
    std::ofstream os(dir / (stem + ".tsv"));
    rep.write_tsv(os);
    std::cout << "  " << stem << ":";
    for (const auto& [metric, mean] : rep.means())
      std::cout << ' ' << metric << '=' << std::setprecision(4) << mean;
    std::cout << '\n';
  };
  eval_to(a.eval_source, a.source_manifest, "eval_source");
  eval_to(a.eval_target, a.target_manifest, "eval_target");
}

int cmd_train(const TrainArgs& a) {
  auto base_cfg = config_from(a);
  base_cfg.validate();
  if (a.source.empty()) throw UsageError("train: --source is required");
  auto source = load_dataset(a.source, a.source_manifest);
  std::optional<data::Dataset> target;
  if (!a.target.empty())
    target = load_dataset(a.target, a.target_manifest);
  if (base_cfg.mode != trainer::Mode::zero_shot && !target)
    throw UsageError("train: mode " + trainer::mode_name(base_cfg.mode) +
                     " requires --target");

  const auto dir = prepare_out_dir(a.out, a.force);
  write_run_manifest(dir, "train",
                     {{"config", a.config_path},
                      {"source", a.source},
                      {"target", a.target},
                      {"mode", trainer::mode_name(base_cfg.mode)}},
                     base_cfg.seed);

  const auto lambdas = a.grid_lambda.empty()
                           ? std::vector<std::string>{}
                           : split_csv(a.grid_lambda);
  const auto etas = a.grid_eta_ad.empty() ? std::vector<std::string>{}
                                          : split_csv(a.grid_eta_ad);
  if (lambdas.empty() && etas.empty()) {
    std::cout << "train: mode " << trainer::mode_name(base_cfg.mode) << ", "
              << base_cfg.steps << " steps\n";
    run_one_training(base_cfg, source, target, a, dir);
    return 0;
  }
  // grid driver: one subdirectory per (lambda, eta_ad) point, run serially;
  // parallel execution is separate CLI invocations with disjoint --out
  const auto lam_list =
      lambdas.empty() ? std::vector<std::string>{""} : lambdas;
  const auto eta_list = etas.empty() ? std::vector<std::string>{""} : etas;
  for (const auto& lam : lam_list)
    for (const auto& eta : eta_list) {
      auto cfg = base_cfg;
      std::string stem = "grid";
      if (!lam.empty()) {
        cfg.lambda = std::stod(lam);
        stem += "_lambda" + lam;
      }
      if (!eta.empty()) {
        cfg.eta_ad = std::stod(eta);
        stem += "_etaad" + eta;
      }
      cfg.validate();
      const auto subdir = dir / stem;
      fs::create_directories(subdir);
      std::cout << "train[" << stem << "]:\n";
      run_one_training(cfg, source, target, a, subdir);
    }
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint, dataset, manifest, out;
  std::string metrics_csv = "ndcg,ndcg@5,mrr@10,map";
  std::string cutoffs;
  int positive_min = 1;
  bool force = false;
};

int cmd_eval(const EvalArgs& a) {
  auto ck = models::Checkpoint::load(a.checkpoint);
  auto scorer = models::scorer_from_checkpoint(ck);
  auto ds = load_dataset(a.dataset, a.manifest);
  auto rep = trainer::evaluate(scorer, ds,
                               expand_metrics(a.metrics_csv, a.cutoffs),
                               a.positive_min);
  if (!a.out.empty()) {
    const auto dir = prepare_out_dir(a.out, a.force);
    std::ofstream os(dir / "eval_report.tsv");
    rep.write_tsv(os);
    write_run_manifest(dir, "eval",
                       {{"checkpoint", a.checkpoint}, {"data", a.dataset}},
                       0);
  }
  for (const auto& [metric, mean] : rep.means())
    std::cout << metric << "\t" << metrics::MetricReport::format_value(mean)
              << "\n";
  for (const auto& [metric, count] : rep.skipped)
    std::cout << "# skipped\t" << metric << "\t" << count << "\n";
  if (a.out.empty()) {
    std::cout << "---\n";
    rep.write_tsv(std::cout);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct CompareArgs {
  std::string report_a, report_b, out;
  double alpha = 0.05;
  bool force = false;
};

int cmd_compare(const CompareArgs& a) {
  auto load = [](const std::string& path) {
    std::ifstream is(path);
    if (!is) throw UsageError("cannot open report " + path);
    return metrics::MetricReport::from_tsv(is);
  };
  const auto rep_a = load(a.report_a);
  const auto rep_b = load(a.report_b);

  std::ostringstream table;
  table << "metric\tn\tmean_a\tmean_b\tdiff\tt\tp\tsignificant\n";
  auto fmt = metrics::MetricReport::format_value;
  for (const auto& metric : rep_a.metric_names()) {
    const auto by_a = rep_a.by_list(metric);
    const auto by_b = rep_b.by_list(metric);
    std::vector<double> va, vb;
    for (const auto& [id, v] : by_a) {
      auto it = by_b.find(id);
      if (it == by_b.end()) continue;
      va.push_back(v);
      vb.push_back(it->second);
    }
    if (va.size() < 2) continue;
    double mean_a = 0, mean_b = 0;
    for (double v : va) mean_a += v;
    for (double v : vb) mean_b += v;
    mean_a /= double(va.size());
    mean_b /= double(vb.size());
    table << metric << '\t' << va.size() << '\t' << fmt(mean_a) << '\t'
          << fmt(mean_b) << '\t' << fmt(mean_a - mean_b) << '\t';
    try {
      const auto res = metrics::paired_t_test(va, vb);
      table << fmt(res.t) << '\t' << fmt(res.p) << '\t'
            << (res.p <= a.alpha ? "yes" : "no") << '\n';
    } catch (const std::invalid_argument&) {
      table << "-\t-\tnot comparable\n";  // zero-variance differences
    }
  }
  std::cout << table.str();
  if (!a.out.empty()) {
    const auto dir = prepare_out_dir(a.out, a.force);
    std::ofstream os(dir / "compare.tsv");
    os << table.str();
    write_run_manifest(dir, "compare",
                       {{"report_a", a.report_a}, {"report_b", a.report_b}},
                       0);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct BoundArgs {
  std::string checkpoint, source, target;
  std::string source_manifest, target_manifest;
  std::string truth_path;
  std::string metric = "ndcg";
  double l_y = -1;
  long lambda_budget = 400;
  double lambda_lr = 0.5;
  std::string out;
  bool force = false;
};

int cmd_bound(const BoundArgs& a) {
  auto ck = models::Checkpoint::load(a.checkpoint);
  auto scorer = models::scorer_from_checkpoint(ck);
  auto source = load_dataset(a.source, a.source_manifest);
  auto target = load_dataset(a.target, a.target_manifest);
  const pl::Util util = pl::util_from_name(a.metric);

  bound::BoundConfig cfg;
  cfg.lambda_star.budget = std::size_t(a.lambda_budget);
  cfg.lambda_star.lr = a.lambda_lr;
  if (a.l_y >= 0) {
    cfg.l_y = a.l_y;
    cfg.l_y_is_truth = true;
  } else if (!a.truth_path.empty()) {
    auto truth = kv::parse_file(a.truth_path);
    auto it = truth.find("l_y");
    if (it == truth.end())
      throw UsageError("truth file " + a.truth_path + " has no l_y key");
    cfg.l_y = std::stod(it->second);
    cfg.l_y_is_truth = true;
  } else {
    cfg.l_y_is_truth = false;  // exact on the empirical support
  }

  if (util == pl::Util::rr) {
    // RR needs binary ground truth
    auto binarize_ds = [&](data::Dataset& ds) {
      for (auto& l : ds.lists)
        if (l.labels) l.labels = metrics::binarize(*l.labels, 1);
    };
    binarize_ds(source);
    binarize_ds(target);
  }

  auto rep = bound::compute_bound_report(scorer, source, target, util, cfg);
  rep.write_tsv(std::cout);
  if (!a.out.empty()) {
    const auto dir = prepare_out_dir(a.out, a.force);
    std::ofstream os(dir / "bound_report.tsv");
    rep.write_tsv(os);
    std::ofstream js(dir / "bound_report.json");
    js << rep.to_json().dump(2) << '\n';
    write_run_manifest(dir, "bound",
                       {{"checkpoint", a.checkpoint},
                        {"source", a.source},
                        {"target", a.target},
                        {"metric", a.metric}},
                       0);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kVersion) +
               " - list-level domain adaptation for ranking, desk scale"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* sgen = app.add_subcommand("gen", "generate synthetic datasets");
  sgen->add_option("--spec", gen.spec_path, "synthetic spec (key = value)")
      ->required();
  sgen->add_option("--out", gen.out, "output directory")->required();
  sgen->add_option("--seed", gen.seed, "seed override")
      ->each([&gen](const std::string&) { gen.seed_set = true; });
  sgen->add_option("--eval-lists", gen.eval_lists,
                   "also write held-out datasets with this many lists");
  sgen->add_option("--label-grades", gen.label_grades,
                   "integer grade levels written to LETOR files");
  sgen->add_flag("--force", gen.force, "reuse an existing output directory");

  TrainArgs tr;
  auto* strain = app.add_subcommand("train", "train a scorer");
  strain->add_option("--config", tr.config_path, "key = value config file");
  strain->add_option("--source", tr.source, "source LETOR file")->required();
  strain->add_option("--target", tr.target, "target LETOR file");
  strain->add_option("--source-manifest", tr.source_manifest,
                     "feature-split manifest for source");
  strain->add_option("--target-manifest", tr.target_manifest,
                     "feature-split manifest for target");
  strain->add_option("--eval-source", tr.eval_source,
                     "held-out source LETOR for the final report");
  strain->add_option("--eval-target", tr.eval_target,
                     "held-out target LETOR for the final report");
  strain->add_option("--out", tr.out, "output directory")->required();
  strain->add_option("--mode", tr.mode, "zero_shot | item_da | list_da");
  strain->add_option("--loss", tr.loss, "softmax_ce | pairwise_logistic");
  strain->add_option("--lambda", tr.lambda, "adversarial strength");
  strain->add_option("--eta-rank", tr.eta_rank, "scorer learning rate");
  strain->add_option("--eta-ad", tr.eta_ad, "discriminator learning rate");
  strain->add_option("--steps", tr.steps, "training steps");
  strain->add_option("--batch-size", tr.batch_size, "lists per domain/step");
  strain->add_option("--ensemble-size", tr.ensemble, "discriminator count");
  strain->add_option("--decay-every", tr.decay_every, "lr decay period");
  strain->add_option("--decay-factor", tr.decay_factor, "lr decay factor");
  strain->add_option("--hidden", tr.hidden, "scorer branch hidden width");
  strain->add_option("--feature-dim", tr.feature_dim, "feature dimension k");
  strain->add_option("--disc-hidden", tr.disc_hidden,
                     "discriminator hidden width");
  strain->add_option("--seed", tr.seed, "seed")
      ->each([&tr](const std::string&) { tr.seed_set = true; });
  strain->add_option("--metric", tr.metrics_csv,
                     "evaluation metrics, comma separated");
  strain->add_option("--cutoff", tr.cutoffs,
                     "extra @k cutoffs applied to every cutoff-capable metric");
  strain->add_option("--eval-every", tr.eval_every,
                     "evaluate held-out sets every N steps into evals.tsv");
  strain->add_option("--positive-min", tr.positive_min,
                     "grade threshold for binary metrics");
  strain->add_option("--grid-lambda", tr.grid_lambda,
                     "comma list: run one training per lambda");
  strain->add_option("--grid-eta-ad", tr.grid_eta_ad,
                     "comma list: run one training per eta_ad");
  strain->add_flag("--force", tr.force, "reuse an existing output directory");

  EvalArgs ev;
  auto* seval = app.add_subcommand("eval", "evaluate a checkpoint");
  seval->add_option("--checkpoint", ev.checkpoint)->required();
  seval->add_option("--data", ev.dataset, "LETOR file")->required();
  seval->add_option("--manifest", ev.manifest, "feature-split manifest");
  seval->add_option("--metric", ev.metrics_csv,
                    "metrics with optional @k cutoffs, comma separated");
  seval->add_option("--cutoff", ev.cutoffs,
                    "extra @k cutoffs applied to every cutoff-capable metric");
  seval->add_option("--positive-min", ev.positive_min,
                    "grade threshold for binary metrics");
  seval->add_option("--out", ev.out, "output directory (optional)");
  seval->add_flag("--force", ev.force, "reuse an existing output directory");

  CompareArgs cmp;
  auto* scomp = app.add_subcommand(
      "compare", "paired t-test between two metric reports");
  scomp->add_option("--a", cmp.report_a, "report A (tsv)")->required();
  scomp->add_option("--b", cmp.report_b, "report B (tsv)")->required();
  scomp->add_option("--alpha", cmp.alpha, "significance level");
  scomp->add_option("--out", cmp.out, "output directory (optional)");
  scomp->add_flag("--force", cmp.force, "reuse an existing output directory");

  BoundArgs bd;
  auto* sbound = app.add_subcommand("bound", "generalization-bound report");
  sbound->add_option("--checkpoint", bd.checkpoint)->required();
  sbound->add_option("--source", bd.source, "labeled source LETOR")
      ->required();
  sbound->add_option("--target", bd.target, "labeled target LETOR")
      ->required();
  sbound->add_option("--source-manifest", bd.source_manifest);
  sbound->add_option("--target-manifest", bd.target_manifest);
  sbound->add_option("--metric", bd.metric, "rr | ndcg");
  sbound->add_option("--l-y", bd.l_y, "known label Lipschitz constant");
  sbound->add_option("--truth", bd.truth_path,
                     "truth file from gen (reads l_y)");
  sbound->add_option("--lambda-budget", bd.lambda_budget,
                     "head-training steps for the lambda* upper bound");
  sbound->add_option("--lambda-lr", bd.lambda_lr, "head-training step size");
  sbound->add_option("--out", bd.out, "output directory (optional)");
  sbound->add_flag("--force", bd.force, "reuse an existing output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (sgen->parsed()) return cmd_gen(gen);
    if (strain->parsed()) return cmd_train(tr);
    if (seval->parsed()) return cmd_eval(ev);
    if (scomp->parsed()) return cmd_compare(cmp);
    if (sbound->parsed()) return cmd_bound(bd);
  } catch (const trainer::NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
