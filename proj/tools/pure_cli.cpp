#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pure/checkpoint.hpp"
#include "pure/config.hpp"
#include "pure/metrics.hpp"
#include "pure/ratings_io.hpp"
#include "pure/theory.hpp"
#include "pure/training.hpp"

namespace fs = std::filesystem;
using namespace pure;

namespace {

// The config file and dataset-name defaults must be layered under the flag
// values, so those two are pre-scanned before CLI11 parses the rest.
std::string scan_flag(int argc, char** argv, const std::string& name) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == name && i + 1 < argc) return argv[i + 1];
    if (a.rfind(name + "=", 0) == 0) return a.substr(name.size() + 1);
  }
  return "";
}

RunConfig base_config(int argc, char** argv) {
  const std::string config_path = scan_flag(argc, argv, "--config");
  RunConfig probe;
  if (!config_path.empty()) probe.apply_file(config_path);

  std::string name = scan_flag(argc, argv, "--dataset-name");
  if (name.empty()) name = probe.dataset_name;
  if (name.empty()) {
    std::string ds = scan_flag(argc, argv, "--dataset");
    if (ds.empty()) ds = probe.dataset;
    name = infer_dataset_name(ds);
  }

  RunConfig cfg;
  cfg.apply_dataset_defaults(name);
  if (!config_path.empty()) cfg.apply_file(config_path);
  return cfg;
}

void add_run_options(CLI::App* cmd, RunConfig& cfg, std::string& config_sink,
                     std::string& name_sink) {
  cmd->add_option("--config", config_sink, "flat key = value config file");
  cmd->add_option("--dataset", cfg.dataset, "ratings file");
  cmd->add_option("--dataset-name", name_sink, "defaults key: ml-100k | ml-1m | yelp");
  cmd->add_option("--format", cfg.format, "tsv | colon");
  cmd->add_option("--positive-threshold", cfg.positive_threshold, "min rating that counts as positive");
  cmd->add_option("--split", cfg.split, "random | leave-n-out");
  cmd->add_option("--train-fraction", cfg.train_fraction);
  cmd->add_option("--leave-n", cfg.leave_n);
  cmd->add_option("--min-interactions", cfg.min_interactions, "drop users with fewer positives");
  cmd->add_option("--model", cfg.model, "item-pop | pn-gmf | pu-gmf | pure");
  cmd->add_flag("--pretrain", cfg.pretrain, "warm-start pure from a pu-gmf run");
  cmd->add_option("--pretrain-epochs", cfg.pretrain_epochs,
                  "pu-gmf warm-up epochs (0 = same as epochs)");
  cmd->add_option("--protocol", cfg.protocol, "full | sampled");
  cmd->add_option("--pool-size", cfg.pool_size);
  cmd->add_option("--seed", cfg.seed);
  cmd->add_option("--workers", cfg.workers, "evaluation threads");
  cmd->add_option("--checkpoint-every", cfg.checkpoint_every);
  cmd->add_option("--validate-every", cfg.validate_every, "report test metrics every n epochs");
  cmd->add_option("--out", cfg.out_dir, "output directory");
  cmd->add_option("--pi-p", cfg.hyper.pi_p);
  cmd->add_option("--delta", cfg.hyper.delta);
  cmd->add_option("--d", cfg.hyper.d);
  cmd->add_option("--k", cfg.hyper.k, "generator hidden width (0 = 2*d)");
  cmd->add_option("--lr", cfg.hyper.lr);
  cmd->add_option("--epochs", cfg.hyper.epochs);
  cmd->add_option("--batch-size", cfg.hyper.batch_size);
  cmd->add_option("--C", cfg.hyper.C, "negative-to-positive sampling ratio");
  cmd->add_option("--d-steps", cfg.hyper.d_steps);
  cmd->add_option("--g-steps", cfg.hyper.g_steps);
  cmd->add_option("--gen-ratio", cfg.hyper.gen_ratio);
  cmd->add_option_function<std::string>(
      "--loss-reduction",
      [&cfg](const std::string& v) { cfg.apply_kv("loss_reduction", v); }, "sum | mean");
  cmd->add_option_function<std::string>(
      "--alternation",
      [&cfg](const std::string& v) { cfg.apply_kv("alternation", v); },
      "adversarial update order: epoch | batch");
}

DatasetSplit make_split(const RunConfig& cfg, const Interactions& data) {
  RngStream rng(cfg.seed, Stream::Split);
  if (cfg.split == "random") return split_random(data, cfg.train_fraction, rng);
  return split_leave_n_out(data, cfg.leave_n, rng);
}

Interactions load_dataset(const RunConfig& cfg) {
  if (cfg.dataset.empty()) throw Error("no --dataset given");
  const RatingFormat fmt = cfg.format == "colon" ? RatingFormat::DoubleColon : RatingFormat::Tsv;
  Interactions data = load_ratings(cfg.dataset, fmt, cfg.positive_threshold);
  return filter_min_interactions(data, cfg.min_interactions);
}

MetricsReport eval_with(const RunConfig& cfg, const TrainedModel& model,
                        const DatasetSplit& split) {
  const Protocol protocol = cfg.protocol == "sampled" ? Protocol::Sampled : Protocol::Full;
  RngStream pool_rng(cfg.seed, Stream::Pool);
  return evaluate(model, split, protocol, cfg.pool_size, pool_rng, cfg.workers);
}

void write_log(const std::vector<EpochStats>& history, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << training_log_header() << "\n";
  for (std::size_t e = 0; e < history.size(); ++e)
    out << training_log_line(static_cast<int>(e), history[e]) << "\n";
}

void write_metrics_files(const MetricsReport& report, const fs::path& dir) {
  {
    std::ofstream out(dir / "metrics.json");
    if (!out) throw Error("cannot write " + (dir / "metrics.json").string());
    out << metrics_json(report);
  }
  std::ofstream out(dir / "metrics.csv");
  if (!out) throw Error("cannot write " + (dir / "metrics.csv").string());
  out << metrics_csv_header() << "\n" << metrics_csv_row(report) << "\n";
}

TrainHooks make_hooks(const RunConfig& cfg, const DatasetSplit& split, const fs::path& out) {
  TrainHooks hooks;
  hooks.on_epoch = [&cfg, &split, out](int epoch, const TrainedModel& model) {
    if (cfg.validate_every > 0 && (epoch + 1) % cfg.validate_every == 0) {
      const MetricsReport r = eval_with(cfg, model, split);
      std::printf("epoch %d: p5=%.4f ndcg5=%.4f map=%.4f mrr=%.4f\n", epoch, r.p5, r.ndcg5, r.map,
                  r.mrr);
      std::fflush(stdout);
    }
    if (cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0)
      save_checkpoint(model, (out / ("model.epoch" + std::to_string(epoch) + ".ckpt")).string());
  };
  return hooks;
}

struct TrainOutcome {
  TrainedModel model;
  DatasetSplit split;
};

TrainOutcome run_train(const RunConfig& cfg) {
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);
  cfg.save((out / "config.resolved").string());

  Interactions data = load_dataset(cfg);
  DatasetSplit split = make_split(cfg, data);
  save_split(split, (out / "train.tsv").string(), (out / "test.tsv").string());

  TrainOutcome outcome{TrainedModel{}, std::move(split)};
  const TrainHooks hooks = make_hooks(cfg, outcome.split, out);
  const ModelKind kind = model_kind_from_name(cfg.model);
  switch (kind) {
    case ModelKind::ItemPop:
      outcome.model = train_item_pop(outcome.split.train);
      break;
    case ModelKind::PnGmf:
      outcome.model = train_gmf(outcome.split.train, cfg.hyper, GmfMode::Pn, cfg.seed, &hooks);
      break;
    case ModelKind::PuGmf:
      outcome.model = train_gmf(outcome.split.train, cfg.hyper, GmfMode::Pu, cfg.seed, &hooks);
      break;
    case ModelKind::Pure: {
      if (cfg.pretrain) {
        HyperParams pre_hp = cfg.hyper;
        if (cfg.pretrain_epochs > 0) pre_hp.epochs = cfg.pretrain_epochs;
        TrainedModel pu = train_gmf(outcome.split.train, pre_hp, GmfMode::Pu, cfg.seed, nullptr);
        write_log(pu.history, out / "pretrain.log");
        save_checkpoint(pu, (out / "pretrain.ckpt").string());
        const DiscriminatorParams warm = pretrain_handoff(pu);
        outcome.model = train_pure(outcome.split.train, cfg.hyper, &warm, cfg.seed, &hooks);
      } else {
        outcome.model = train_pure(outcome.split.train, cfg.hyper, nullptr, cfg.seed, &hooks);
      }
      break;
    }
  }
  write_log(outcome.model.history, out / "train.log");
  save_checkpoint(outcome.model, (out / "model.ckpt").string());
  return outcome;
}

int cmd_ingest(const RunConfig& cfg) {
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);
  cfg.save((out / "config.resolved").string());
  Interactions data = load_dataset(cfg);
  DatasetSplit split = make_split(cfg, data);
  save_split(split, (out / "train.tsv").string(), (out / "test.tsv").string());
  std::printf("users=%d items=%d positives=%" PRId64 " sparsity=%.4f%%\n", data.num_users,
              data.num_items, data.num_positives(), 100.0 * data.sparsity());
  std::printf("train=%" PRId64 " test=%" PRId64 " -> %s\n", split.train.num_positives(),
              split.test.num_positives(), out.c_str());
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  const TrainOutcome outcome = run_train(cfg);
  std::printf("trained %s: %d users x %d items, %zu epochs -> %s\n",
              model_kind_name(outcome.model.kind), outcome.model.num_users,
              outcome.model.num_items, outcome.model.history.size(), cfg.out_dir.c_str());
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& run_dir, std::string ckpt,
                 std::string split_train, std::string split_test) {
  if (!run_dir.empty()) {
    if (ckpt.empty()) ckpt = (fs::path(run_dir) / "model.ckpt").string();
    if (split_train.empty()) split_train = (fs::path(run_dir) / "train.tsv").string();
    if (split_test.empty()) split_test = (fs::path(run_dir) / "test.tsv").string();
  }
  if (ckpt.empty() || split_train.empty() || split_test.empty())
    throw Error("evaluate needs --run or all of --checkpoint/--split-train/--split-test");

  const TrainedModel model = load_checkpoint(ckpt);
  const DatasetSplit split = load_split(split_train, split_test);
  if (model.num_users != split.train.num_users || model.num_items != split.train.num_items)
    throw Error("evaluate: checkpoint is " + std::to_string(model.num_users) + "x" +
                std::to_string(model.num_items) + " but the split is " +
                std::to_string(split.train.num_users) + "x" +
                std::to_string(split.train.num_items));

  const MetricsReport report = eval_with(cfg, model, split);
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);
  write_metrics_files(report, out);
  std::printf("%s\n%s\n", metrics_csv_header().c_str(), metrics_csv_row(report).c_str());
  return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::string& param, const std::string& values_csv) {
  if (param != "pi_p" && param != "delta")
    throw Error("sweep: --param must be pi_p or delta, got '" + param + "'");
  std::vector<double> values;
  std::stringstream ss(values_csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    values.push_back(std::stod(tok));
  }
  if (values.empty()) throw Error("sweep: --values is empty");

  const fs::path out(cfg.out_dir);
  fs::create_directories(out);
  std::ofstream sweep_csv(out / "sweep.csv");
  if (!sweep_csv) throw Error("cannot write " + (out / "sweep.csv").string());
  sweep_csv << "value,p5,ndcg5,map,mrr,status\n";

  for (double v : values) {
    RunConfig sub = cfg;
    if (param == "pi_p") sub.hyper.pi_p = v;
    else sub.hyper.delta = v;
    char tag[64];
    std::snprintf(tag, sizeof(tag), "%s_%.10g", param.c_str(), v);
    sub.out_dir = (out / tag).string();
    char value_str[32];
    std::snprintf(value_str, sizeof(value_str), "%.10g", v);
    try {
      sub.finalize();
      const TrainOutcome outcome = run_train(sub);
      const MetricsReport r = eval_with(sub, outcome.model, outcome.split);
      write_metrics_files(r, sub.out_dir);
      char row[256];
      std::snprintf(row, sizeof(row), "%s,%.10g,%.10g,%.10g,%.10g,ok", value_str, r.p5, r.ndcg5,
                    r.map, r.mrr);
      sweep_csv << row << "\n";
      std::printf("%s\n", row);
    } catch (const std::exception& e) {
      sweep_csv << value_str << ",,,,,error: " << e.what() << "\n";
      std::printf("%s failed: %s\n", value_str, e.what());
    }
    sweep_csv.flush();
  }
  return 0;
}

int cmd_bound(std::int64_t n_p, double pi_p, double C) {
  const std::int64_t n_u = unlabeled_sample_size(n_p, pi_p, C);
  std::printf("n_p=%" PRId64 " pi_p=%g C=%g -> n_u=%" PRId64 "\n\n", n_p, pi_p, C, n_u);
  std::printf("pi_p   n_u/n_p\n");
  for (double pi : {0.01, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40}) {
    const double denom = 1.0 - (std::sqrt(C) + 1.0) * pi;
    if (denom <= 0.0) {
      std::printf("%.2f   (undefined: (sqrt(C)+1)*pi_p >= 1)\n", pi);
      continue;
    }
    const double ratio = std::sqrt(C) / (denom * denom);
    // conservative display: round up at 2 decimals, matching the ceil in n_u
    std::printf("%.2f   %.2f\n", pi, std::ceil(ratio * 100.0 - 1e-6) / 100.0);
  }
  return 0;
}

int cmd_theory_check(int instances, std::uint64_t seed, bool perturb) {
  RngStream rng(seed, Stream::Init);
  const double pis[] = {0.05, 0.1, 0.2, 0.3, 0.4};
  int failures = 0;
  std::printf("instance,kind,is_equilibrium,max_d_dev,v_dev,decomp_gap\n");
  for (int n = 0; n < instances; ++n) {
    const int support = 3 + n % 8;
    const double pi_p = pis[n % 5];
    const bool want_eq = n % 2 == 0;
    std::string kind = want_eq ? "equilibrium" : "random";
    theory::DiscreteDistributions dists =
        want_eq ? theory::make_equilibrium_instance(support, pi_p, rng)
                : theory::make_random_instance(support, pi_p, rng);
    if (want_eq && perturb) {
      dists = theory::perturb_instance(dists, 1e-3);
      kind = "perturbed";
    }

    bool ok = true;
    const auto dec = theory::generator_objective_decomposition(dists);
    const double gap = std::abs(dec.direct - dec.decomposed);
    if (gap >= 1e-9) ok = false;
    if (dec.direct < -2.0 * theory::binary_entropy(pi_p / 2.0) - 1e-9) ok = false;

    const Vec d_star = theory::optimal_discriminator(dists);
    for (int probe = 0; probe < 8; ++probe) {
      Vec d(support);
      for (int j = 0; j < support; ++j) d[j] = rng.uniform();
      if (theory::objective_value(dists, d) > dec.direct + 1e-12) ok = false;
    }

    const auto cert = theory::equilibrium_certificate(dists);
    if (want_eq && !perturb &&
        (!cert.is_equilibrium || cert.max_d_deviation >= 1e-9 || cert.v_deviation >= 1e-9))
      ok = false;
    if (want_eq && perturb && cert.is_equilibrium) ok = false;

    std::printf("%d,%s,%s,%.3e,%.3e,%.3e\n", n, kind.c_str(),
                cert.is_equilibrium ? "true" : "false", cert.max_d_deviation, cert.v_deviation,
                gap);
    if (!ok) {
      std::printf("instance %d FAILED\n", n);
      ++failures;
    }
  }
  std::printf("%d/%d instances passed\n", instances - failures, instances);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"positive-unlabeled adversarial recommender"};
  app.require_subcommand(1);

  RunConfig cfg;
  try {
    cfg = base_config(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  std::string config_sink, name_sink;

  auto* ingest = app.add_subcommand("ingest", "load, filter, split, persist the split");
  add_run_options(ingest, cfg, config_sink, name_sink);

  auto* train = app.add_subcommand("train", "train a model and write its artifacts");
  add_run_options(train, cfg, config_sink, name_sink);

  auto* evaluate = app.add_subcommand("evaluate", "rank and score a saved checkpoint");
  add_run_options(evaluate, cfg, config_sink, name_sink);
  std::string run_dir, ckpt, split_train, split_test;
  evaluate->add_option("--run", run_dir, "run directory holding model.ckpt/train.tsv/test.tsv");
  evaluate->add_option("--checkpoint", ckpt);
  evaluate->add_option("--split-train", split_train);
  evaluate->add_option("--split-test", split_test);

  auto* sweep = app.add_subcommand("sweep", "train/evaluate over a one-parameter grid");
  add_run_options(sweep, cfg, config_sink, name_sink);
  std::string sweep_param = "pi_p", sweep_values;
  sweep->add_option("--param", sweep_param, "pi_p | delta");
  sweep->add_option("--values", sweep_values, "comma-separated grid")->required();

  auto* bound = app.add_subcommand("bound", "unlabeled sample size from the class prior");
  std::int64_t bound_np = 1;
  double bound_pi = 0.1, bound_c = 1.0;
  bound->add_option("--n-p", bound_np, "number of labeled positives");
  bound->add_option("--pi-p", bound_pi)->required();
  bound->add_option("--c", bound_c);

  auto* theory_check = app.add_subcommand("theory-check", "verify the fixed-point identities");
  int instances = 200;
  std::uint64_t t_seed = 7;
  bool perturb = false;
  theory_check->add_option("--instances", instances);
  theory_check->add_option("--seed", t_seed);
  theory_check->add_flag("--perturb", perturb, "negative control: break the equilibria");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(ingest) || app.got_subcommand(train) || app.got_subcommand(sweep)) {
      cfg.finalize();
      if (app.got_subcommand(ingest)) return cmd_ingest(cfg);
      if (app.got_subcommand(train)) return cmd_train(cfg);
      return cmd_sweep(cfg, sweep_param, sweep_values);
    }
    if (app.got_subcommand(evaluate)) {
      if (cfg.hyper.k == 0) cfg.hyper.k = 2 * cfg.hyper.d;
      return cmd_evaluate(cfg, run_dir, ckpt, split_train, split_test);
    }
    if (app.got_subcommand(bound)) return cmd_bound(bound_np, bound_pi, bound_c);
    if (app.got_subcommand(theory_check)) return cmd_theory_check(instances, t_seed, perturb);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
