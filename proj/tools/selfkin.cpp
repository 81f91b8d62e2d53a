// selfkin: train, evaluate, prune and check the kinship verification head.
//
// Exit codes: 0 success, 1 validation failure (gradcheck or prune --verify),
// 2 usage or I/O error.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "selfkin/checkpoint.hpp"
#include "selfkin/data.hpp"
#include "selfkin/descriptor.hpp"
#include "selfkin/eval.hpp"
#include "selfkin/gradcheck.hpp"
#include "selfkin/image.hpp"
#include "selfkin/pruning.hpp"
#include "selfkin/train.hpp"

namespace fs = std::filesystem;
using namespace selfkin;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

/// Echoes the resolved options of the chosen subcommand to stderr.
void print_config(const CLI::App& sub) {
  std::cerr << "# " << sub.get_name() << '\n';
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_name() == "--help") continue;
    std::string value;
    if (opt->get_expected_min() == 0) {
      value = opt->count() > 0 ? "true" : "false";
    } else {
      const auto& res = opt->results();
      if (res.empty()) {
        value = opt->get_default_str().empty() ? "(unset)" : opt->get_default_str();
      } else {
        for (std::size_t k = 0; k < res.size(); ++k) value += (k ? " " : "") + res[k];
      }
    }
    std::cerr << "#   " << opt->get_name() << " = " << value << '\n';
  }
}

struct TrainArgs {
  std::string pairs, features, out, val_pairs, relation, log, init;
  int epochs = 30;
  int batch = 1;
  int hidden = 128;
  int patience = 5;
  std::uint64_t seed = 1;
  double lambda_mask = 0.5;
  double lambda_cls = 1e-5;
  double dropout = 0.8;
  bool no_mask_layer = false;
  bool augment = false;
  AdamHyper adam;
};

int run_train(const TrainArgs& a) {
  FeatureStore store = load_features(a.features);
  auto train = load_pairs(a.pairs);
  std::vector<PairSample> val;
  if (!a.val_pairs.empty()) val = load_pairs(a.val_pairs);
  std::optional<Relation> relation;
  if (!a.relation.empty()) {
    relation = parse_relation(a.relation);
    if (!relation) throw Error("unknown-relation", a.relation);
    train = filter_relation(train, *relation);
    val = filter_relation(val, *relation);
  }
  if (a.augment)
    std::cerr << "warning: augmentation acts on images; training from precomputed features ignores --augment\n";

  TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.dropout_rate = a.dropout;
  cfg.lambda_cls = a.lambda_cls;
  cfg.lambda_mask = a.lambda_mask;
  cfg.use_mask_layer = !a.no_mask_layer;
  cfg.seed = a.seed;
  cfg.early_stop_patience = a.patience;
  cfg.adam = a.adam;
  cfg.validate();

  ModelParams init;
  if (!a.init.empty()) {
    init = load_checkpoint(a.init).params;
  } else {
    if (a.hidden < 1) throw Error("invalid-config", "hidden");
    Rng init_rng(a.seed ^ 0x9e3779b97f4a7c15ULL);
    init = init_params(store.dim(), a.hidden, init_rng);
  }

  const FitResult fitted = fit(cfg, train, val, store, std::move(init), [](const EpochLog& e, const ModelParams&) {
    std::fprintf(stderr, "epoch %3d  lr %.3e  loss %.6f  soft %.6f  train_acc %.4f  val_acc %.4f\n", e.epoch,
                 e.lr, e.train_loss, e.soft_loss, e.train_acc, e.val_acc);
  });

  Checkpoint ckpt;
  ckpt.params = fitted.params;
  ckpt.relation = relation;
  ckpt.hyper = {cfg.adam, cfg.lambda_cls, cfg.lambda_mask, cfg.dropout_rate, cfg.use_mask_layer};
  save_checkpoint(ckpt, a.out);
  if (!a.log.empty()) write_train_log(fitted.log, fs::path(a.log));
  const auto& best = fitted.log.epochs.at(static_cast<std::size_t>(fitted.log.best_epoch));
  std::cout << "best_epoch " << best.epoch << " val_acc " << best.val_acc << '\n';
  return kExitOk;
}

int run_eval(const std::string& model, const std::string& pairs_path, const std::string& features,
             const std::string& out) {
  const Checkpoint ckpt = load_checkpoint(model);
  const FeatureStore store = load_features(features);
  const auto pairs = load_pairs(pairs_path);
  std::span<const Index> kept;
  if (ckpt.kept_indices) kept = *ckpt.kept_indices;
  const Index expected = ckpt.pruned_from ? *ckpt.pruned_from : ckpt.params.n_features();
  if (store.dim() != expected) throw Error("shape-mismatch", "feature dim vs model");
  const RelationReport report = evaluate(ckpt.params, pairs, store, kept);
  print_report(report, std::cout);
  if (!out.empty()) {
    std::ofstream os(out);
    if (!os) throw Error("io-error", out);
    write_report_csv(report, os);
  }
  return kExitOk;
}

int run_prune(const std::string& model, const std::string& out, double keep, bool verify, int probes,
              std::uint64_t seed) {
  const Checkpoint ckpt = load_checkpoint(model);
  const PruneResult r = threshold_mask(ckpt.params, keep);

  Checkpoint pruned = ckpt;
  pruned.params = r.compacted;
  // Pruning an already pruned model maps indices back to the original width.
  std::vector<Index> kept = r.kept_indices;
  if (ckpt.kept_indices)
    for (auto& k : kept) k = (*ckpt.kept_indices)[static_cast<std::size_t>(k)];
  pruned.kept_indices = kept;
  pruned.pruned_from = ckpt.pruned_from ? *ckpt.pruned_from : ckpt.params.n_features();

  std::cout << "kept " << r.kept_indices.size() << " dropped " << r.dropped_count << " threshold "
            << r.threshold_value << '\n';

  int status = kExitOk;
  if (verify) {
    Rng rng(seed);
    std::vector<ProbePair> probe_pairs;
    const Index n = ckpt.params.n_features();
    for (int k = 0; k < probes; ++k) {
      Vec a(n), b(n);
      for (Index t = 0; t < n; ++t) a(t) = std::fabs(rng.normal());
      for (Index t = 0; t < n; ++t) b(t) = std::fabs(rng.normal());
      probe_pairs.emplace_back(std::move(a), std::move(b));
    }
    const bool ok = verify_prune_equivalence(ckpt.params, r, probe_pairs);
    std::cout << "verify " << (ok ? "PASS" : "FAIL") << '\n';
    if (!ok) status = kExitFailed;
  }
  save_checkpoint(pruned, out);
  return status;
}

int run_gradcheck_cmd(int dim, int hidden, int trials, std::uint64_t seed, double tol, double eps) {
  GradCheckOptions opts;
  opts.eps = eps;
  const GradCheckReport report = run_gradcheck(dim, hidden, trials, seed, tol, opts);
  std::cout << format_report(report);
  return report.pass ? kExitOk : kExitFailed;
}

int run_synth(const SynthConfig& cfg, const std::string& out_features, const std::string& out_pairs,
              std::size_t val_per_class, const std::string& out_val_pairs) {
  const SynthData data = gen_synthetic(cfg);
  save_features(data.store, out_features);
  if (val_per_class > 0) {
    if (out_val_pairs.empty()) throw Error("usage", "--val-per-class needs --out-val-pairs");
    const auto [train, val] = split_holdout(data.pairs, val_per_class);
    save_pairs(train, out_pairs);
    save_pairs(val, out_val_pairs);
    std::cout << "faces " << data.store.size() << " train_pairs " << train.size() << " val_pairs "
              << val.size() << '\n';
  } else {
    save_pairs(data.pairs, out_pairs);
    std::cout << "faces " << data.store.size() << " pairs " << data.pairs.size() << '\n';
  }
  return kExitOk;
}

int run_featurize(const std::string& backend, int dim, std::uint64_t seed, const std::vector<std::string>& images,
                  const std::string& out, bool augment, bool include_identity) {
  if (backend != "toy") throw Error("usage", "only the toy backend featurizes images");
  if (images.empty()) throw Error("usage", "--images is empty");
  std::vector<RasterImage> raster;
  for (const auto& path : images) raster.push_back(read_pnm(path));
  const auto& first = raster.front();
  ToyProjectionBackend toy(dim, seed, first.width, first.height, first.channels);
  Rng aug_rng(seed + 1);
  FeatureStore store(dim);
  for (std::size_t k = 0; k < images.size(); ++k) {
    RasterImage img = raster[k];
    if (augment) {
      const int c = pick_augmentation(aug_rng, include_identity);
      if (c != 0) img = augment_image(img, c);
    }
    store.add(fs::path(images[k]).stem().string(), toy.describe(img));
  }
  save_features(store, out);
  std::cout << "faces " << store.size() << " dim " << store.dim() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SelfKin kinship verification head: training, evaluation, pruning, gradient checks"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "train a model on a pair list");
  train->add_option("--pairs", ta.pairs, "training pairs CSV")->required();
  train->add_option("--features", ta.features, "feature file")->required();
  train->add_option("--out", ta.out, "output checkpoint JSON")->required();
  train->add_option("--val-pairs", ta.val_pairs, "validation pairs CSV");
  train->add_option("--epochs", ta.epochs, "epochs")->capture_default_str();
  train->add_option("--batch", ta.batch, "batch size")->capture_default_str();
  train->add_option("--hidden", ta.hidden, "global layer width")->capture_default_str();
  train->add_option("--lr-start", ta.adam.lr_start, "learning rate at the first epoch")->capture_default_str();
  train->add_option("--lr-end", ta.adam.lr_end, "learning rate at the last epoch")->capture_default_str();
  train->add_option("--beta1", ta.adam.beta1, "Adam beta1")->capture_default_str();
  train->add_option("--beta2", ta.adam.beta2, "Adam beta2")->capture_default_str();
  train->add_option("--epsilon", ta.adam.epsilon, "Adam epsilon")->capture_default_str();
  train->add_option("--decay", ta.adam.decay, "Adam rate decay")->capture_default_str();
  train->add_option("--lambda-mask", ta.lambda_mask, "L1 weight on the mask layer")->capture_default_str();
  train->add_option("--lambda-cls", ta.lambda_cls, "L2 weight on local and global layers")->capture_default_str();
  train->add_option("--dropout", ta.dropout, "drop rate between local and global layers")->capture_default_str();
  train->add_flag("--no-mask-layer", ta.no_mask_layer, "freeze the mask layer at all-ones");
  train->add_option("--relation", ta.relation, "train only on pairs of this relation code");
  train->add_option("--seed", ta.seed, "seed for init, shuffling and dropout")->capture_default_str();
  train->add_option("--patience", ta.patience, "early-stop patience in epochs, 0 disables")->capture_default_str();
  train->add_option("--log", ta.log, "write the per-epoch log CSV here");
  train->add_option("--init", ta.init, "start from this checkpoint instead of a fresh init");
  train->add_flag("--augment", ta.augment, "image augmentation (unavailable on precomputed features)");

  std::string em_model, em_pairs, em_features, em_out;
  auto* eval = app.add_subcommand("eval", "per-relation accuracy of a model");
  eval->add_option("--model", em_model, "checkpoint JSON")->required();
  eval->add_option("--pairs", em_pairs, "pairs CSV")->required();
  eval->add_option("--features", em_features, "feature file")->required();
  eval->add_option("--out", em_out, "also write the report as CSV");

  std::string pr_model, pr_out;
  double pr_keep = 0.5;
  bool pr_verify = false;
  int pr_probes = 10;
  std::uint64_t pr_seed = 1;
  auto* prune = app.add_subcommand("prune", "keep the strongest mask features and compact the model");
  prune->add_option("--model", pr_model, "checkpoint JSON")->required();
  prune->add_option("--out", pr_out, "pruned checkpoint JSON")->required();
  prune->add_option("--keep", pr_keep, "fraction of features kept")->capture_default_str();
  prune->add_flag("--verify", pr_verify, "check zeroed-mask and compacted outputs agree");
  prune->add_option("--probes", pr_probes, "random probe pairs for --verify")->capture_default_str();
  prune->add_option("--seed", pr_seed, "probe seed")->capture_default_str();

  int gc_dim = 16, gc_hidden = 8, gc_trials = 20;
  std::uint64_t gc_seed = 1;
  double gc_tol = 1e-4, gc_eps = 1e-6;
  auto* gradcheck = app.add_subcommand("gradcheck", "compare analytic and finite-difference gradients");
  gradcheck->add_option("--dim", gc_dim, "features")->capture_default_str();
  gradcheck->add_option("--hidden", gc_hidden, "hidden units")->capture_default_str();
  gradcheck->add_option("--trials", gc_trials, "random instances")->capture_default_str();
  gradcheck->add_option("--seed", gc_seed, "seed")->capture_default_str();
  gradcheck->add_option("--tol", gc_tol, "max relative error")->capture_default_str();
  gradcheck->add_option("--eps", gc_eps, "central-difference step")->capture_default_str();

  SynthConfig sc;
  std::string sy_features, sy_pairs, sy_val_pairs;
  std::size_t sy_val = 0;
  auto* synth = app.add_subcommand("synth", "generate a synthetic kin-pair task");
  synth->add_option("--dim", sc.dim, "feature dimension")->capture_default_str();
  synth->add_option("--latent", sc.latent_dim, "latent dimension")->capture_default_str();
  synth->add_option("--sigma", sc.noise_sigma, "per-face noise")->capture_default_str();
  synth->add_option("--pairs-per-class", sc.pairs_per_class, "pairs per class")->capture_default_str();
  synth->add_option("--seed", sc.seed, "seed")->capture_default_str();
  synth->add_option("--out-features", sy_features, "feature file")->required();
  synth->add_option("--out-pairs", sy_pairs, "pairs CSV")->required();
  synth->add_option("--val-per-class", sy_val, "hold out this many pairs per class")->capture_default_str();
  synth->add_option("--out-val-pairs", sy_val_pairs, "held-out pairs CSV");

  std::string au_in, au_out;
  int au_case = 0;
  auto* augment = app.add_subcommand("augment", "apply one augmentation case to a PGM/PPM image");
  augment->add_option("--in", au_in, "input image")->required();
  augment->add_option("--case", au_case, "1 gamma 2, 2 gamma 1/2, 3 flip, 4 flip+gamma 2, 5 flip+gamma 1/2")
      ->required();
  augment->add_option("--out", au_out, "output image")->required();

  std::string fz_backend = "toy", fz_out;
  int fz_dim = 4096;
  std::uint64_t fz_seed = 1;
  std::vector<std::string> fz_images;
  bool fz_augment = false, fz_identity = false;
  auto* featurize = app.add_subcommand("featurize", "describe images with a descriptor backend");
  featurize->add_option("--backend", fz_backend, "descriptor backend")->capture_default_str();
  featurize->add_option("--dim", fz_dim, "descriptor size")->capture_default_str();
  featurize->add_option("--seed", fz_seed, "projection and augmentation seed")->capture_default_str();
  featurize->add_option("--images", fz_images, "PGM/PPM images; the file stem is the face ID")->required();
  featurize->add_option("--out", fz_out, "feature file")->required();
  featurize->add_flag("--augment", fz_augment, "apply one random augmentation case per image");
  featurize->add_flag("--include-identity", fz_identity, "let --augment also draw the identity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  print_config(*sub);
  try {
    if (sub == train) return run_train(ta);
    if (sub == eval) return run_eval(em_model, em_pairs, em_features, em_out);
    if (sub == prune) return run_prune(pr_model, pr_out, pr_keep, pr_verify, pr_probes, pr_seed);
    if (sub == gradcheck) return run_gradcheck_cmd(gc_dim, gc_hidden, gc_trials, gc_seed, gc_tol, gc_eps);
    if (sub == synth) return run_synth(sc, sy_features, sy_pairs, sy_val, sy_val_pairs);
    if (sub == augment) {
      write_pnm(augment_image(read_pnm(au_in), au_case), au_out);
      return kExitOk;
    }
    if (sub == featurize) return run_featurize(fz_backend, fz_dim, fz_seed, fz_images, fz_out, fz_augment, fz_identity);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
