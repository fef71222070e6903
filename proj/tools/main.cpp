#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace reidkit::cli;

  CLI::App app{"reidkit: fish re-identification training and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "reidkit 0.1.0");

  PreprocessArgs pre;
  auto* preprocess = app.add_subcommand("preprocess", "Crop, resize and pad instances onto square canvases");
  preprocess->add_option("--images", pre.images, "Directory of source PNG images")->required();
  preprocess->add_option("--masks", pre.masks, "Directory of masks (<stem>.png, <stem>_mask.png or <stem>.json polygons)")->required();
  preprocess->add_option("--out", pre.out, "Output directory for canvases and manifest.jsonl")->required();
  preprocess->add_option("--config", pre.config, "key = value file: target, pad_value, crop_pad, mean, std");

  StatsArgs st;
  auto* stats = app.add_subcommand("stats", "Per-channel mean and std over canvases");
  stats->add_option("--canvases", st.canvases, "Directory of canvas PNGs")->required();
  stats->add_option("--out", st.out, "Output JSON path")->required();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train a projection head with triplet loss");
  train->add_option("--train", tr.train_store, "Training embedding store (name or file)")->required();
  train->add_option("--val", tr.val_store, "Validation embedding store (name or file)")->required();
  train->add_option("--out", tr.out_head, "Output head name (writes <name>.meta.json and <name>.f32)")->required();
  train->add_option("--history", tr.history, "History CSV path (default <out>.history.csv)");
  train->add_option("--config", tr.config, "key = value training config");
  train->add_option("--seed", tr.seed, "Run seed (overrides the config seed)");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Single-pool R1 / mAP@k evaluation");
  eval->add_option("--store", ev.store, "Embedding store to evaluate")->required();
  eval->add_option("--head", ev.head, "Optional head; omitted evaluates raw features");
  eval->add_option("--seed", ev.seed, "Query/gallery split seed")->capture_default_str();
  eval->add_option("--k", ev.k, "mAP cutoff")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--out", ev.out, "Report JSON path")->required();
  eval->add_option("--distances", ev.distances, "Distance samples CSV (default <out>.distances.csv)");
  eval->add_option("--kde", ev.kde, "KDE curves CSV (default <out>.kde.csv)");
  eval->add_option("--max-pairs", ev.max_pairs, "Distance pairs sampled per type")->capture_default_str();

  CrossEvalArgs ce;
  auto* crosseval = app.add_subcommand("crosseval", "4x4 query x gallery condition matrix");
  crosseval->add_option("--store", ce.store, "Embedding store with condition labels")->required();
  crosseval->add_option("--head", ce.head, "Optional head; omitted evaluates raw features");
  crosseval->add_option("--seed", ce.seed, "Query selection seed")->capture_default_str();
  crosseval->add_option("--k", ce.k, "mAP cutoff (clamped to each gallery)")->capture_default_str()->check(CLI::PositiveNumber);
  crosseval->add_option("--out", ce.out, "Matrix JSON path")->required();

  ReportArgs rp;
  auto* report = app.add_subcommand("report", "Merge eval reports into a comparison CSV");
  report->add_option("reports", rp.reports, "Eval report JSON files")->required();
  report->add_option("--out", rp.out, "Output CSV path")->required();

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Write synthetic train/val/test embedding stores");
  synth->add_option("--out", sy.out, "Output prefix (writes <out>_train, <out>_val, <out>_test)")->required();
  synth->add_option("--seed", sy.seed, "Generator seed")->capture_default_str();
  synth->add_option("--identities", sy.identities)->capture_default_str();
  synth->add_option("--instances", sy.instances)->capture_default_str();
  synth->add_option("--dim", sy.feature_dim)->capture_default_str();
  synth->add_option("--train-identities", sy.train_identities)->capture_default_str();
  synth->add_option("--val-identities", sy.val_identities)->capture_default_str();
  synth->add_option("--instance-sigma", sy.instance_sigma)->capture_default_str();
  synth->add_option("--nuisance-sigma", sy.nuisance_sigma)->capture_default_str();
  synth->add_flag("--conditions", sy.conditions, "Assign the four capture conditions");
  synth->add_option("--viewpoint-shift", sy.viewpoint_shift)->capture_default_str();
  synth->add_option("--occlusion-sigma", sy.occlusion_sigma)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (*preprocess) return run_preprocess(pre);
  if (*stats) return run_stats(st);
  if (*train) return run_train(tr);
  if (*eval) return run_eval(ev);
  if (*crosseval) return run_crosseval(ce);
  if (*report) return run_report(rp);
  if (*synth) return run_synth(sy);
  return 1;
}
