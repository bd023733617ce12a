// slv: spatial likelihood voting pseudo-label tools.
//
//   slv synth  --scenes 20 --out scenes.jsonl --gt-out gt.jsonl
//   slv vote   scenes.jsonl --out sup.jsonl [--emit-maps maps/]
//   slv eval   --dets sup.jsonl --gt gt.jsonl --metric corloc
//   slv losses scenes.jsonl --iter 40000 --total-iters 80000
//   slv bench

#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "slv/commands.hpp"

namespace {

void add_search_flags(CLI::App* cmd, slv::SearchParams& p) {
  cmd->add_option("--step", p.step, "Expansion step s in pixels")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--epsilon", p.tolerance, "Allowed rise over the running minimum")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd->add_option("--score-threshold", p.score_threshold, "Drop proposals scoring at or below this")->check(CLI::Range(0.0, 1.0))->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial likelihood voting: pseudo ground truth from proposal scores"};
  app.require_subcommand(1);

  slv::cli::VoteOptions vote;
  std::string vote_output = "-";
  std::string emit_maps;
  auto* vote_cmd = app.add_subcommand("vote", "Generate pseudo ground-truth boxes from scene files");
  vote_cmd->add_option("inputs", vote.inputs, "Scene JSON-lines files")->required();
  vote_cmd->add_option("-o,--out", vote_output, "Supervision output ('-' for stdout)")->capture_default_str();
  add_search_flags(vote_cmd, vote.params);
  vote_cmd->add_option("--method", vote.method, "Box extraction: adaptive or threshold")
      ->transform(CLI::CheckedTransformer(std::map<std::string, slv::cli::Method>{
          {"adaptive", slv::cli::Method::Adaptive}, {"threshold", slv::cli::Method::Threshold}}));
  vote_cmd->add_option("--tau", vote.tau, "Binarisation threshold for --method=threshold")->capture_default_str();
  vote_cmd->add_option("--emit-maps", emit_maps, "Write per-class PGM likelihood maps to this directory");
  vote_cmd->add_option("-j,--jobs", vote.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  vote_cmd->add_flag("--strict", vote.strict, "Stop at the first malformed record");

  slv::cli::EvalOptions eval;
  std::string classes_path;
  std::size_t eval_classes = 0;
  auto* eval_cmd = app.add_subcommand("eval", "Score detections against ground truth");
  eval_cmd->add_option("--dets", eval.detections, "Detections (supervision format with scores)")->required();
  eval_cmd->add_option("--gt", eval.ground_truth, "Ground truth (supervision format or scenes with 'gt')")->required();
  eval_cmd->add_option("--metric", eval.metric, "map50, map (IoU .50:.05:.95) or corloc")
      ->transform(CLI::CheckedTransformer(std::map<std::string, slv::cli::Metric>{
          {"map50", slv::cli::Metric::Map50}, {"map", slv::cli::Metric::Map}, {"corloc", slv::cli::Metric::CorLoc}}));
  eval_cmd->add_flag("--json", eval.json, "Print the report as JSON");
  eval_cmd->add_option("--classes", classes_path, "JSON array of class names, indexed by class id");
  eval_cmd->add_option("--num-classes", eval_classes, "Class count when no vocabulary is given");

  slv::cli::LossesOptions losses;
  std::string components = "w,r,s,d";
  auto* losses_cmd = app.add_subcommand("losses", "Evaluate every training loss on scene files");
  losses_cmd->add_option("input", losses.input, "Scene JSON-lines file")->required();
  losses_cmd->add_option("--iter", losses.schedule.current, "Current iteration i_c")->capture_default_str();
  losses_cmd->add_option("--total-iters", losses.schedule.total, "Total iterations i_t")->capture_default_str();
  losses_cmd->add_option("--components", components, "Comma list of w (MIL), r (refinement), s (SLV), d (distillation)")->capture_default_str();
  losses_cmd->add_option("--iou-fg", losses.request.iou_fg, "Foreground IoU for clusters and targets")->capture_default_str();
  add_search_flags(losses_cmd, losses.request.params);
  losses_cmd->add_flag("--json", losses.json, "Print one JSON record per scene");

  slv::cli::SynthOptions synth;
  std::string synth_output = "-";
  std::string gt_output;
  synth.spec.seed = slv::cli::default_seed();
  auto* synth_cmd = app.add_subcommand("synth", "Write deterministic synthetic scenes");
  synth_cmd->add_option("--scenes", synth.spec.scenes, "Number of scenes")->capture_default_str();
  synth_cmd->add_option("--objects", synth.spec.objects, "Planted objects per scene")->capture_default_str();
  synth_cmd->add_option("--classes", synth.spec.classes, "Number of classes")->capture_default_str();
  synth_cmd->add_option("--min-width", synth.spec.min_width, "Smallest image width")->capture_default_str();
  synth_cmd->add_option("--max-width", synth.spec.max_width, "Largest image width")->capture_default_str();
  synth_cmd->add_option("--min-height", synth.spec.min_height, "Smallest image height")->capture_default_str();
  synth_cmd->add_option("--max-height", synth.spec.max_height, "Largest image height")->capture_default_str();
  synth_cmd->add_option("--noise", synth.spec.noise, "Relative jitter of object proposals")->capture_default_str();
  synth_cmd->add_option("--proposals-per-object", synth.spec.proposals_per_object,
                        "Jittered proposals around each object")->capture_default_str();
  synth_cmd->add_option("--clutter", synth.spec.clutter, "Background proposals per scene")->capture_default_str();
  synth_cmd->add_option("--clutter-score", synth.spec.clutter_score, "Upper bound of clutter scores")->capture_default_str();
  synth_cmd->add_option("--seed", synth.spec.seed, "RNG seed (default $SLV_SEED or 1)")->capture_default_str();
  synth_cmd->add_flag("--full", synth.spec.full, "Also emit logits, branch scores, deltas and features");
  synth_cmd->add_option("-o,--out", synth_output, "Scene output ('-' for stdout)")->capture_default_str();
  synth_cmd->add_option("--gt-out", gt_output, "Ground-truth output in supervision format");

  slv::cli::BenchOptions bench;
  bench.seed = slv::cli::default_seed();
  auto* bench_cmd = app.add_subcommand("bench", "Time likelihood accumulation against the per-pixel oracle");
  bench_cmd->add_option("--workloads", bench.workloads, "Number of random scenes")->capture_default_str();
  bench_cmd->add_option("--boxes", bench.boxes, "Proposals per scene")->capture_default_str();
  bench_cmd->add_option("--width", bench.width, "Image width")->capture_default_str();
  bench_cmd->add_option("--height", bench.height, "Image height")->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "RNG seed (default $SLV_SEED or 1)")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (*vote_cmd) {
    vote.output = vote_output;
    if (!emit_maps.empty()) vote.emit_maps = emit_maps;
    return slv::cli::run_vote(vote, std::cout, std::cerr);
  }
  if (*eval_cmd) {
    if (!classes_path.empty()) eval.classes = classes_path;
    if (eval_classes > 0) eval.num_classes = eval_classes;
    return slv::cli::run_eval(eval, std::cout, std::cerr);
  }
  if (*losses_cmd) {
    auto& r = losses.request;
    r.mil = r.refine = r.slv = r.distill = false;
    std::stringstream ss(components);
    for (std::string item; std::getline(ss, item, ',');) {
      if (item == "w") r.mil = true;
      else if (item == "r") r.refine = true;
      else if (item == "s") r.slv = true;
      else if (item == "d") r.distill = true;
      else {
        std::cerr << "losses: unknown component '" << item << "'\n";
        return 2;
      }
    }
    return slv::cli::run_losses(losses, std::cout, std::cerr);
  }
  if (*synth_cmd) {
    synth.output = synth_output;
    if (!gt_output.empty()) synth.gt_output = gt_output;
    return slv::cli::run_synth(synth, std::cout, std::cerr);
  }
  if (*bench_cmd) return slv::cli::run_bench(bench, std::cout, std::cerr);
  return 0;
}
