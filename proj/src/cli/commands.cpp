#include "slv/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "slv/errors.hpp"
#include "slv/pgm.hpp"
#include "slv/reference.hpp"

namespace slv::cli {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("SLV_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') return v;
  }
  return 1;
}

namespace {

// Output stream that is either stdout or an owned file.
class Sink {
 public:
  Sink(const std::filesystem::path& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      os_ = &fallback;
    } else {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::runtime_error("cannot write " + path.string());
      os_ = &file_;
    }
  }
  std::ostream& stream() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_ = nullptr;
};

std::string sanitize(std::string s) {
  for (char& ch : s) {
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.')) ch = '_';
  }
  return s;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct ParsedScene {
  std::string origin;  // "file:line"
  io::Scene scene;
};

}  // namespace

Supervision vote_scene(const io::Scene& scene, const VoteOptions& opts,
                       std::vector<std::pair<int, LikelihoodMap>>* maps) {
  const ScoreMatrix avg = scene.average_scores();
  BoxExtractor extract;
  if (opts.method == Method::Threshold) {
    extract = [tau = opts.tau](const LikelihoodMap& m) { return threshold_baseline(m, tau); };
  } else {
    extract = [&opts](const LikelihoodMap& m) { return adaptive_search(m, opts.params).boxes; };
  }
  if (maps != nullptr) {
    for (std::size_t c = 0; c < scene.labels.size(); ++c) {
      if (scene.labels[c] != 1) continue;
      maps->emplace_back(static_cast<int>(c),
                         class_likelihood(scene.proposals, avg, static_cast<int>(c), scene.dims,
                                          opts.params.score_threshold));
    }
  }
  return generate_supervision(scene.proposals, avg, scene.labels, scene.dims, opts.params, extract,
                              scene.image_id);
}

int run_vote(const VoteOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    opts.params.validate();
    if (opts.method == Method::Threshold) {
      require(opts.tau > 0.0 && opts.tau < 1.0, "--tau must lie in (0, 1)");
    }
  } catch (const ContractError& e) {
    err << "vote: " << e.what() << '\n';
    return 2;
  }

  bool failed = false;
  std::vector<ParsedScene> scenes;
  for (const auto& path : opts.inputs) {
    std::ifstream in(path);
    if (!in) {
      err << path.string() << ": cannot open\n";
      failed = true;
      if (opts.strict) return 1;
      continue;
    }
    for (const auto& line : io::read_lines(in)) {
      const std::string origin = path.string() + ":" + std::to_string(line.number);
      try {
        scenes.push_back({origin, io::scene_from_json(io::json::parse(line.text))});
      } catch (const std::exception& e) {
        err << origin << ": " << e.what() << '\n';
        failed = true;
        if (opts.strict) return 1;
      }
    }
  }

  if (opts.emit_maps) std::filesystem::create_directories(*opts.emit_maps);

  std::vector<std::string> lines(scenes.size());
  std::vector<std::string> errors(scenes.size());
  parallel_for(scenes.size(), opts.jobs, [&](std::size_t i) {
    try {
      std::vector<std::pair<int, LikelihoodMap>> maps;
      const Supervision sup = vote_scene(scenes[i].scene, opts, opts.emit_maps ? &maps : nullptr);
      for (const auto& [c, m] : maps) {
        const std::string stem = sanitize(scenes[i].scene.image_id) + "_c" + std::to_string(c);
        export_map(*opts.emit_maps / stem, m, c, scenes[i].scene.image_id);
      }
      lines[i] = io::dump_line(io::supervision_to_json(sup));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  try {
    Sink sink(opts.output, out);
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      if (!errors[i].empty()) {
        err << scenes[i].origin << ": " << errors[i] << '\n';
        failed = true;
        if (opts.strict) return 1;
        continue;
      }
      sink.stream() << lines[i] << '\n';
    }
  } catch (const std::exception& e) {
    err << "vote: " << e.what() << '\n';
    return 1;
  }
  return failed ? 1 : 0;
}

namespace {

template <typename Append, typename T>
bool load_records(const std::filesystem::path& path, Append append, std::vector<T>& out,
                  std::ostream& err) {
  std::ifstream in(path);
  if (!in) {
    err << path.string() << ": cannot open\n";
    return false;
  }
  bool ok = true;
  for (const auto& line : io::read_lines(in)) {
    try {
      append(io::json::parse(line.text), out);
    } catch (const std::exception& e) {
      err << path.string() << ":" << line.number << ": " << e.what() << '\n';
      ok = false;
    }
  }
  return ok;
}

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::Map50: return "map50";
    case Metric::Map: return "map";
    case Metric::CorLoc: return "corloc";
  }
  return "?";
}

}  // namespace

int run_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err) {
  std::vector<Detection> dets;
  std::vector<GroundTruth> gts;
  bool ok = load_records(opts.detections, io::append_detections, dets, err);
  ok = load_records(opts.ground_truth, io::append_ground_truth, gts, err) && ok;
  if (!ok) return 1;

  std::vector<std::string> names;
  if (opts.classes) {
    std::ifstream in(*opts.classes);
    if (!in) {
      err << opts.classes->string() << ": cannot open\n";
      return 1;
    }
    try {
      names = io::read_class_names(in);
    } catch (const std::exception& e) {
      err << opts.classes->string() << ": " << e.what() << '\n';
      return 1;
    }
  }

  std::size_t num_classes = 0;
  if (!names.empty()) {
    num_classes = names.size();
  } else if (opts.num_classes) {
    num_classes = *opts.num_classes;
  } else {
    for (const auto& g : gts) num_classes = std::max(num_classes, static_cast<std::size_t>(std::max(g.class_id, 0)) + 1);
  }
  auto known = [&](int c) { return c >= 0 && static_cast<std::size_t>(c) < num_classes; };
  for (const auto& g : gts) {
    if (!known(g.class_id)) {
      err << "eval: unknown class id " << g.class_id << " in ground truth\n";
      return 2;
    }
  }
  for (const auto& d : dets) {
    if (!known(d.class_id)) {
      err << "eval: unknown class id " << d.class_id << " in detections\n";
      return 2;
    }
  }

  std::map<int, double> per_class;
  double mean = 0.0;
  if (opts.metric == Metric::CorLoc) {
    const CorLocReport r = corloc(dets, gts);
    per_class = r.per_class;
    mean = r.mean;
  } else {
    const std::vector<double> thresholds =
        opts.metric == Metric::Map50 ? std::vector<double>{0.5} : coco_thresholds();
    const MapReport r = mean_ap(dets, gts, thresholds);
    per_class = r.per_class;
    mean = r.mean;
  }

  auto label = [&](int c) {
    return names.empty() ? std::to_string(c) : names[static_cast<std::size_t>(c)];
  };
  if (opts.json) {
    io::json classes = io::json::array();
    for (const auto& [c, v] : per_class) {
      classes.push_back({{"class", c}, {"name", label(c)}, {"value", io::round_significant(v)}});
    }
    out << io::json{{"metric", metric_name(opts.metric)},
                    {"per_class", std::move(classes)},
                    {"mean", io::round_significant(mean)}}
               .dump()
        << '\n';
    return 0;
  }
  std::size_t width = 5;
  for (const auto& [c, v] : per_class) width = std::max(width, label(c).size());
  out << std::left << std::setw(static_cast<int>(width) + 2) << "class" << metric_name(opts.metric)
      << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& [c, v] : per_class) {
    out << std::left << std::setw(static_cast<int>(width) + 2) << label(c) << v << '\n';
  }
  out << std::left << std::setw(static_cast<int>(width) + 2) << "mean" << mean << '\n';
  return 0;
}

LossComponents compute_losses(const io::Scene& scene, const LossRequest& request) {
  LossComponents parts;
  const std::size_t classes = scene.num_classes();

  std::optional<WsddnScores> base;
  auto need_base = [&](const char* component) -> const WsddnScores& {
    if (!scene.cls_logits) throw MissingField("cls_logits", component);
    if (!scene.det_logits) throw MissingField("det_logits", component);
    if (!base) base = wsddn_scores(*scene.cls_logits, *scene.det_logits);
    return *base;
  };

  if (request.mil) {
    parts.mil = mil_loss(need_base("L_w").image, scene.labels);
  }

  if (request.refine) {
    const WsddnScores& ws = need_base("L_r");
    if (scene.branch_scores.size() != 3) throw MissingField("branch_scores", "L_r");
    // Branch k is supervised by clusters built from branch k-1 (phi^0 for k=1).
    const ScoreMatrix* previous = &ws.proposal;
    for (std::size_t k = 0; k < 3; ++k) {
      const ClusterAssignment assign =
          build_clusters(*previous, scene.proposals, scene.labels, request.iou_fg);
      parts.refine[k] = cluster_loss(scene.branch_scores[k], assign);
      previous = &scene.branch_scores[k];
    }
  }

  std::optional<ScoreMatrix> avg;
  auto need_avg = [&](const char* component) -> const ScoreMatrix& {
    if (!scene.scores && scene.branch_scores.empty()) throw MissingField("scores", component);
    if (!avg) avg = scene.average_scores();
    return *avg;
  };

  if (request.slv) {
    if (!scene.refine_scores) throw MissingField("refine_scores", "L_s");
    if (!scene.reg_deltas) throw MissingField("reg_deltas", "L_s");
    const Supervision sup = generate_supervision(scene.proposals, need_avg("L_s"), scene.labels,
                                                 scene.dims, request.params, scene.image_id);
    const SlvTargets targets = assign_slv_targets(sup, scene.proposals, classes, request.iou_fg);
    parts.slv = slv_loss(*scene.refine_scores, *scene.reg_deltas, targets);
  }

  if (request.distill) {
    if (!scene.features) throw MissingField("features", "L_d");
    const ScoreMatrix& phi = need_avg("L_d");
    const bool any_positive = std::count(scene.labels.begin(), scene.labels.end(), 1) > 0;
    // An image without positive classes carries no likelihood to distil.
    if (any_positive) {
      std::vector<LikelihoodMap> maps(classes);
      for (std::size_t c = 0; c < classes; ++c) {
        if (scene.labels[c] != 1) continue;
        maps[c] = scale_unit(class_likelihood(scene.proposals, phi, static_cast<int>(c), scene.dims,
                                              request.params.score_threshold));
      }
      const LikelihoodMap pooled = channel_average(*scene.features);
      const LikelihoodMap merged = merge_maps(maps, scene.labels, pooled.dims());
      parts.distill = sd_loss(merged, pooled);
    }
  }
  return parts;
}

int run_losses(const LossesOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    (void)ws_weight(opts.schedule);
  } catch (const ContractError& e) {
    err << "losses: " << e.what() << '\n';
    return 2;
  }
  std::ifstream in(opts.input);
  if (!in) {
    err << opts.input.string() << ": cannot open\n";
    return 1;
  }
  const double ws = ws_weight(opts.schedule);
  int status = 0;
  for (const auto& line : io::read_lines(in)) {
    const std::string origin = opts.input.string() + ":" + std::to_string(line.number);
    try {
      const io::Scene scene = io::scene_from_json(io::json::parse(line.text));
      const LossComponents p = compute_losses(scene, opts.request);
      const double total = overall_loss(p, opts.schedule);
      if (opts.json) {
        out << io::json{{"image_id", scene.image_id},
                        {"L_w", p.mil},
                        {"L_r", {p.refine[0], p.refine[1], p.refine[2]}},
                        {"L_s", p.slv},
                        {"L_d", p.distill},
                        {"w_s", ws},
                        {"total", total}}
                   .dump()
            << '\n';
        continue;
      }
      out << std::left << std::setprecision(6) << std::defaultfloat;
      out << std::setw(10) << "image" << scene.image_id << '\n';
      out << std::setw(10) << "L_w" << p.mil << '\n';
      for (std::size_t k = 0; k < 3; ++k) {
        out << std::setw(10) << ("L_r" + std::to_string(k + 1)) << p.refine[k] << '\n';
      }
      out << std::setw(10) << "L_s" << p.slv << '\n';
      out << std::setw(10) << "L_d" << p.distill << '\n';
      out << std::setw(10) << "w_s" << ws << '\n';
      out << std::setw(10) << "total" << total << '\n';
    } catch (const std::exception& e) {
      err << origin << ": " << e.what() << '\n';
      status = 1;
    }
  }
  return status;
}

int run_synth(const SynthOptions& opts, std::ostream& out, std::ostream& err) {
  if (opts.spec.classes == 0) {
    err << "synth: --classes must be positive\n";
    return 2;
  }
  if (opts.spec.min_width > opts.spec.max_width || opts.spec.min_height > opts.spec.max_height ||
      opts.spec.min_width < 200 || opts.spec.min_height < 200) {
    err << "synth: image size ranges must be ordered and at least 200 pixels\n";
    return 2;
  }
  try {
    const std::vector<io::Scene> scenes = synth::generate(opts.spec);
    Sink sink(opts.output, out);
    for (const auto& s : scenes) sink.stream() << io::dump_line(io::scene_to_json(s)) << '\n';
    if (opts.gt_output) {
      Sink gt(*opts.gt_output, out);
      for (const auto& s : scenes) gt.stream() << io::dump_line(io::ground_truth_to_json(s.image_id, s.gt)) << '\n';
    }
  } catch (const std::exception& e) {
    err << "synth: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int run_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err) {
  if (opts.width == 0 || opts.height == 0) {
    err << "bench: dims must be positive\n";
    return 2;
  }
  std::mt19937_64 rng(opts.seed);
  const ImageDims dims{opts.width, opts.height};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double fast_total = 0.0;
  double slow_total = 0.0;
  double worst = 0.0;

  out << std::left << std::setw(10) << "workload" << std::setw(14) << "fast_ms" << std::setw(14)
      << "oracle_ms" << "max_rel_err\n";
  for (std::size_t w = 0; w < opts.workloads; ++w) {
    ScoredProposals props;
    for (std::size_t k = 0; k < opts.boxes; ++k) {
      const double x0 = unit(rng) * static_cast<double>(dims.width);
      const double x1 = unit(rng) * static_cast<double>(dims.width);
      const double y0 = unit(rng) * static_cast<double>(dims.height);
      const double y1 = unit(rng) * static_cast<double>(dims.height);
      props.boxes.push_back({std::min(x0, x1), std::min(y0, y1), std::max(x0, x1), std::max(y0, y1)});
      props.scores.push_back(unit(rng));
    }
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    const LikelihoodMap fast = accumulate(props, dims);
    const auto t1 = clock::now();
    const LikelihoodMap slow = reference::accumulate_brute_force(props, dims);
    const auto t2 = clock::now();

    double rel = 0.0;
    for (std::size_t k = 0; k < fast.size(); ++k) {
      const double a = fast.values()[k], b = slow.values()[k];
      const double scale = std::max(std::abs(a), std::abs(b));
      if (scale > 0.0) rel = std::max(rel, std::abs(a - b) / scale);
    }
    worst = std::max(worst, rel);
    const double fast_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    const double slow_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();
    fast_total += fast_ms;
    slow_total += slow_ms;
    out << std::setw(10) << w << std::setw(14) << std::fixed << std::setprecision(3) << fast_ms
        << std::setw(14) << slow_ms << std::scientific << std::setprecision(2) << rel
        << std::defaultfloat << '\n';
  }
  out << std::fixed << std::setprecision(3) << "total fast " << fast_total << " ms, oracle "
      << slow_total << " ms, speedup " << std::setprecision(1)
      << (fast_total > 0.0 ? slow_total / fast_total : 0.0) << "x\n"
      << std::defaultfloat;
  if (worst > 1e-9) {
    err << "bench: fast path disagrees with oracle (max relative error " << worst << ")\n";
    return 1;
  }
  return 0;
}

}  // namespace slv::cli
