#include "slv/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "slv/mil_losses.hpp"

namespace slv::synth {

namespace {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  std::size_t index(std::size_t lo, std::size_t hi) {  // inclusive
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  double normal(double sigma) { return std::normal_distribution<double>(0.0, sigma)(rng_); }

 private:
  std::mt19937_64 rng_;
};

Box expand(const Box& b, double margin) {
  return {b.x_min - margin, b.y_min - margin, b.x_max + margin, b.y_max + margin};
}

bool overlaps(const Box& a, const Box& b) {
  return a.x_min < b.x_max && b.x_min < a.x_max && a.y_min < b.y_max && b.y_min < a.y_max;
}

std::vector<io::LabeledBox> plant_objects(const SynthSpec& spec, const ImageDims& dims,
                                          Sampler& rng) {
  std::vector<io::LabeledBox> out;
  const double w = static_cast<double>(dims.width);
  const double h = static_cast<double>(dims.height);
  for (int attempt = 0; attempt < 500 && out.size() < spec.objects; ++attempt) {
    const double bw = std::floor(rng.uniform(70.0, std::min(170.0, 0.45 * w)));
    const double bh = std::floor(rng.uniform(70.0, std::min(170.0, 0.45 * h)));
    const double x = std::floor(rng.uniform(4.0, w - bw - 4.0));
    const double y = std::floor(rng.uniform(4.0, h - bh - 4.0));
    const Box b{x, y, x + bw, y + bh};
    const bool clear = std::none_of(out.begin(), out.end(), [&](const io::LabeledBox& o) {
      return overlaps(expand(o.box, 40.0), b);
    });
    if (!clear) continue;
    out.push_back({static_cast<int>(rng.index(0, spec.classes - 1)), b});
  }
  return out;
}

Box jitter(const Box& gt, double sigma, const ImageDims& dims, Sampler& rng) {
  const double w = gt.width();
  const double h = gt.height();
  Box b{gt.x_min + rng.normal(sigma * w), gt.y_min + rng.normal(sigma * h),
        gt.x_max + rng.normal(sigma * w), gt.y_max + rng.normal(sigma * h)};
  if (b.x_max - b.x_min < 8.0) b.x_max = b.x_min + 8.0;
  if (b.y_max - b.y_min < 8.0) b.y_max = b.y_min + 8.0;
  b = clip(b, dims);
  return {io::round_coordinate(b.x_min), io::round_coordinate(b.y_min),
          io::round_coordinate(b.x_max), io::round_coordinate(b.y_max)};
}

Box random_box(const ImageDims& dims, Sampler& rng) {
  const double w = static_cast<double>(dims.width);
  const double h = static_cast<double>(dims.height);
  const double bw = rng.uniform(16.0, std::min(260.0, w));
  const double bh = rng.uniform(16.0, std::min(260.0, h));
  const double x = rng.uniform(0.0, w - bw);
  const double y = rng.uniform(0.0, h - bh);
  return {io::round_coordinate(x), io::round_coordinate(y), io::round_coordinate(x + bw),
          io::round_coordinate(y + bh)};
}

ScoreMatrix random_matrix(std::size_t rows, std::size_t cols, double sigma, Sampler& rng) {
  ScoreMatrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal(sigma);
  return m;
}

// Adds the fields consumed by `slv losses`, consistent with the class scores.
void add_training_outputs(io::Scene& s, const std::vector<int>& owner, Sampler& rng) {
  const std::size_t c = s.num_classes();
  const std::size_t r = s.proposals.size();
  const ScoreMatrix& avg = *s.scores;

  ScoreMatrix cls = random_matrix(c, r, 0.5, rng);
  ScoreMatrix det = random_matrix(c, r, 0.5, rng);
  for (std::size_t k = 0; k < r; ++k) {
    if (owner[k] < 0) continue;
    const auto oc = static_cast<std::size_t>(owner[k]);
    cls(oc, k) += 3.0;
    det(oc, k) += 4.0 * avg(oc, k);
  }
  s.cls_logits = std::move(cls);
  s.det_logits = std::move(det);

  ScoreMatrix mean(c, r);
  for (int b = 0; b < 3; ++b) {
    ScoreMatrix branch(c + 1, r);
    for (std::size_t k = 0; k < r; ++k) {
      double fg = 0.0;
      for (std::size_t i = 0; i < c; ++i) {
        const double v = std::max(0.0, avg(i, k) * (1.0 + rng.normal(0.05)));
        branch(i, k) = io::round_significant(v);
        fg += branch(i, k);
      }
      if (fg > 0.99) {
        for (std::size_t i = 0; i < c; ++i) branch(i, k) = io::round_significant(branch(i, k) * 0.99 / fg);
        fg = 0.0;
        for (std::size_t i = 0; i < c; ++i) fg += branch(i, k);
      }
      branch(c, k) = io::round_significant(1.0 - fg);
      for (std::size_t i = 0; i < c; ++i) mean(i, k) += branch(i, k) / 3.0;
    }
    s.branch_scores.push_back(std::move(branch));
  }
  s.scores = std::move(mean);

  s.refine_scores = softmax_over_classes(random_matrix(c + 1, r, 1.0, rng));
  s.reg_deltas = random_matrix(4 * (c + 1), r, 0.1, rng);

  const std::size_t fh = std::max<std::size_t>(1, s.dims.height / 16);
  const std::size_t fw = std::max<std::size_t>(1, s.dims.width / 16);
  const std::size_t depth = 8;
  std::vector<double> feats(fh * fw * depth);
  for (double& v : feats) v = io::round_significant(rng.uniform(0.0, 1.0));
  s.features.emplace(fh, fw, depth, std::move(feats));
}

}  // namespace

std::vector<io::Scene> generate(const SynthSpec& spec) {
  Sampler rng(spec.seed);
  std::vector<io::Scene> scenes;
  scenes.reserve(spec.scenes);
  for (std::size_t n = 0; n < spec.scenes; ++n) {
    io::Scene s;
    s.image_id = "synth_" + std::to_string(spec.seed) + "_" + std::to_string(n);
    s.dims = {rng.index(spec.min_width, spec.max_width), rng.index(spec.min_height, spec.max_height)};
    s.labels.assign(spec.classes, 0);
    s.gt = plant_objects(spec, s.dims, rng);
    for (const auto& g : s.gt) s.labels[static_cast<std::size_t>(g.class_id)] = 1;

    std::vector<std::vector<double>> columns;
    std::vector<int> owner;
    for (const auto& g : s.gt) {
      for (std::size_t k = 0; k < spec.proposals_per_object; ++k) {
        // Spread of jitter so overlaps range from near-perfect to poor.
        const double sigma = spec.noise * (0.3 + 2.2 * rng.uniform(0.0, 1.0));
        const Box b = jitter(g.box, sigma, s.dims, rng);
        const double overlap = iou(b, g.box);
        std::vector<double> col(spec.classes);
        for (auto& v : col) v = rng.uniform(0.0, 0.0005);
        const double peak = 0.9 * std::pow(overlap, 3.0) * (1.0 + 0.1 * rng.normal(1.0));
        col[static_cast<std::size_t>(g.class_id)] = std::clamp(peak, 0.0, 0.9);
        s.proposals.push_back(b);
        columns.push_back(std::move(col));
        owner.push_back(g.class_id);
      }
    }
    for (std::size_t k = 0; k < spec.clutter; ++k) {
      s.proposals.push_back(random_box(s.dims, rng));
      std::vector<double> col(spec.classes);
      for (auto& v : col) v = rng.uniform(0.0, spec.clutter_score);
      columns.push_back(std::move(col));
      owner.push_back(-1);
    }

    ScoreMatrix scores(spec.classes, s.proposals.size());
    for (std::size_t k = 0; k < columns.size(); ++k) {
      for (std::size_t c = 0; c < spec.classes; ++c) scores(c, k) = io::round_significant(columns[k][c]);
    }
    s.scores = std::move(scores);
    if (spec.full) add_training_outputs(s, owner, rng);
    scenes.push_back(std::move(s));
  }
  return scenes;
}

}  // namespace slv::synth
