#include "slv/voting.hpp"

#include <algorithm>
#include <numeric>

#include "slv/errors.hpp"

namespace slv {

void SearchParams::validate() const {
  require(step >= 1, "SearchParams: step must be >= 1");
  require(tolerance >= 0.0, "SearchParams: tolerance must be >= 0");
  require(score_threshold >= 0.0 && score_threshold < 1.0,
          "SearchParams: score threshold must lie in [0, 1)");
}

void validate_label(std::span<const int> label) {
  for (int v : label) require(v == 0 || v == 1, "ImageLabel: entries must be 0 or 1");
}

ScoredProposals filter_proposals(std::span<const double> scores,
                                 std::span<const Box> boxes, double score_threshold,
                                 int class_id) {
  require(scores.size() == boxes.size(), "filter_proposals: scores and boxes differ in length");
  ScoredProposals out;
  out.class_id = class_id;
  for (std::size_t r = 0; r < scores.size(); ++r) {
    if (scores[r] > score_threshold) {
      out.boxes.push_back(boxes[r]);
      out.scores.push_back(scores[r]);
    }
  }
  return out;
}

namespace {

constexpr double kScaleSlack = 1e-9;

// Walks one ray from the seed and returns the first coordinate that failed the
// acceptance test, clamped into [0, limit).
std::size_t expand(const LikelihoodMap& m, std::size_t row, std::size_t col, int d_row,
                   int d_col, double threshold, const SearchParams& params) {
  const auto rows = static_cast<long>(m.height());
  const auto cols = static_cast<long>(m.width());
  long r = static_cast<long>(row);
  long c = static_cast<long>(col);
  double p_min = 1.0;
  while (true) {
    if (r < 0 || c < 0 || r >= rows || c >= cols) {
      const long clamped = d_row != 0 ? std::clamp(r, 0L, rows - 1) : std::clamp(c, 0L, cols - 1);
      return static_cast<std::size_t>(clamped);
    }
    const double v = m.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    if (!(threshold <= v && v <= p_min + params.tolerance)) {
      return static_cast<std::size_t>(d_row != 0 ? r : c);
    }
    p_min = v;
    r += d_row * params.step;
    c += d_col * params.step;
  }
}

}  // namespace

SearchOutcome adaptive_search(LikelihoodMap m, const SearchParams& params) {
  params.validate();
  SearchOutcome out;
  const double peak = m.max();
  require(peak <= 1.0 + kScaleSlack, "adaptive_search: map is not scaled to [0, 1]");

  out.threshold = search_threshold(m);
  if (out.threshold == kNoSearch) return out;
  require(out.threshold <= peak, "adaptive_search: positive mean exceeds the maximum");

  // Values only ever drop to zero, so walking the candidates in descending
  // order and skipping cleared pixels visits the successive global maxima.
  auto values = m.values();
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] >= out.threshold) order.push_back(k);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] != values[b] ? values[a] > values[b] : a < b;
  });
  out.candidates = order.size();

  const std::size_t width = m.width();
  for (std::size_t seed : order) {
    const double v = values[seed];
    if (v < out.threshold) continue;  // cleared by an earlier box
    ++out.iterations;
    require(out.iterations <= m.size(), "adaptive_search: iteration bound exceeded");

    const std::size_t row = seed / width;
    const std::size_t col = seed % width;
    const std::size_t left = expand(m, row, col, 0, -1, out.threshold, params);
    const std::size_t top = expand(m, row, col, -1, 0, out.threshold, params);
    const std::size_t right = expand(m, row, col, 0, +1, out.threshold, params);
    const std::size_t bottom = expand(m, row, col, +1, 0, out.threshold, params);

    for (std::size_t i = top; i <= bottom; ++i) {
      std::fill_n(values.begin() + static_cast<long>(i * width + left), right - left + 1, 0.0);
    }
    const Box b{static_cast<double>(left), static_cast<double>(top),
                static_cast<double>(right + 1), static_cast<double>(bottom + 1)};
    out.boxes.push_back({clip(b, m.dims()), v});
  }
  return out;
}

std::vector<PseudoBox> threshold_baseline(const LikelihoodMap& m, double t) {
  require(t > 0.0 && t < 1.0, "threshold_baseline: threshold must lie in (0, 1)");
  const std::size_t w = m.width();
  const std::size_t h = m.height();
  std::vector<char> seen(m.size(), 0);
  std::vector<std::size_t> stack;
  std::vector<PseudoBox> out;

  for (std::size_t start = 0; start < m.size(); ++start) {
    if (seen[start] || !(m.values()[start] > t)) continue;
    std::size_t r0 = h, r1 = 0, c0 = w, c1 = 0;
    double peak = 0.0;
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t k = stack.back();
      stack.pop_back();
      const std::size_t r = k / w;
      const std::size_t c = k % w;
      r0 = std::min(r0, r);
      r1 = std::max(r1, r);
      c0 = std::min(c0, c);
      c1 = std::max(c1, c);
      peak = std::max(peak, m.values()[k]);
      auto visit = [&](std::size_t n) {
        if (!seen[n] && m.values()[n] > t) {
          seen[n] = 1;
          stack.push_back(n);
        }
      };
      if (c > 0) visit(k - 1);
      if (c + 1 < w) visit(k + 1);
      if (r > 0) visit(k - w);
      if (r + 1 < h) visit(k + w);
    }
    out.push_back({Box{static_cast<double>(c0), static_cast<double>(r0),
                       static_cast<double>(c1 + 1), static_cast<double>(r1 + 1)},
                   peak});
  }
  return out;
}

LikelihoodMap class_likelihood(std::span<const Box> boxes, const ScoreMatrix& avg_scores,
                               int class_id, const ImageDims& dims,
                               double score_threshold) {
  require(class_id >= 0 && static_cast<std::size_t>(class_id) < avg_scores.rows(),
          "class_likelihood: class id out of range");
  require(avg_scores.cols() == boxes.size(),
          "class_likelihood: score columns do not match proposal count");
  const ScoredProposals kept = filter_proposals(
      avg_scores.row(static_cast<std::size_t>(class_id)), boxes, score_threshold, class_id);
  return accumulate(kept, dims);
}

Supervision generate_supervision(std::span<const Box> boxes, const ScoreMatrix& avg_scores,
                                 std::span<const int> label, const ImageDims& dims,
                                 const SearchParams& params, std::string image_id) {
  const BoxExtractor adaptive = [&params](const LikelihoodMap& scaled) {
    return adaptive_search(scaled, params).boxes;
  };
  return generate_supervision(boxes, avg_scores, label, dims, params, adaptive,
                              std::move(image_id));
}

Supervision generate_supervision(std::span<const Box> boxes, const ScoreMatrix& avg_scores,
                                 std::span<const int> label, const ImageDims& dims,
                                 const SearchParams& params, const BoxExtractor& extract,
                                 std::string image_id) {
  params.validate();
  validate_label(label);
  require(dims.valid(), "generate_supervision: image dims must be positive");
  require(avg_scores.rows() == label.size(),
          "generate_supervision: score rows do not match label length");
  require(avg_scores.cols() == boxes.size(),
          "generate_supervision: score columns do not match proposal count");

  Supervision sup;
  sup.image_id = std::move(image_id);
  for (std::size_t c = 0; c < label.size(); ++c) {
    if (label[c] != 1) continue;
    const auto cls = static_cast<int>(c);
    const LikelihoodMap raw =
        class_likelihood(boxes, avg_scores, cls, dims, params.score_threshold);
    sup.entries.push_back({cls, extract(scale_unit(raw))});
  }
  return sup;
}

}  // namespace slv
