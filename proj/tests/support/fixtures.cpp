#include "fixtures.hpp"

#include <algorithm>

namespace slv::fixtures {

void paint(LikelihoodMap& m, std::size_t row, std::size_t col, std::size_t h, std::size_t w,
           double value) {
  for (std::size_t i = row; i < row + h; ++i) {
    for (std::size_t j = col; j < col + w; ++j) m.at(i, j) = value;
  }
}

LikelihoodMap single_plateau() {
  LikelihoodMap m(ImageDims{200, 100});
  paint(m, 20, 30, 30, 40, 1.0);
  return m;
}

LikelihoodMap stepped_plateaus() {
  LikelihoodMap m(ImageDims{200, 100}, 0.01);
  paint(m, 20, 30, 30, 40, 1.0);
  paint(m, 50, 120, 30, 40, 0.9);
  return m;
}

LikelihoodMap bridged_plateaus() {
  LikelihoodMap m(ImageDims{200, 120});
  paint(m, 30, 20, 60, 60, 1.0);
  paint(m, 30, 120, 60, 60, 1.0);
  paint(m, 50, 80, 20, 40, 0.6);
  return m;
}

LikelihoodMap salient_pair() {
  LikelihoodMap m(ImageDims{200, 120}, 0.05);
  paint(m, 30, 20, 60, 60, 1.0);
  paint(m, 30, 120, 60, 60, 0.35);
  return m;
}

ProposalSet valley_pair() {
  ProposalSet p{ImageDims{200, 100}, {}, {}};
  std::vector<double> scores;
  for (int k = 0; k < 10; ++k) {
    p.boxes.push_back({20, 20, 80, 80});
    scores.push_back(0.9);
  }
  for (int k = 0; k < 10; ++k) {
    p.boxes.push_back({120, 20, 180, 80});
    scores.push_back(0.9);
  }
  for (int k = 0; k < 3; ++k) {
    p.boxes.push_back({20, 20, 180, 80});
    scores.push_back(0.3);
  }
  p.scores = ScoreMatrix(1, scores.size(), scores);
  return p;
}

ScoredProposals random_proposals(std::mt19937_64& rng, const ImageDims& dims, std::size_t count) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ScoredProposals p;
  const auto W = static_cast<double>(dims.width);
  const auto H = static_cast<double>(dims.height);
  for (std::size_t k = 0; k < count; ++k) {
    const double x0 = unit(rng) * W, x1 = unit(rng) * W;
    const double y0 = unit(rng) * H, y1 = unit(rng) * H;
    p.boxes.push_back({std::min(x0, x1), std::min(y0, y1), std::max(x0, x1), std::max(y0, y1)});
    p.scores.push_back(unit(rng));
  }
  return p;
}

LikelihoodMap random_scaled_map(std::mt19937_64& rng, const ImageDims& dims) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, 40);
  const auto W = static_cast<double>(dims.width);
  const auto H = static_cast<double>(dims.height);
  ScoredProposals p;
  const int n = count(rng);
  for (int k = 0; k < n; ++k) {
    const double w = 2.0 + unit(rng) * W * 0.6;
    const double h = 2.0 + unit(rng) * H * 0.6;
    const double x = unit(rng) * (W - std::min(w, W));
    const double y = unit(rng) * (H - std::min(h, H));
    p.boxes.push_back({x, y, std::min(W, x + w), std::min(H, y + h)});
    p.scores.push_back(unit(rng));
  }
  LikelihoodMap m = accumulate(p, dims);
  if (unit(rng) < 0.3) {
    for (double& v : m.values()) {
      if (unit(rng) < 0.05) v += unit(rng);
    }
  }
  return scale_unit(m);
}

ScoreMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  ScoreMatrix m(rows, cols);
  for (double& v : m.data()) v = u(rng);
  return m;
}

ScoreMatrix random_probabilities(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  ScoreMatrix m(rows, cols);
  for (std::size_t r = 0; r < cols; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < rows; ++c) s += (m(c, r) = u(rng));
    for (std::size_t c = 0; c < rows; ++c) m(c, r) /= s;
  }
  return m;
}

}  // namespace slv::fixtures
