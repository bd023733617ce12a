#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "slv/likelihood.hpp"
#include "slv/score_matrix.hpp"

namespace slv::fixtures {

/// Sets pixels of rows [row, row+h) and columns [col, col+w) to `value`.
void paint(LikelihoodMap& m, std::size_t row, std::size_t col, std::size_t h, std::size_t w,
           double value);

/// 100 x 200 map, zero background, a 40 x 30 plateau of 1.0 at (row 20, col 30).
LikelihoodMap single_plateau();

/// 100 x 200 map, 0.01 haze, 40x30 plateaus of 1.0 at (20, 30) and 0.9 at (50, 120).
LikelihoodMap stepped_plateaus();

/// 120 x 200 map: 60 x 60 plateaus of 1.0 at columns 20 and 120, joined by a
/// 20-row bridge of 0.6. Zero background.
LikelihoodMap bridged_plateaus();

/// 120 x 200 map: 60 x 60 plateaus of 1.0 and 0.35 on a 0.05 haze.
LikelihoodMap salient_pair();

/// Proposals for two same-class objects with a shallow spanning proposal
/// between them: 10 x (20,20,80,80) and 10 x (120,20,180,80) at 0.9, plus
/// 3 x (20,20,180,80) at 0.3, on a 200 x 100 image.
struct ProposalSet {
  ImageDims dims;
  std::vector<Box> boxes;
  ScoreMatrix scores;  // 1 x R
};
ProposalSet valley_pair();

/// Random proposals covering a random-size image; `max_boxes` bounds the count.
ScoredProposals random_proposals(std::mt19937_64& rng, const ImageDims& dims, std::size_t count);

/// Accumulated random proposals, optionally salted with pixel noise, scaled to
/// [0, 1].
LikelihoodMap random_scaled_map(std::mt19937_64& rng, const ImageDims& dims);

ScoreMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double scale);

/// Column-stochastic random matrix (each column sums to 1).
ScoreMatrix random_probabilities(std::mt19937_64& rng, std::size_t rows, std::size_t cols);

}  // namespace slv::fixtures
