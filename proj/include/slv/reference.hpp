#pragma once

// Deliberately naive implementations that follow the textbook definitions
// line by line. They exist to cross-check the production paths and to give
// `slv bench` a baseline; nothing in the library calls them.

#include <cstddef>
#include <vector>

#include "slv/likelihood.hpp"
#include "slv/voting.hpp"

namespace slv::reference {

/// Adds every proposal's score to each pixel it covers, one pixel at a time,
/// in proposal order.
LikelihoodMap accumulate_brute_force(const ScoredProposals& proposals, const ImageDims& dims);

struct StepThroughResult {
  std::vector<Box> boxes;
  std::size_t iterations = 0;
};

/// Box generation executed literally: recompute the threshold as the mean of
/// the non-zero elements, then repeatedly scan the whole map for its maximum
/// (first in row-major order), walk the four rays with p_min reset to 1 for
/// each, take the failing coordinate (clamped to the image) as the edge, and
/// zero the inclusive rectangle.
StepThroughResult adaptive_search_step_through(LikelihoodMap m, int step, double tolerance);

}  // namespace slv::reference
