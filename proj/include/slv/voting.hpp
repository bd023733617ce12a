#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "slv/geometry.hpp"
#include "slv/likelihood.hpp"
#include "slv/score_matrix.hpp"

namespace slv {

struct SearchParams {
  int step = 5;                   // s, pixels per expansion step
  double tolerance = 0.05;        // epsilon, allowed rise over the running minimum
  double score_threshold = 0.001; // T_score, proposals at or below are dropped

  void validate() const;
};

/// Image-level label vector y: entry c is 1 when class c is present.
using ImageLabel = std::vector<int>;

void validate_label(std::span<const int> label);

/// A pseudo ground-truth box together with the likelihood value that seeded
/// it, which doubles as the box's confidence.
struct PseudoBox {
  Box box;
  double peak = 0.0;
};

struct ClassBoxes {
  int class_id = 0;
  std::vector<PseudoBox> boxes;
};

/// Instance-level pseudo annotation for one image.
struct Supervision {
  std::string image_id;
  std::vector<ClassBoxes> entries;
};

ScoredProposals filter_proposals(std::span<const double> scores,
                                 std::span<const Box> boxes, double score_threshold,
                                 int class_id = 0);

struct SearchOutcome {
  std::vector<PseudoBox> boxes;
  double threshold = kNoSearch;  // T_search
  std::size_t iterations = 0;
  std::size_t candidates = 0;  // pixels with value >= T_search
};

/// Adaptive box search over a map scaled to [0, 1]. The map is taken by value
/// and consumed: every emitted box is zeroed before the next seed is chosen.
///
/// Seeds are visited in descending value order, ties broken by row-major
/// index. From each seed four rays (left, up, right, down) advance `step`
/// pixels at a time while the value stays within [T_search, p_min + eps],
/// p_min being the last accepted value on that ray (reset to 1 per ray). The
/// box edge is the first position that failed, or the image border.
SearchOutcome adaptive_search(LikelihoodMap m, const SearchParams& params);

/// Minimum bounding rectangles of the 4-connected regions with value > t.
std::vector<PseudoBox> threshold_baseline(const LikelihoodMap& m, double t);

/// Raw likelihood map of one class: the class row of `avg_scores` filtered by
/// T_score and accumulated over the image.
LikelihoodMap class_likelihood(std::span<const Box> boxes, const ScoreMatrix& avg_scores,
                               int class_id, const ImageDims& dims,
                               double score_threshold);

using BoxExtractor = std::function<std::vector<PseudoBox>(const LikelihoodMap& scaled)>;

/// Filter, accumulate, scale and search every positive class.
Supervision generate_supervision(std::span<const Box> boxes, const ScoreMatrix& avg_scores,
                                 std::span<const int> label, const ImageDims& dims,
                                 const SearchParams& params, std::string image_id = {});

/// Same pipeline with a caller-supplied box extractor (e.g. the thresholding
/// baseline).
Supervision generate_supervision(std::span<const Box> boxes, const ScoreMatrix& avg_scores,
                                 std::span<const int> label, const ImageDims& dims,
                                 const SearchParams& params, const BoxExtractor& extract,
                                 std::string image_id = {});

}  // namespace slv
