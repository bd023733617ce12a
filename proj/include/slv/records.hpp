#pragma once

// JSON-lines record formats shared by the command-line tools.
//
//   scene:        {"image_id", "width", "height", "labels": [0/1 x C],
//                  "proposals": [[x0,y0,x1,y1], ...], "scores": C x R,
//                  "gt": [{"class", "box"}], and optionally "cls_logits",
//                  "det_logits" (C x R), "branch_scores" (3 x (C+1) x R),
//                  "refine_scores" ((C+1) x R), "reg_deltas" (4(C+1) x R),
//                  "features": {"height", "width", "depth", "values"}}
//   supervision / detections / ground truth:
//                 {"image_id", "entries": [{"class", "boxes": [[...]],
//                  "scores": [...]}]}
//
// Coordinates are written with 2 decimals, every other number with 6
// significant digits.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "slv/eval.hpp"
#include "slv/geometry.hpp"
#include "slv/likelihood.hpp"
#include "slv/score_matrix.hpp"
#include "slv/voting.hpp"

namespace slv::io {

using nlohmann::json;

/// Malformed record; carries the offending field in the message.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double round_coordinate(double v);
double round_significant(double v);

struct LabeledBox {
  int class_id = 0;
  Box box;
  friend bool operator==(const LabeledBox&, const LabeledBox&) = default;
};

struct Scene {
  std::string image_id;
  ImageDims dims;
  ImageLabel labels;
  std::vector<Box> proposals;
  std::optional<ScoreMatrix> scores;  // phi-bar, C x R
  std::vector<LabeledBox> gt;
  std::optional<ScoreMatrix> cls_logits;
  std::optional<ScoreMatrix> det_logits;
  std::vector<ScoreMatrix> branch_scores;
  std::optional<ScoreMatrix> refine_scores;
  std::optional<ScoreMatrix> reg_deltas;
  std::optional<FeatureMap> features;

  std::size_t num_classes() const { return labels.size(); }

  /// phi-bar: `scores` when present, else the mean of the class rows of the
  /// refinement branches.
  ScoreMatrix average_scores() const;

  /// Throws FormatError when shapes disagree or boxes leave the image.
  void validate() const;
};

json scene_to_json(const Scene& scene);
Scene scene_from_json(const json& j);

json supervision_to_json(const Supervision& sup);
Supervision supervision_from_json(const json& j);

json ground_truth_to_json(const std::string& image_id, const std::vector<LabeledBox>& gt);

/// Appends the detections of one supervision-style record. Missing scores
/// default to 1.
void append_detections(const json& record, std::vector<Detection>& out);

/// Appends the ground truth of one record, accepting either a
/// supervision-style record or a scene record carrying "gt".
void append_ground_truth(const json& record, std::vector<GroundTruth>& out);

std::string dump_line(const json& j);

/// Parsed non-empty lines of a JSON-lines stream, with 1-based line numbers.
struct Line {
  std::size_t number;
  std::string text;
};
std::vector<Line> read_lines(std::istream& is);

std::vector<std::string> read_class_names(std::istream& is);

}  // namespace slv::io
