#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "slv/geometry.hpp"

namespace slv {

struct Detection {
  std::string image_id;
  int class_id = 0;
  Box box;
  double score = 0.0;
};

struct GroundTruth {
  std::string image_id;
  int class_id = 0;
  Box box;
  bool difficult = false;  // reserved; not used by the metrics
};

struct ApResult {
  double ap = 0.0;
  bool no_positives = false;
};

/// VOC-style AP for one class: detections matched greedily in descending
/// score order (ties keep input order) against their highest-IoU ground truth
/// of the same image; a match needs IoU >= iou_thresh and an unclaimed ground
/// truth. The precision envelope is integrated over every recall step.
ApResult average_precision(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                           int class_id, double iou_thresh);

/// IoU thresholds 0.50, 0.55, ..., 0.95.
std::vector<double> coco_thresholds();

struct MapReport {
  std::map<int, double> per_class;  // classes with at least one ground truth
  double mean = 0.0;
};

/// Mean over classes (those with ground truth) of the mean AP over thresholds.
MapReport mean_ap(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                  std::span<const double> iou_thresholds);

struct CorLocReport {
  std::map<int, double> per_class;
  double mean = 0.0;
};

/// Per class, the fraction of images holding that class whose top-scoring
/// detection of the class overlaps one of its ground truths at IoU >= 0.5.
CorLocReport corloc(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                    double iou_thresh = 0.5);

}  // namespace slv
