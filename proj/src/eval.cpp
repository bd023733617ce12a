#include "slv/eval.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_map>

#include "slv/errors.hpp"

namespace slv {

ApResult average_precision(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                           int class_id, double iou_thresh) {
  std::unordered_map<std::string, std::vector<const GroundTruth*>> by_image;
  std::size_t positives = 0;
  for (const auto& g : gts) {
    if (g.class_id != class_id) continue;
    by_image[g.image_id].push_back(&g);
    ++positives;
  }
  if (positives == 0) return {0.0, true};

  std::vector<const Detection*> ranked;
  for (const auto& d : dets) {
    if (d.class_id == class_id) ranked.push_back(&d);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Detection* a, const Detection* b) { return a->score > b->score; });

  std::unordered_map<const GroundTruth*, bool> claimed;
  std::vector<long double> precision;
  std::vector<char> hit;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    const Detection& d = *ranked[k];
    const GroundTruth* best = nullptr;
    double best_iou = -1.0;
    if (auto it = by_image.find(d.image_id); it != by_image.end()) {
      for (const GroundTruth* g : it->second) {
        const double o = iou(d.box, g->box);
        if (o > best_iou) {
          best_iou = o;
          best = g;
        }
      }
    }
    const bool match = best != nullptr && best_iou >= iou_thresh && !claimed[best];
    if (match) {
      claimed[best] = true;
      ++tp;
    }
    hit.push_back(match ? 1 : 0);
    precision.push_back(static_cast<long double>(tp) / static_cast<long double>(k + 1));
  }

  // Precision envelope. Recall only moves at a true positive, by 1/positives,
  // so the area is the mean enveloped precision over those ranks. Extended
  // precision keeps hand-checkable fixtures correctly rounded.
  for (std::size_t k = precision.size(); k-- > 1;) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  long double area = 0.0L;
  for (std::size_t k = 0; k < precision.size(); ++k) {
    if (hit[k]) area += precision[k];
  }
  const double ap = static_cast<double>(area / static_cast<long double>(positives));
  return {ap, false};
}

std::vector<double> coco_thresholds() {
  std::vector<double> t;
  for (int k = 0; k < 10; ++k) t.push_back(0.5 + 0.05 * k);
  return t;
}

MapReport mean_ap(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                  std::span<const double> iou_thresholds) {
  require(!iou_thresholds.empty(), "mean_ap: threshold list is empty");
  std::set<int> classes;
  for (const auto& g : gts) classes.insert(g.class_id);

  MapReport out;
  for (int c : classes) {
    double acc = 0.0;
    for (double t : iou_thresholds) acc += average_precision(dets, gts, c, t).ap;
    out.per_class[c] = acc / static_cast<double>(iou_thresholds.size());
  }
  if (!out.per_class.empty()) {
    double acc = 0.0;
    for (const auto& [c, v] : out.per_class) acc += v;
    out.mean = acc / static_cast<double>(out.per_class.size());
  }
  return out;
}

CorLocReport corloc(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                    double iou_thresh) {
  // (class, image) -> ground truths
  std::map<int, std::map<std::string, std::vector<const GroundTruth*>>> positives;
  for (const auto& g : gts) positives[g.class_id][g.image_id].push_back(&g);

  std::map<std::pair<int, std::string>, const Detection*> top;
  for (const auto& d : dets) {
    auto& slot = top[{d.class_id, d.image_id}];
    if (slot == nullptr || d.score > slot->score) slot = &d;
  }

  CorLocReport out;
  for (const auto& [c, images] : positives) {
    std::size_t hits = 0;
    for (const auto& [image, boxes] : images) {
      auto it = top.find({c, image});
      if (it == top.end()) continue;
      const bool hit = std::any_of(boxes.begin(), boxes.end(), [&](const GroundTruth* g) {
        return iou(it->second->box, g->box) >= iou_thresh;
      });
      if (hit) ++hits;
    }
    out.per_class[c] = static_cast<double>(hits) / static_cast<double>(images.size());
  }
  if (!out.per_class.empty()) {
    double acc = 0.0;
    for (const auto& [c, v] : out.per_class) acc += v;
    out.mean = acc / static_cast<double>(out.per_class.size());
  }
  return out;
}

}  // namespace slv
