#include "slv/mil_losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slv/errors.hpp"

namespace slv {

namespace {

double safe_log(double p) { return std::log(std::max(p, kProbFloor)); }

}  // namespace

ScoreMatrix softmax_over_classes(const ScoreMatrix& logits) {
  ScoreMatrix out(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.cols(); ++r) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < logits.rows(); ++c) peak = std::max(peak, logits(c, r));
    double total = 0.0;
    for (std::size_t c = 0; c < logits.rows(); ++c) {
      out(c, r) = std::exp(logits(c, r) - peak);
      total += out(c, r);
    }
    for (std::size_t c = 0; c < logits.rows(); ++c) out(c, r) /= total;
  }
  return out;
}

ScoreMatrix softmax_over_proposals(const ScoreMatrix& logits) {
  ScoreMatrix out(logits.rows(), logits.cols());
  for (std::size_t c = 0; c < logits.rows(); ++c) {
    auto in = logits.row(c);
    auto dst = out.row(c);
    const double peak = in.empty() ? 0.0 : *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t r = 0; r < in.size(); ++r) {
      dst[r] = std::exp(in[r] - peak);
      total += dst[r];
    }
    for (double& v : dst) v /= total;
  }
  return out;
}

WsddnScores wsddn_scores(const ScoreMatrix& cls_logits, const ScoreMatrix& det_logits) {
  require(cls_logits.same_shape(det_logits), "wsddn_scores: logit shapes differ");
  const ScoreMatrix cls = softmax_over_classes(cls_logits);
  const ScoreMatrix det = softmax_over_proposals(det_logits);
  WsddnScores out{ScoreMatrix(cls.rows(), cls.cols()), std::vector<double>(cls.rows(), 0.0)};
  for (std::size_t c = 0; c < cls.rows(); ++c) {
    for (std::size_t r = 0; r < cls.cols(); ++r) {
      out.proposal(c, r) = cls(c, r) * det(c, r);
      out.image[c] += out.proposal(c, r);
    }
    out.image[c] = std::clamp(out.image[c], 0.0, 1.0);
  }
  return out;
}

double mil_loss(std::span<const double> image_scores, std::span<const int> label) {
  require(image_scores.size() == label.size(), "mil_loss: score and label lengths differ");
  double loss = 0.0;
  for (std::size_t c = 0; c < label.size(); ++c) {
    const double p = std::clamp(image_scores[c], kProbFloor, 1.0 - kProbFloor);
    loss -= label[c] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return loss;
}

std::vector<double> mil_loss_gradient(std::span<const double> image_scores,
                                      std::span<const int> label) {
  require(image_scores.size() == label.size(), "mil_loss: score and label lengths differ");
  std::vector<double> grad(label.size(), 0.0);
  for (std::size_t c = 0; c < label.size(); ++c) {
    const double p = image_scores[c];
    if (p <= kProbFloor || p >= 1.0 - kProbFloor) continue;
    grad[c] = label[c] == 1 ? -1.0 / p : 1.0 / (1.0 - p);
  }
  return grad;
}

void ClusterAssignment::validate(std::size_t num_proposals, std::size_t num_classes) const {
  require(background_weights.size() == num_proposals,
          "ClusterAssignment: one background weight per proposal expected");
  std::vector<int> hits(num_proposals, 0);
  auto mark = [&](std::size_t r) {
    require(r < num_proposals, "ClusterAssignment: proposal index out of range");
    ++hits[r];
  };
  for (const auto& cl : clusters) {
    require(!cl.members.empty(), "ClusterAssignment: empty foreground cluster");
    require(cl.label >= 0 && static_cast<std::size_t>(cl.label) < num_classes,
            "ClusterAssignment: cluster label out of range");
    for (std::size_t r : cl.members) mark(r);
  }
  for (std::size_t r : background) mark(r);
  for (int h : hits) require(h == 1, "ClusterAssignment: proposals must be partitioned");
}

double cluster_loss(const ScoreMatrix& scores, const ClusterAssignment& assign) {
  require(scores.rows() >= 2, "cluster_loss: expects C+1 rows");
  const std::size_t bg_row = scores.rows() - 1;
  assign.validate(scores.cols(), bg_row);

  double acc = 0.0;
  for (const auto& cl : assign.clusters) {
    double mass = 0.0;
    for (std::size_t r : cl.members) mass += scores(static_cast<std::size_t>(cl.label), r);
    const auto m = static_cast<double>(cl.members.size());
    acc += cl.confidence * m * safe_log(mass / m);
  }
  for (std::size_t r : assign.background) {
    acc += assign.background_weights[r] * safe_log(scores(bg_row, r));
  }
  return -acc / static_cast<double>(scores.cols());
}

ClusterAssignment build_clusters(const ScoreMatrix& scores, std::span<const Box> boxes,
                                 std::span<const int> label, double iou_fg) {
  require(scores.cols() == boxes.size(), "build_clusters: score columns do not match boxes");
  require(scores.rows() >= label.size(), "build_clusters: fewer score rows than classes");
  validate_label(label);

  const std::size_t n = boxes.size();
  std::vector<char> is_center(n, 0);
  std::vector<std::size_t> centers;
  ClusterAssignment out;
  for (std::size_t c = 0; c < label.size(); ++c) {
    if (label[c] != 1) continue;
    std::size_t best = n;
    for (std::size_t r = 0; r < n; ++r) {
      if (is_center[r]) continue;
      if (best == n || scores(c, r) > scores(c, best)) best = r;
    }
    if (best == n) continue;
    is_center[best] = 1;
    centers.push_back(best);
    out.clusters.push_back({static_cast<int>(c), scores(c, best), {best}});
  }

  out.background_weights.assign(n, 0.0);
  for (std::size_t k = 0; k < centers.size(); ++k) {
    out.background_weights[centers[k]] = out.clusters[k].confidence;
  }
  for (std::size_t r = 0; r < n; ++r) {
    if (is_center[r]) continue;
    std::size_t best = centers.size();
    double best_iou = -1.0;
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const double o = iou(boxes[r], boxes[centers[k]]);
      if (o > best_iou) {
        best_iou = o;
        best = k;
      }
    }
    if (best == centers.size()) {
      out.background.push_back(r);
      continue;
    }
    out.background_weights[r] = out.clusters[best].confidence;
    if (best_iou >= iou_fg) {
      out.clusters[best].members.push_back(r);
    } else {
      out.background.push_back(r);
    }
  }
  return out;
}

std::array<double, 4> encode_deltas(const Box& from, const Box& to) {
  const double fw = from.width(), fh = from.height();
  const double tw = to.width(), th = to.height();
  require(fw > 0.0 && fh > 0.0 && tw > 0.0 && th > 0.0,
          "encode_deltas: boxes must have positive size");
  return {(to.x_min + 0.5 * tw - (from.x_min + 0.5 * fw)) / fw,
          (to.y_min + 0.5 * th - (from.y_min + 0.5 * fh)) / fh, std::log(tw / fw),
          std::log(th / fh)};
}

Box decode_deltas(const Box& from, const std::array<double, 4>& d) {
  const double fw = from.width(), fh = from.height();
  const double cx = from.x_min + 0.5 * fw + d[0] * fw;
  const double cy = from.y_min + 0.5 * fh + d[1] * fh;
  const double w = fw * std::exp(d[2]);
  const double h = fh * std::exp(d[3]);
  return {cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
}

SlvTargets assign_slv_targets(const Supervision& sup, std::span<const Box> boxes,
                              std::size_t num_classes, double iou_fg) {
  SlvTargets out;
  out.num_classes = num_classes;
  out.proposals.resize(boxes.size());
  for (std::size_t r = 0; r < boxes.size(); ++r) {
    ProposalTarget& t = out.proposals[r];
    t.label = static_cast<int>(num_classes);
    double best = -1.0;
    const Box* match = nullptr;
    int match_class = -1;
    for (const auto& entry : sup.entries) {
      require(entry.class_id >= 0 && static_cast<std::size_t>(entry.class_id) < num_classes,
              "assign_slv_targets: supervision class out of range");
      for (const auto& pb : entry.boxes) {
        const double o = iou(boxes[r], pb.box);
        if (o > best) {
          best = o;
          match = &pb.box;
          match_class = entry.class_id;
        }
      }
    }
    if (match != nullptr && best >= iou_fg) {
      t.label = match_class;
      t.has_regression = true;
      t.deltas = encode_deltas(boxes[r], *match);
    }
  }
  return out;
}

double smooth_l1(double x) {
  const double a = std::abs(x);
  return a < 1.0 ? 0.5 * x * x : a - 0.5;
}

double smooth_l1_gradient(double x) {
  if (std::abs(x) < 1.0) return x;
  return x > 0.0 ? 1.0 : -1.0;
}

SlvLoss slv_loss_terms(const ScoreMatrix& scores, const ScoreMatrix& regression,
                       const SlvTargets& targets) {
  const std::size_t classes = targets.num_classes + 1;
  require(scores.rows() == classes, "slv_loss: scores must have C+1 rows");
  require(regression.rows() == 4 * classes, "slv_loss: regression must have 4(C+1) rows");
  require(scores.cols() == targets.proposals.size() &&
              regression.cols() == targets.proposals.size(),
          "slv_loss: proposal counts differ");

  SlvLoss out;
  const std::size_t n = targets.proposals.size();
  if (n == 0) return out;
  std::size_t foreground = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const ProposalTarget& t = targets.proposals[r];
    require(t.label >= 0 && static_cast<std::size_t>(t.label) < classes,
            "slv_loss: target label out of range");
    out.classification -= safe_log(scores(static_cast<std::size_t>(t.label), r));
    if (!t.has_regression) continue;
    ++foreground;
    for (std::size_t k = 0; k < 4; ++k) {
      out.localization += smooth_l1(regression(4 * static_cast<std::size_t>(t.label) + k, r) -
                                    t.deltas[k]);
    }
  }
  out.classification /= static_cast<double>(n);
  if (foreground > 0) out.localization /= static_cast<double>(foreground);
  return out;
}

double slv_loss(const ScoreMatrix& scores, const ScoreMatrix& regression,
                const SlvTargets& targets) {
  return slv_loss_terms(scores, regression, targets).total();
}

double sd_loss(const LikelihoodMap& merged, const LikelihoodMap& features) {
  require(merged.dims() == features.dims(), "sd_loss: map dims differ");
  double acc = 0.0;
  auto a = merged.values();
  auto b = features.values();
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return std::sqrt(acc);
}

LikelihoodMap sd_loss_gradient(const LikelihoodMap& merged, const LikelihoodMap& features) {
  const double norm = sd_loss(merged, features);
  LikelihoodMap grad(features.dims());
  if (norm == 0.0) return grad;
  auto a = merged.values();
  auto b = features.values();
  auto g = grad.values();
  for (std::size_t k = 0; k < a.size(); ++k) g[k] = (b[k] - a[k]) / norm;
  return grad;
}

double ws_weight(const Schedule& sched) {
  require(sched.total >= 1 && sched.current >= 0 && sched.current <= sched.total,
          "ws_weight: invalid schedule");
  const double x =
      (static_cast<double>(sched.current) - static_cast<double>(sched.total) / 2.0) / 1000.0;
  return 1.0 / (1.0 + std::exp(-x));
}

double overall_loss(const LossComponents& parts, const Schedule& sched) {
  double total = parts.mil;
  for (double r : parts.refine) total += r;
  return total + ws_weight(sched) * parts.slv + parts.distill;
}

}  // namespace slv
