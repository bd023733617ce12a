#pragma once

// Independent scalar-loop evaluations of every formula the library computes.
// Written straight from the definitions, sharing no code with src/.

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "slv/eval.hpp"
#include "slv/likelihood.hpp"
#include "slv/mil_losses.hpp"
#include "slv/score_matrix.hpp"

namespace slv::oracle {

double box_iou(const Box& a, const Box& b);

ScoreMatrix softmax_columns(const ScoreMatrix& x);
ScoreMatrix softmax_rows(const ScoreMatrix& x);

double mil_loss(const ScoreMatrix& cls_logits, const ScoreMatrix& det_logits,
                const std::vector<int>& y);
double mil_loss_from_scores(const std::vector<double>& phi, const std::vector<int>& y);

double cluster_loss(const ScoreMatrix& phi, const ClusterAssignment& a);

/// Best-IoU center per proposal by exhaustive search; -1 for background.
std::vector<int> cluster_membership(const ScoreMatrix& phi, const std::vector<Box>& boxes,
                                    const std::vector<int>& y, double iou_fg);

double slv_loss(const ScoreMatrix& phi_s, const ScoreMatrix& t_s, const SlvTargets& targets);

double frobenius_distance(const LikelihoodMap& a, const LikelihoodMap& b);

LikelihoodMap channel_mean(const FeatureMap& f);

/// Boxes of 4-connected components above t, found with union-find.
std::vector<Box> components_above(const LikelihoodMap& m, double t);

/// AP by scanning every rank cut-off and taking the best precision at any
/// deeper cut-off.
double average_precision(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                         int class_id, double iou_thresh);

}  // namespace slv::oracle
