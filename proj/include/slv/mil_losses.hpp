#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "slv/geometry.hpp"
#include "slv/likelihood.hpp"
#include "slv/score_matrix.hpp"
#include "slv/voting.hpp"

namespace slv {

/// Floor applied to every probability before a logarithm.
inline constexpr double kProbFloor = 1e-8;

/// Column-wise softmax (each proposal's scores over classes sum to 1).
ScoreMatrix softmax_over_classes(const ScoreMatrix& logits);

/// Row-wise softmax (each class's scores over proposals sum to 1).
ScoreMatrix softmax_over_proposals(const ScoreMatrix& logits);

struct WsddnScores {
  ScoreMatrix proposal;       // phi^0, C x R
  std::vector<double> image;  // phi, C
};

WsddnScores wsddn_scores(const ScoreMatrix& cls_logits, const ScoreMatrix& det_logits);

/// Multi-label binary cross-entropy of image scores against y.
double mil_loss(std::span<const double> image_scores, std::span<const int> label);

/// d mil_loss / d phi_c. Zero where phi_c sits on the clamp.
std::vector<double> mil_loss_gradient(std::span<const double> image_scores,
                                      std::span<const int> label);

struct ProposalCluster {
  int label = 0;            // class id in [0, C)
  double confidence = 0.0;  // s_n
  std::vector<std::size_t> members;
};

/// Partition of proposals into foreground clusters plus one background
/// cluster. `background_weights` has one entry per proposal (lambda_r); only
/// background members' entries are read by the loss.
struct ClusterAssignment {
  std::vector<ProposalCluster> clusters;
  std::vector<std::size_t> background;
  std::vector<double> background_weights;

  void validate(std::size_t num_proposals, std::size_t num_classes) const;
};

/// Cluster-level weighted cross-entropy for one refinement branch. `scores`
/// is (C+1) x R with the background in the last row.
double cluster_loss(const ScoreMatrix& scores, const ClusterAssignment& assign);

/// Simplified proposal clustering: each positive class contributes its
/// top-scoring proposal as a center (a proposal already taken by an earlier
/// class is skipped in favour of the next best). Remaining proposals join the
/// center of highest IoU when that IoU reaches `iou_fg`, else the background.
/// Only the first C rows of `scores` are read, so phi^0 (C x R) and the
/// refinement outputs ((C+1) x R) are both accepted.
ClusterAssignment build_clusters(const ScoreMatrix& scores, std::span<const Box> boxes,
                                 std::span<const int> label, double iou_fg = 0.5);

/// Center/log-size regression deltas (dx, dy, dw, dh) taking `from` onto `to`.
std::array<double, 4> encode_deltas(const Box& from, const Box& to);
Box decode_deltas(const Box& from, const std::array<double, 4>& deltas);

struct ProposalTarget {
  int label = 0;  // class id, or C for background
  bool has_regression = false;
  std::array<double, 4> deltas{};
};

struct SlvTargets {
  std::size_t num_classes = 0;
  std::vector<ProposalTarget> proposals;
};

SlvTargets assign_slv_targets(const Supervision& sup, std::span<const Box> boxes,
                              std::size_t num_classes, double iou_fg = 0.5);

double smooth_l1(double x);
double smooth_l1_gradient(double x);

struct SlvLoss {
  double classification = 0.0;
  double localization = 0.0;
  double total() const { return classification + localization; }
};

/// Cross-entropy over every proposal plus smooth-L1 over the four deltas of
/// each foreground proposal. `regression` is 4(C+1) x R with rows 4c..4c+3
/// holding class c's (dx, dy, dw, dh).
SlvLoss slv_loss_terms(const ScoreMatrix& scores, const ScoreMatrix& regression,
                       const SlvTargets& targets);
double slv_loss(const ScoreMatrix& scores, const ScoreMatrix& regression,
                const SlvTargets& targets);

/// Frobenius norm of (merged - features).
double sd_loss(const LikelihoodMap& merged, const LikelihoodMap& features);

/// d sd_loss / d features; zero when the maps are equal.
LikelihoodMap sd_loss_gradient(const LikelihoodMap& merged, const LikelihoodMap& features);

struct Schedule {
  long current = 0;
  long total = 1;
};

/// sigmoid((i_c - i_t / 2) / 1000).
double ws_weight(const Schedule& sched);

struct LossComponents {
  double mil = 0.0;                      // L_w
  std::array<double, 3> refine{};        // L_r^1..3
  double slv = 0.0;                      // L_s
  double distill = 0.0;                  // L_d
};

double overall_loss(const LossComponents& parts, const Schedule& sched);

}  // namespace slv
