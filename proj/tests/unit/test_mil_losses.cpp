#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "slv/errors.hpp"
#include "slv/mil_losses.hpp"

using namespace slv;

namespace {

void expect_rel(double got, double want, double tol) {
  EXPECT_LE(std::abs(got - want), tol * std::max(1.0, std::abs(want))) << got << " vs " << want;
}

std::vector<int> random_label(std::mt19937_64& rng, std::size_t c, bool at_least_one) {
  std::vector<int> y(c);
  for (int& v : y) v = static_cast<int>(rng() % 2);
  if (at_least_one) y[rng() % c] = 1;
  return y;
}

std::vector<Box> random_boxes(std::mt19937_64& rng, std::size_t n) {
  return fixtures::random_proposals(rng, {60, 50}, n).boxes;
}

}  // namespace

TEST(Softmax, Examples) {
  const ScoreMatrix a = softmax_over_classes(ScoreMatrix(2, 1, 0.0));
  EXPECT_DOUBLE_EQ(a(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(a(1, 0), 0.5);

  const ScoreMatrix b = softmax_over_classes(ScoreMatrix(2, 1, {std::numbers::ln2, 0.0}));
  EXPECT_NEAR(b(0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(b(1, 0), 1.0 / 3.0, 1e-15);

  const ScoreMatrix shifted = softmax_over_classes(ScoreMatrix(2, 1, {std::numbers::ln2 + 100, 100.0}));
  EXPECT_NEAR(shifted(0, 0), b(0, 0), 1e-15);

  const ScoreMatrix flat = softmax_over_proposals(ScoreMatrix(1, 4, 3.0));
  for (double v : flat.data()) EXPECT_DOUBLE_EQ(v, 0.25);
  const ScoreMatrix c = softmax_over_proposals(ScoreMatrix(1, 2, {0.0, std::log(3.0)}));
  EXPECT_NEAR(c(0, 0), 0.25, 1e-15);
  EXPECT_NEAR(c(0, 1), 0.75, 1e-15);
  EXPECT_EQ(softmax_over_proposals(ScoreMatrix(1, 1, -7.0))(0, 0), 1.0);
}

TEST(SoftmaxProperties, NormalizedAndMatchesOracleAtLargeMagnitude) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const double scale = (trial % 2) ? 1e4 : 3.0;
    const ScoreMatrix x = fixtures::random_matrix(rng, 1 + rng() % 6, 1 + rng() % 9, scale);
    const ScoreMatrix sc = softmax_over_classes(x);
    const ScoreMatrix sd = softmax_over_proposals(x);
    for (std::size_t r = 0; r < x.cols(); ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < x.rows(); ++c) s += sc(c, r);
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
    for (std::size_t c = 0; c < x.rows(); ++c) {
      double s = 0.0;
      for (double v : sd.row(c)) s += v;
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
    const ScoreMatrix oc = oracle::softmax_columns(x);
    const ScoreMatrix orow = oracle::softmax_rows(x);
    for (std::size_t k = 0; k < x.data().size(); ++k) {
      EXPECT_NEAR(sc.data()[k], oc.data()[k], 1e-12);
      EXPECT_NEAR(sd.data()[k], orow.data()[k], 1e-12);
    }
  }
}

TEST(WsddnScores, Examples) {
  const WsddnScores u = wsddn_scores(ScoreMatrix(2, 2, 0.0), ScoreMatrix(2, 2, 0.0));
  for (double v : u.proposal.data()) EXPECT_DOUBLE_EQ(v, 0.25);
  EXPECT_DOUBLE_EQ(u.image[0], 0.5);
  EXPECT_DOUBLE_EQ(u.image[1], 0.5);
  EXPECT_THROW(wsddn_scores(ScoreMatrix(2, 2), ScoreMatrix(2, 3)), ContractError);
}

TEST(WsddnScores, ImageScoresAgreeWithDirectSummation) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t c = 1 + rng() % 4, r = 1 + rng() % 6;
    const ScoreMatrix cls = fixtures::random_matrix(rng, c, r, 4.0);
    const ScoreMatrix det = fixtures::random_matrix(rng, c, r, 4.0);
    const WsddnScores w = wsddn_scores(cls, det);
    const ScoreMatrix a = oracle::softmax_columns(cls), b = oracle::softmax_rows(det);
    double total = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      double phi = 0.0;
      for (std::size_t j = 0; j < r; ++j) phi += a(k, j) * b(k, j);
      EXPECT_NEAR(w.image[k], phi, 1e-12);
      EXPECT_GT(w.image[k], 0.0);
      EXPECT_LE(w.image[k], 1.0 + 1e-12);
      total += w.image[k];
    }
    // normalized over classes only in the single-class or single-proposal case
    if (c == 1 || r == 1) {
      EXPECT_NEAR(total, 1.0, 1e-6);
    }
  }
}

TEST(WsddnScores, ImageScoresNeedNotSumToOne) {
  // both classes: 0.9 * 0.9 + 0.1 * 0.1
  const double l9 = std::log(9.0);
  const ScoreMatrix diag(2, 2, {l9, 0.0, 0.0, l9});
  const WsddnScores w = wsddn_scores(diag, diag);
  EXPECT_NEAR(w.image[0], 0.82, 1e-12);
  EXPECT_NEAR(w.image[1], 0.82, 1e-12);
}

TEST(MilLoss, Examples) {
  EXPECT_NEAR(mil_loss(std::vector<double>{1.0 - 1e-12}, std::vector<int>{1}), 0.0, 2 * kProbFloor);
  EXPECT_NEAR(mil_loss(std::vector<double>{0.5}, std::vector<int>{0}), std::numbers::ln2, 1e-15);
  // clamped: finite even for a confidently wrong prediction
  EXPECT_NEAR(mil_loss(std::vector<double>{0.0}, std::vector<int>{1}), -std::log(kProbFloor), 1e-9);
  EXPECT_THROW(mil_loss(std::vector<double>{0.5, 0.5}, std::vector<int>{1}), ContractError);
}

TEST(MilLoss, MatchesOracle) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t c = 1 + rng() % 6, r = 1 + rng() % 8;
    const ScoreMatrix cls = fixtures::random_matrix(rng, c, r, 3.0);
    const ScoreMatrix det = fixtures::random_matrix(rng, c, r, 3.0);
    const std::vector<int> y = random_label(rng, c, false);
    const double got = mil_loss(wsddn_scores(cls, det).image, y);
    expect_rel(got, oracle::mil_loss(cls, det, y), 1e-9);
    EXPECT_GE(got, 0.0);
    EXPECT_TRUE(std::isfinite(got));
  }
}

TEST(MilLoss, GradientMatchesFiniteDifference) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  const double h = 1e-5;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t c = 1 + rng() % 5;
    std::vector<double> phi(c);
    for (double& v : phi) v = u(rng);
    const std::vector<int> y = random_label(rng, c, false);
    const std::vector<double> g = mil_loss_gradient(phi, y);
    for (std::size_t k = 0; k < c; ++k) {
      std::vector<double> hi = phi, lo = phi;
      hi[k] += h;
      lo[k] -= h;
      const double fd = (mil_loss(hi, y) - mil_loss(lo, y)) / (2 * h);
      EXPECT_LE(std::abs(fd - g[k]), 1e-4 * std::max(1.0, std::abs(g[k])));
    }
  }
}

TEST(MilLoss, DecreasesTowardsLabel) {
  const std::vector<int> pos{1}, neg{0};
  double prev_pos = INFINITY, prev_neg = INFINITY;
  for (int k = 1; k < 100; ++k) {
    const double p = k / 100.0;
    const double lp = mil_loss(std::vector<double>{p}, pos);
    const double ln = mil_loss(std::vector<double>{1.0 - p}, neg);
    EXPECT_LT(lp, prev_pos);
    EXPECT_LT(ln, prev_neg);
    prev_pos = lp;
    prev_neg = ln;
  }
}

TEST(ClusterLoss, Examples) {
  ScoreMatrix perfect(2, 3, 0.0);
  for (std::size_t r = 0; r < 3; ++r) perfect(0, r) = 1.0;
  ClusterAssignment one{{{0, 0.7, {0, 1, 2}}}, {}, std::vector<double>(3, 0.0)};
  EXPECT_NEAR(cluster_loss(perfect, one), 0.0, 1e-15);

  ScoreMatrix half(2, 4, 0.5);
  ClusterAssignment bg{{}, {0, 1, 2, 3}, std::vector<double>(4, 1.0)};
  EXPECT_NEAR(cluster_loss(half, bg), std::numbers::ln2, 1e-15);
}

TEST(ClusterLoss, InvalidPartitionIsContractError) {
  const ScoreMatrix s(2, 3, 0.3);
  ClusterAssignment dup{{{0, 1.0, {0, 1}}}, {1, 2}, std::vector<double>(3, 1.0)};
  EXPECT_THROW(cluster_loss(s, dup), ContractError);
  ClusterAssignment missing{{{0, 1.0, {0}}}, {1}, std::vector<double>(3, 1.0)};
  EXPECT_THROW(cluster_loss(s, missing), ContractError);
  ClusterAssignment bad_label{{{1, 1.0, {0}}}, {1, 2}, std::vector<double>(3, 1.0)};
  EXPECT_THROW(cluster_loss(s, bad_label), ContractError);
}

TEST(ClusterLoss, MatchesOracleOnBuiltClusters) {
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t c = 1 + rng() % 4, r = 2 + rng() % 12;
    const ScoreMatrix phi = fixtures::random_probabilities(rng, c + 1, r);
    const std::vector<Box> boxes = random_boxes(rng, r);
    const std::vector<int> y = random_label(rng, c, true);
    const ClusterAssignment a = build_clusters(phi, boxes, y, 0.5);
    const double got = cluster_loss(phi, a);
    expect_rel(got, oracle::cluster_loss(phi, a), 1e-9);
    EXPECT_GE(got, 0.0);
  }
}

TEST(ClusterLoss, DecreasesAsMembersGainScore) {
  ScoreMatrix s(2, 3, 0.2);
  ClusterAssignment a{{{0, 1.0, {0, 1}}}, {2}, std::vector<double>(3, 1.0)};
  double prev = cluster_loss(s, a);
  for (int k = 0; k < 10; ++k) {
    s(0, 1) += 0.05;
    const double now = cluster_loss(s, a);
    EXPECT_LT(now, prev);
    prev = now;
  }
}

TEST(BuildClusters, Examples) {
  const Box b{10, 10, 30, 30};
  ScoreMatrix phi(1, 4, 0.1);
  phi(0, 2) = 0.9;
  const std::vector<int> y{1};
  const ClusterAssignment same = build_clusters(phi, std::vector<Box>(4, b), y);
  ASSERT_EQ(same.clusters.size(), 1u);
  EXPECT_EQ(same.clusters[0].members.size(), 4u);
  EXPECT_TRUE(same.background.empty());
  EXPECT_DOUBLE_EQ(same.clusters[0].confidence, 0.9);

  const std::vector<Box> apart{{0, 0, 5, 5}, {10, 0, 15, 5}, {10, 10, 30, 30}, {40, 40, 50, 50}};
  const ClusterAssignment disjoint = build_clusters(phi, apart, y);
  ASSERT_EQ(disjoint.clusters.size(), 1u);
  EXPECT_EQ(disjoint.clusters[0].members, (std::vector<std::size_t>{2}));
  EXPECT_EQ(disjoint.background, (std::vector<std::size_t>{0, 1, 3}));
  for (std::size_t r : disjoint.background) EXPECT_DOUBLE_EQ(disjoint.background_weights[r], 0.9);
}

TEST(BuildClusters, TwoClassesTwoGroupsMatchExhaustiveOracle) {
  const std::vector<Box> boxes{{0, 0, 20, 20}, {1, 1, 21, 21}, {60, 60, 80, 80}, {59, 61, 79, 81}, {2, 0, 22, 20}, {0, 40, 10, 50}};
  ScoreMatrix phi(2, 6, 0.05);
  phi(0, 0) = 0.8;
  phi(1, 2) = 0.7;
  const std::vector<int> y{1, 1};
  const ClusterAssignment a = build_clusters(phi, boxes, y);
  ASSERT_EQ(a.clusters.size(), 2u);
  EXPECT_EQ(a.clusters[0].members, (std::vector<std::size_t>{0, 1, 4}));
  EXPECT_EQ(a.clusters[1].members, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(a.background, (std::vector<std::size_t>{5}));

  std::mt19937_64 rng(26);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t c = 1 + rng() % 4, r = 2 + rng() % 15;
    const ScoreMatrix p = fixtures::random_probabilities(rng, c, r);
    const std::vector<Box> bx = random_boxes(rng, r);
    const std::vector<int> yy = random_label(rng, c, true);
    const ClusterAssignment got = build_clusters(p, bx, yy, 0.5);
    const std::vector<int> want = oracle::cluster_membership(p, bx, yy, 0.5);
    std::vector<int> seen(r, -1);
    for (std::size_t k = 0; k < got.clusters.size(); ++k) {
      for (std::size_t m : got.clusters[k].members) seen[m] = static_cast<int>(k);
    }
    ASSERT_EQ(seen, want) << "trial " << trial;
  }
}

TEST(Deltas, EncodeDecodeRoundTrip) {
  std::mt19937_64 rng(27);
  const std::vector<Box> a = random_boxes(rng, 200), b = random_boxes(rng, 200);
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (area(a[k]) == 0.0 || area(b[k]) == 0.0) continue;
    const Box back = decode_deltas(a[k], encode_deltas(a[k], b[k]));
    EXPECT_NEAR(back.x_min, b[k].x_min, 1e-9);
    EXPECT_NEAR(back.y_min, b[k].y_min, 1e-9);
    EXPECT_NEAR(back.x_max, b[k].x_max, 1e-9);
    EXPECT_NEAR(back.y_max, b[k].y_max, 1e-9);
  }
}

TEST(AssignSlvTargets, Examples) {
  Supervision sup{"img", {{1, {{{10, 10, 20, 20}, 1.0}}}}};
  const std::vector<Box> boxes{{10, 10, 20, 20}, {50, 50, 60, 60}, {8, 10, 18, 20}};
  const SlvTargets t = assign_slv_targets(sup, boxes, 3);
  ASSERT_EQ(t.proposals.size(), 3u);

  EXPECT_EQ(t.proposals[0].label, 1);
  EXPECT_TRUE(t.proposals[0].has_regression);
  for (double d : t.proposals[0].deltas) EXPECT_EQ(d, 0.0);

  EXPECT_EQ(t.proposals[1].label, 3);
  EXPECT_FALSE(t.proposals[1].has_regression);

  // pseudo box lies 2 px right of this proposal
  EXPECT_EQ(t.proposals[2].label, 1);
  EXPECT_NEAR(t.proposals[2].deltas[0], 0.2, 1e-15);
  EXPECT_EQ(t.proposals[2].deltas[1], 0.0);
  EXPECT_EQ(t.proposals[2].deltas[2], 0.0);
  EXPECT_EQ(t.proposals[2].deltas[3], 0.0);
}

TEST(SmoothL1, ValuesAndContinuity) {
  EXPECT_EQ(smooth_l1(0.5), 0.125);
  EXPECT_EQ(smooth_l1(2.0), 1.5);
  EXPECT_EQ(smooth_l1(-2.0), 1.5);
  for (double x : {1.0, -1.0}) {
    const double d = 1e-6;
    EXPECT_NEAR(smooth_l1(x - d), smooth_l1(x + d), 3e-6);
    EXPECT_NEAR(smooth_l1_gradient(x - d), smooth_l1_gradient(x + d), 3e-6);
  }
  const double h = 1e-5;
  for (double x = -3.0; x <= 3.0; x += 0.137) {
    const double fd = (smooth_l1(x + h) - smooth_l1(x - h)) / (2 * h);
    EXPECT_NEAR(fd, smooth_l1_gradient(x), 1e-4);
  }
}

namespace {

// One foreground proposal of class 0 (C = 1) with a chosen delta error.
struct SingleProposal {
  ScoreMatrix scores{2, 1, {1.0, 0.0}};
  ScoreMatrix regression{8, 1, 0.0};
  SlvTargets targets{1, {{0, true, {0, 0, 0, 0}}}};
};

}  // namespace

TEST(SlvLoss, Examples) {
  SingleProposal p;
  EXPECT_NEAR(slv_loss(p.scores, p.regression, p.targets), 0.0, 1e-15);
  p.regression(0, 0) = 0.5;
  EXPECT_NEAR(slv_loss_terms(p.scores, p.regression, p.targets).localization, 0.125, 1e-15);
  p.regression(0, 0) = 2.0;
  EXPECT_NEAR(slv_loss_terms(p.scores, p.regression, p.targets).localization, 1.5, 1e-15);
}

TEST(SlvLoss, MatchesOracle) {
  std::mt19937_64 rng(28);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t c = 1 + rng() % 4, r = 1 + rng() % 10;
    const ScoreMatrix phi = fixtures::random_probabilities(rng, c + 1, r);
    const ScoreMatrix reg = fixtures::random_matrix(rng, 4 * (c + 1), r, 1.5);
    SlvTargets t{c, {}};
    for (std::size_t k = 0; k < r; ++k) {
      ProposalTarget pt;
      pt.label = static_cast<int>(rng() % (c + 1));
      pt.has_regression = pt.label != static_cast<int>(c);
      for (double& d : pt.deltas) d = std::uniform_real_distribution<double>(-2, 2)(rng);
      t.proposals.push_back(pt);
    }
    const double got = slv_loss(phi, reg, t);
    expect_rel(got, oracle::slv_loss(phi, reg, t), 1e-9);
    EXPECT_GE(got, 0.0);
  }
}

TEST(SlvLoss, MonotoneInTargetScoreAndDeltaError) {
  SingleProposal p;
  double prev = INFINITY;
  for (int k = 1; k <= 10; ++k) {
    p.scores(0, 0) = k / 10.0;
    p.scores(1, 0) = 1.0 - k / 10.0;
    const double now = slv_loss(p.scores, p.regression, p.targets);
    EXPECT_LT(now, prev);
    prev = now;
  }
  prev = -1.0;
  for (int k = 1; k <= 30; ++k) {
    p.regression(2, 0) = k * 0.1;
    const double now = slv_loss(p.scores, p.regression, p.targets);
    EXPECT_GT(now, prev);
    prev = now;
  }
}

TEST(SdLoss, Examples) {
  const LikelihoodMap a(ImageDims{2, 2}, 1.0);
  EXPECT_EQ(sd_loss(a, a), 0.0);
  EXPECT_DOUBLE_EQ(sd_loss(LikelihoodMap(ImageDims{2, 2}, 4.0), a), 6.0);
  EXPECT_THROW(sd_loss(a, LikelihoodMap(ImageDims{2, 3})), ContractError);
}

TEST(SdLoss, MatchesOracleAndGradient) {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> n(0.0, 1.0);
  const double h = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    const ImageDims dims{1 + rng() % 7, 1 + rng() % 7};
    LikelihoodMap m(dims), f(dims);
    for (double& v : m.values()) v = n(rng);
    for (double& v : f.values()) v = n(rng);
    expect_rel(sd_loss(m, f), oracle::frobenius_distance(m, f), 1e-9);
    const LikelihoodMap g = sd_loss_gradient(m, f);
    for (std::size_t k = 0; k < f.size(); ++k) {
      LikelihoodMap hi = f, lo = f;
      hi.values()[k] += h;
      lo.values()[k] -= h;
      const double fd = (sd_loss(m, hi) - sd_loss(m, lo)) / (2 * h);
      EXPECT_LE(std::abs(fd - g.values()[k]), 1e-4 * std::max(1.0, std::abs(g.values()[k])));
    }
  }
}

TEST(WsWeight, Examples) {
  EXPECT_EQ(ws_weight({40000, 80000}), 0.5);
  EXPECT_NEAR(ws_weight({0, 80000}) / 4.248354255291589e-18, 1.0, 1e-9);
  EXPECT_NEAR(ws_weight({80000, 80000}), 1.0, 1e-15);
  EXPECT_THROW(ws_weight({5, 0}), ContractError);
  EXPECT_THROW(ws_weight({90000, 80000}), ContractError);
}

TEST(WsWeight, StrictlyIncreasingAroundMidScheduleAndBounded) {
  double prev = 0.0;
  for (long i = 39500; i < 40500; ++i) {
    const double w = ws_weight({i, 80000});
    EXPECT_GT(w, prev);
    prev = w;
  }
  prev = 0.0;
  for (long i = 0; i <= 80000; i += 80) {
    const double w = ws_weight({i, 80000});
    EXPECT_GE(w, prev);
    EXPECT_GT(w, 0.0);
    EXPECT_LE(w, 1.0);
    prev = w;
  }
}

TEST(OverallLoss, Examples) {
  const Schedule mid{40000, 80000};
  EXPECT_EQ(overall_loss({}, mid), 0.0);
  LossComponents only_s;
  only_s.slv = 1.0;
  EXPECT_EQ(overall_loss(only_s, mid), 0.5);
  EXPECT_EQ(overall_loss({1, {1, 1, 1}, 2, 3}, mid), 8.0);
}
