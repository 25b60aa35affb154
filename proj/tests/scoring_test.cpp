#include "mapalign/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "gtest/gtest.h"
#include "mapalign/error.hpp"
#include "support/floorplan.hpp"
#include "support/oracles.hpp"

namespace mapalign {
namespace {

using testing::similarity;

Trait vertical(double x) { return Trait::line(0.0, x); }
Trait horizontal(double y) { return Trait::line(kPi / 2.0, y); }

Polygon box(double x0, double y0, double x1, double y1) {
  return Polygon{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
}

Arrangement from_boxes(const std::vector<Polygon>& boxes) {
  Arrangement arr;
  for (const auto& b : boxes) {
    Face f;
    f.region.outer = b;
    f.area = polygon_area(b);
    f.centroid = vertex_centroid(b);
    arr.faces.push_back(f);
    for (const auto& v : b.vertices) arr.frame.extend(v);
  }
  return arr;
}

// Rooms of unlike sizes, so only one placement overlays them.
struct Layout {
  std::vector<Trait> traits{vertical(10), vertical(45), vertical(100),
                            horizontal(10), horizontal(70), horizontal(100)};
  Frame frame{Point2(0, 0), Point2(110, 110)};
};

Trait transformed_trait(const Trait& t, const Transform2& m) {
  return Trait::through(m * t.foot(), m * (t.foot() + t.direction()));
}

// The arrangement of the layout carried by m, a similarity whose rotation is
// a multiple of a quarter turn so the frame stays axis-aligned.
Arrangement carried_layout(const Layout& l, const Transform2& m) {
  std::vector<Trait> traits;
  for (const auto& t : l.traits) traits.push_back(transformed_trait(t, m));
  const Point2 a = m * l.frame.min(), b = m * l.frame.max();
  return build_arrangement(traits, Frame(a.cwiseMin(b), a.cwiseMax(b)));
}

bool near_transform(const Transform2& a, const Transform2& b, double deg, double scale, double px) {
  const double dr = std::abs(std::remainder(rotation_angle(a) - rotation_angle(b), 2.0 * kPi));
  return dr <= deg * kPi / 180.0 && std::abs(uniform_scale(a) / uniform_scale(b) - 1.0) <= scale &&
         (a.translation() - b.translation()).norm() <= px;
}

TEST(FaceMatchScoreTest, FormulaPoints) {
  EXPECT_NEAR(face_match_score_from_iou(1.0), 1.0, 1e-12);
  EXPECT_NEAR(face_match_score_from_iou(0.0), 0.0, 1e-12);
  EXPECT_NEAR(face_match_score_from_iou(0.5), (std::sqrt(std::exp(1.0)) - 1.0) / (std::exp(1.0) - 1.0), 1e-12);
  EXPECT_NEAR(face_match_score_from_iou(0.5), 0.37754, 1e-5);
}

TEST(FaceMatchScoreTest, MonotoneInIou) {
  double previous = -1.0;
  for (int i = 0; i <= 100; ++i) {
    const double s = face_match_score_from_iou(i / 100.0);
    EXPECT_GT(s, previous);
    previous = s;
  }
}

TEST(FaceMatchScoreTest, Polygons) {
  const Polygon a = box(0, 0, 2, 2);
  EXPECT_NEAR(face_match_score(a, a), 1.0, 1e-12);
  EXPECT_NEAR(face_match_score(a, box(5, 5, 6, 6)), 0.0, 1e-12);
  // Half overlap: intersection 2, union 6.
  EXPECT_NEAR(face_match_score(a, box(1, 0, 3, 2)), face_match_score_from_iou(1.0 / 3.0), 1e-12);
}

TEST(FaceWeightsTest, SumToOne) {
  std::mt19937 rng(8);
  const Frame frame(Point2(0, 0), Point2(120, 90));
  for (int trial = 0; trial < 10; ++trial) {
    const auto traits = testing::random_lines(rng, 1 + trial % 8, frame);
    const auto w = face_weights(build_arrangement(traits, frame));
    double sum = 0.0;
    for (double x : w) {
      EXPECT_GT(x, 0.0);
      sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(AssociateTest, SelfUnderIdentityPairsEveryFace) {
  const Layout l;
  const Arrangement arr = build_arrangement(l.traits, l.frame);
  const Association a = associate(arr, arr, Transform2::Identity());
  ASSERT_EQ(a.size(), arr.faces.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.pairs[i], std::make_pair(int(i), int(i)));
}

TEST(AssociateTest, CloserAreaWins) {
  const Arrangement a1 = from_boxes({box(0, 0, 10, 10)});
  // Both centers lie in the map-1 square; only the larger one encloses its
  // center and is closer in area.
  const Arrangement a2 = from_boxes({box(0, 6, 10, 10), box(0, 0, 10, 6)});
  const Association a = associate(a1, a2, Transform2::Identity());
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a.pairs[0], std::make_pair(0, 1));
}

TEST(AssociateTest, EnclosureMustBeMutual) {
  const Arrangement a1 = from_boxes({box(0, 0, 10, 10)});
  const Arrangement a2 = from_boxes({box(4, 0, 24, 10)});
  // The map-2 face holds (5, 5), but its own center (14, 5) is outside.
  EXPECT_EQ(associate(a1, a2, Transform2::Identity()).size(), 0u);
}

TEST(AssociateTest, InjectiveUnderRandomTransforms) {
  std::mt19937 rng(29);
  const Frame frame(Point2(0, 0), Point2(100, 100));
  std::uniform_real_distribution<double> angle(-0.3, 0.3), scale(0.8, 1.25), shift(-15, 15);
  for (int trial = 0; trial < 30; ++trial) {
    const Arrangement a1 = build_arrangement(testing::random_lines(rng, 6, frame), frame);
    const Arrangement a2 = build_arrangement(testing::random_lines(rng, 6, frame), frame);
    const Transform2 t = similarity(angle(rng), scale(rng), Point2(shift(rng), shift(rng)));
    const Association a = associate(a1, a2, t);
    std::set<int> first, second;
    for (const auto& [i, j] : a.pairs) {
      EXPECT_TRUE(first.insert(i).second);
      EXPECT_TRUE(second.insert(j).second);
      EXPECT_TRUE(contains(a2.faces[j].region, t * a1.faces[i].centroid));
      EXPECT_TRUE(contains(transformed(a1.faces[i].region, t), a2.faces[j].centroid));
    }
    EXPECT_TRUE(std::is_sorted(a.pairs.begin(), a.pairs.end()));
  }
}

TEST(ArrangementMatchScoreTest, SelfUnderIdentityIsOne) {
  const Layout l;
  const Arrangement arr = build_arrangement(l.traits, l.frame);
  const auto s = arrangement_match_score(arr, arr, Transform2::Identity());
  EXPECT_NEAR(s.score, 1.0, 1e-6);
}

TEST(ArrangementMatchScoreTest, DisplacedIsZero) {
  const Layout l;
  const Arrangement arr = build_arrangement(l.traits, l.frame);
  const auto s = arrangement_match_score(arr, arr, similarity(0.0, 1.0, Point2(1000, 0)));
  EXPECT_EQ(s.association.size(), 0u);
  EXPECT_EQ(s.score, 0.0);
}

TEST(ArrangementMatchScoreTest, HalfOfTwoEqualRooms) {
  const Polygon left = box(0, 0, 50, 100), right = box(50, 0, 100, 100);
  const Arrangement both = from_boxes({left, right});
  const Arrangement half = from_boxes({left});
  // Weights by independent area enumeration: 0.5 and 0.5 against 1.
  const double w_left = polygon_area(left) / (polygon_area(left) + polygon_area(right));
  const auto s = arrangement_match_score(both, half, Transform2::Identity());
  EXPECT_NEAR(s.score, std::min(w_left, 1.0) * 1.0, 1e-6);
  EXPECT_NEAR(s.score, 0.5, 1e-6);
}

TEST(ArrangementMatchScoreTest, BoundedAndContributionsAddUp) {
  std::mt19937 rng(31);
  const Frame frame(Point2(0, 0), Point2(100, 100));
  std::uniform_real_distribution<double> angle(-kPi, kPi), scale(0.5, 2.0), shift(-50, 50);
  for (int trial = 0; trial < 30; ++trial) {
    const Arrangement a1 = build_arrangement(testing::random_lines(rng, 5, frame), frame);
    const Arrangement a2 = build_arrangement(testing::random_lines(rng, 5, frame), frame);
    const auto s = arrangement_match_score(a1, a2, similarity(angle(rng), scale(rng), Point2(shift(rng), shift(rng))));
    EXPECT_GE(s.score, 0.0);
    EXPECT_LE(s.score, 1.0 + 1e-12);
    double sum = 0.0;
    for (const auto& c : s.contributions) sum += c.value();
    EXPECT_NEAR(sum, s.score, 1e-12);
    EXPECT_EQ(s.contributions.size(), s.association.size());
  }
}

TEST(ScoreHypothesesTest, ThreadCountDoesNotChangeScores) {
  const Layout l;
  const Arrangement a1 = build_arrangement(l.traits, l.frame);
  const Arrangement a2 = carried_layout(l, similarity(kPi / 2.0, 1.3, Point2(150, 20)));
  const auto hyps = generate_hypotheses_ombb(a1, a2);
  const auto one = score_hypotheses(a1, a2, hyps, 1);
  const auto many = score_hypotheses(a1, a2, hyps, 8);
  ASSERT_EQ(one.size(), hyps.size());
  ASSERT_EQ(many.size(), hyps.size());
  for (std::size_t k = 0; k < hyps.size(); ++k) {
    EXPECT_EQ(one[k].score, many[k].score);
    EXPECT_EQ(one[k].association.pairs, many[k].association.pairs);
  }
}

TEST(SelectBestTest, GroundTruthWins) {
  const Layout l;
  const Transform2 truth = similarity(-kPi / 2.0, 1.5, Point2(20, 200));
  const Arrangement a1 = build_arrangement(l.traits, l.frame);
  const Arrangement a2 = carried_layout(l, truth);
  auto hyps = generate_hypotheses_ombb(a1, a2);
  const auto winner = select_best(a1, a2, hyps);
  EXPECT_TRUE(near_transform(winner.hypothesis.transform, truth, 2.0, 0.05, 2.0));
  EXPECT_NEAR(winner.score, 1.0, 1e-6);
  EXPECT_FALSE(winner.low_confidence);

  Hypothesis exact;
  exact.transform = truth;
  exact.source_face = 99;
  hyps.push_back(exact);
  EXPECT_TRUE(near_transform(select_best(a1, a2, hyps).hypothesis.transform, truth, 1e-6, 1e-9, 1e-6));
}

TEST(SelectBestTest, PoolOfOne) {
  const Layout l;
  const Arrangement arr = build_arrangement(l.traits, l.frame);
  Hypothesis h;
  h.source_face = 2;
  h.target_face = 3;
  const std::vector<Hypothesis> pool{h};
  const auto winner = select_best(arr, arr, pool);
  EXPECT_EQ(winner.hypothesis.source_face, 2);
  EXPECT_NEAR(winner.score, 1.0, 1e-6);
}

TEST(SelectBestTest, AllZeroPoolFallsBackToLowestTriple) {
  const Layout l;
  const Arrangement arr = build_arrangement(l.traits, l.frame);
  std::vector<Hypothesis> pool;
  for (int k : {3, 1, 2}) {
    Hypothesis h;
    h.transform = similarity(0.0, 1.0, Point2(5000.0 * k, 0));
    h.source_face = k;
    h.target_face = 0;
    pool.push_back(h);
  }
  const auto winner = select_best(arr, arr, pool);
  EXPECT_EQ(winner.score, 0.0);
  EXPECT_EQ(winner.hypothesis.source_face, 1);
  EXPECT_TRUE(winner.low_confidence);
}

TEST(SelectBestTest, EmptyPoolThrows) {
  const Layout l;
  const Arrangement arr = build_arrangement(l.traits, l.frame);
  try {
    select_best(arr, arr, std::vector<Hypothesis>{});
    FAIL() << "expected kEmptyPool";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyPool);
  }
}

TEST(SelectBestTest, WinnerInvariantUnderCommonRescale) {
  const Layout l;
  const Transform2 move = similarity(kPi / 2.0, 1.2, Point2(130, 15));
  const Arrangement a1 = build_arrangement(l.traits, l.frame);
  const Arrangement a2 = carried_layout(l, move);
  for (double factor : {0.25, 2.5, 7.0}) {
    const Transform2 zoom = similarity(0.0, factor, Point2::Zero());
    const Arrangement b1 = carried_layout(l, zoom);
    const Arrangement b2 = carried_layout(l, zoom * move);
    const auto w = select_best(a1, a2, generate_hypotheses_ombb(a1, a2)).hypothesis;
    const auto v = select_best(b1, b2, generate_hypotheses_ombb(b1, b2)).hypothesis;
    EXPECT_EQ(std::tie(w.source_face, w.target_face, w.shift), std::tie(v.source_face, v.target_face, v.shift))
        << "factor " << factor;
  }
}

TEST(FitSimilarityTest, RecoversExactCopy) {
  const Layout l;
  const Transform2 truth = similarity(kPi / 2.0, 0.8, Point2(-30, 60));
  const Arrangement a1 = build_arrangement(l.traits, l.frame);
  const Arrangement a2 = carried_layout(l, truth);
  const auto assoc = associate(a1, a2, truth);
  ASSERT_EQ(assoc.size(), a1.faces.size());
  const Transform2 fit = fit_similarity(a1, a2, truth, assoc.pairs);
  EXPECT_TRUE(fit.matrix().isApprox(truth.matrix(), 1e-9));
}

TEST(FitSimilarityTest, OutlierPairIsIgnored) {
  const Layout l;
  const Transform2 truth = similarity(kPi / 2.0, 1.0, Point2(200, 0));
  const Arrangement a1 = build_arrangement(l.traits, l.frame);
  Arrangement a2 = carried_layout(l, truth);
  auto pairs = associate(a1, a2, truth).pairs;
  ASSERT_GE(pairs.size(), 3u);
  // Distort one map-2 face: its corners no longer follow the others.
  auto& outer = a2.faces[pairs.back().second].region.outer;
  for (auto& v : outer.vertices) v += Point2(7.0, -5.0);
  const Transform2 fit = fit_similarity(a1, a2, truth, pairs);
  EXPECT_TRUE(near_transform(fit, truth, 1e-6, 1e-9, 1e-6));
}

TEST(FitSimilarityTest, NoPairsThrows) {
  const Layout l;
  const Arrangement arr = build_arrangement(l.traits, l.frame);
  try {
    fit_similarity(arr, arr, Transform2::Identity(), {});
    FAIL() << "expected kDegenerate";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
  }
}

}  // namespace
}  // namespace mapalign
