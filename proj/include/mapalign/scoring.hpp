#pragma once

// Arrangement match score: how well two arrangements overlap under a
// hypothesis, and selection of the best hypothesis of a pool.

#include <span>
#include <utility>
#include <vector>

#include "mapalign/alignment.hpp"
#include "mapalign/arrangement.hpp"

namespace mapalign {

// One-to-one face pairs (map-1 face, map-2 face), sorted.
struct Association {
  std::vector<std::pair<int, int>> pairs;

  std::size_t size() const { return pairs.size(); }
};

struct PairContribution {
  int face1 = 0;
  int face2 = 0;
  double min_weight = 0.0;
  double face_score = 0.0;

  double value() const { return min_weight * face_score; }
};

struct ScoredAlignment {
  Hypothesis hypothesis;
  double score = 0.0;
  Association association;
  std::vector<PairContribution> contributions;
  bool low_confidence = false;  // set on a winner when every score in the pool is 0
};

// (e^iou - 1) / (e - 1).
double face_match_score_from_iou(double iou);

// Score of two regions already expressed in the same frame.
double face_match_score(const Region& a, const Region& b);
double face_match_score(const Polygon& a, const Polygon& b);

// Face weights area(f) / sum of face areas, in the arrangement's own frame.
std::vector<double> face_weights(const Arrangement& arr);

// Scoring happens in map 2's frame: map-1 faces and centers are carried
// forward by t. A pair is associated when each face encloses the other's
// center, and each is the closest in area among the candidates enclosed by
// its partner (ties go to the lower index).
Association associate(const Arrangement& a1, const Arrangement& a2, const Transform2& t);

ScoredAlignment arrangement_match_score(const Arrangement& a1, const Arrangement& a2,
                                        const Transform2& t);

// Scores every hypothesis; the result keeps the input order.
std::vector<ScoredAlignment> score_hypotheses(const Arrangement& a1, const Arrangement& a2,
                                              std::span<const Hypothesis> hyps,
                                              unsigned threads = 1);

// Index of the winner: highest score (within 1e-9), then larger association, then scale
// closest to the pool median scale, then lowest (source, target, shift).
std::size_t best_index(std::span<const ScoredAlignment> scored);

// Least-squares similarity carrying the bounding-box corners of each map-1
// face onto those of its partner, over the given face pairs. Each pair uses
// the cyclic corner order that agrees best with `t`; faces without a
// bounding box are skipped. Only the largest set of corners agreeing within
// 2 pixels (of map 2) with a similarity through two of them enters the
// final fit. Throws kDegenerate when no pair is usable.
Transform2 fit_similarity(const Arrangement& a1, const Arrangement& a2, const Transform2& t,
                          std::span<const std::pair<int, int>> pairs);

// Throws kEmptyPool on an empty pool.
ScoredAlignment select_best(const Arrangement& a1, const Arrangement& a2,
                            std::span<const Hypothesis> hyps, unsigned threads = 1);

}  // namespace mapalign
