#include "mapalign/scoring.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

#include "mapalign/error.hpp"
#include "mapalign/parallel.hpp"

namespace mapalign {
namespace {

struct BoxedRegion {
  Region region;
  Eigen::AlignedBox2d box;
  double area;
  Point2 center;

  bool encloses(const Point2& p) const { return box.contains(p) && contains(region, p); }
};

BoxedRegion boxed(Region region, double area, Point2 center) {
  Eigen::AlignedBox2d box;
  for (const auto& v : region.outer.vertices) box.extend(v);
  return {std::move(region), box, area, std::move(center)};
}

std::vector<BoxedRegion> own_frame(const Arrangement& arr) {
  std::vector<BoxedRegion> out;
  for (const auto& f : arr.faces) out.push_back(boxed(f.region, f.area, f.centroid));
  return out;
}

std::vector<BoxedRegion> carried(const Arrangement& arr, const Transform2& t) {
  const double det = std::abs(t.linear().determinant());
  std::vector<BoxedRegion> out;
  for (const auto& f : arr.faces) out.push_back(boxed(transformed(f.region, t), det * f.area, t * f.centroid));
  return out;
}

Association associate_regions(const std::vector<BoxedRegion>& f1, const std::vector<BoxedRegion>& f2) {
  const std::size_t n1 = f1.size(), n2 = f2.size();
  // enc2[i]: map-2 faces whose center lies in map-1 face i; enc1[j] likewise.
  std::vector<std::vector<int>> enc2(n1), enc1(n2);
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      if (f1[i].encloses(f2[j].center)) enc2[i].push_back(static_cast<int>(j));
      if (f2[j].encloses(f1[i].center)) enc1[j].push_back(static_cast<int>(i));
    }
  }
  auto gap = [&](int i, int j) { return std::abs(f1[i].area - f2[j].area); };
  std::vector<int> best2(n1, -1), best1(n2, -1);
  for (std::size_t i = 0; i < n1; ++i) {
    for (int j : enc2[i]) {
      if (best2[i] < 0 || gap(static_cast<int>(i), j) < gap(static_cast<int>(i), best2[i])) best2[i] = j;
    }
  }
  for (std::size_t j = 0; j < n2; ++j) {
    for (int i : enc1[j]) {
      if (best1[j] < 0 || gap(i, static_cast<int>(j)) < gap(best1[j], static_cast<int>(j))) best1[j] = i;
    }
  }
  Association a;
  for (std::size_t i = 0; i < n1; ++i) {
    const int j = best2[i];
    if (j >= 0 && best1[j] == static_cast<int>(i)) a.pairs.emplace_back(static_cast<int>(i), j);
  }
  return a;
}

ScoredAlignment score_with(const std::vector<BoxedRegion>& own2, const std::vector<double>& w1,
                           const std::vector<double>& w2, const Arrangement& a1, const Hypothesis& h) {
  const auto moved1 = carried(a1, h.transform);
  ScoredAlignment s;
  s.hypothesis = h;
  s.association = associate_regions(moved1, own2);
  for (const auto& [i, j] : s.association.pairs) {
    PairContribution c;
    c.face1 = i;
    c.face2 = j;
    c.min_weight = std::min(w1[i], w2[j]);
    c.face_score = face_match_score(moved1[i].region, own2[j].region);
    s.score += c.value();
    s.contributions.push_back(c);
  }
  s.hypothesis.score = s.score;
  return s;
}

}  // namespace

double face_match_score_from_iou(double iou) {
  return std::expm1(iou) / (std::numbers::e - 1.0);
}

double face_match_score(const Region& a, const Region& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = region_area(a) + region_area(b) - inter;
  return face_match_score_from_iou(std::clamp(inter / uni, 0.0, 1.0));
}

double face_match_score(const Polygon& a, const Polygon& b) {
  return face_match_score(Region(a), Region(b));
}

std::vector<double> face_weights(const Arrangement& arr) {
  const double total = arr.total_face_area();
  std::vector<double> w;
  w.reserve(arr.faces.size());
  for (const auto& f : arr.faces) w.push_back(f.area / total);
  return w;
}

Association associate(const Arrangement& a1, const Arrangement& a2, const Transform2& t) {
  return associate_regions(carried(a1, t), own_frame(a2));
}

ScoredAlignment arrangement_match_score(const Arrangement& a1, const Arrangement& a2,
                                        const Transform2& t) {
  Hypothesis h;
  h.transform = t;
  return score_with(own_frame(a2), face_weights(a1), face_weights(a2), a1, h);
}

std::vector<ScoredAlignment> score_hypotheses(const Arrangement& a1, const Arrangement& a2,
                                              std::span<const Hypothesis> hyps, unsigned threads) {
  const auto own2 = own_frame(a2);
  const auto w1 = face_weights(a1);
  const auto w2 = face_weights(a2);
  std::vector<ScoredAlignment> out(hyps.size());
  parallel_for(hyps.size(), threads,
               [&](std::size_t k) { out[k] = score_with(own2, w1, w2, a1, hyps[k]); });
  return out;
}

// Scores this close are rounding noise of the same overlay reached through
// different face pairs.
constexpr double kScoreTie = 1e-9;

std::size_t best_index(std::span<const ScoredAlignment> scored) {
  if (scored.empty()) throw Error(ErrorCode::kEmptyPool, "empty hypothesis pool");
  std::vector<double> scales;
  for (const auto& s : scored) scales.push_back(uniform_scale(s.hypothesis.transform));
  std::nth_element(scales.begin(), scales.begin() + static_cast<std::ptrdiff_t>(scales.size() / 2), scales.end());
  const double median = scales[scales.size() / 2];

  auto better = [&](const ScoredAlignment& a, const ScoredAlignment& b) {
    if (std::abs(a.score - b.score) > kScoreTie) return a.score > b.score;
    if (a.association.size() != b.association.size()) return a.association.size() > b.association.size();
    const double da = std::abs(uniform_scale(a.hypothesis.transform) - median);
    const double db = std::abs(uniform_scale(b.hypothesis.transform) - median);
    if (std::abs(da - db) > kScoreTie * median) return da < db;
    const auto& ha = a.hypothesis;
    const auto& hb = b.hypothesis;
    return std::tie(ha.source_face, ha.target_face, ha.shift) <
           std::tie(hb.source_face, hb.target_face, hb.shift);
  };
  std::size_t best = 0;
  for (std::size_t k = 1; k < scored.size(); ++k) {
    if (better(scored[k], scored[best])) best = k;
  }
  return best;
}

Transform2 fit_similarity(const Arrangement& a1, const Arrangement& a2, const Transform2& t,
                          std::span<const std::pair<int, int>> pairs) {
  // Four corner correspondences per usable pair, stored contiguously.
  std::vector<Point2> src, dst;
  for (const auto& [i, j] : pairs) {
    Polygon box1, box2;
    try {
      box1 = ombb(a1.faces.at(i).polygon());
      box2 = ombb(a2.faces.at(j).polygon());
    } catch (const Error&) {
      continue;
    }
    int best_shift = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 4; ++s) {
      double err = 0.0;
      for (int k = 0; k < 4; ++k) err += (t * box1[(k + s) % 4] - box2[k]).squaredNorm();
      if (err < best) {
        best = err;
        best_shift = s;
      }
    }
    for (int k = 0; k < 4; ++k) {
      src.push_back(box1[(k + best_shift) % 4]);
      dst.push_back(box2[k]);
    }
  }
  if (src.empty()) throw Error(ErrorCode::kDegenerate, "no face pair with a bounding box");

  // A face whose outline carries a thin appendage, or a wall found in one
  // map only, moves some box corners away from their partners. Every two
  // correspondences define a candidate; the one most corners agree with
  // (within kInlier pixels of map 2) is refit on those corners.
  constexpr double kInlier = 2.0;
  auto inliers_of = [&](const Transform2& fit, double& spread) {
    std::vector<std::size_t> in;
    spread = 0.0;
    for (std::size_t k = 0; k < src.size(); ++k) {
      const double r = (fit * src[k] - dst[k]).norm();
      if (r <= kInlier) {
        in.push_back(k);
        spread += r;
      }
    }
    return in;
  };
  std::vector<std::size_t> best_in;
  double best_spread = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    for (std::size_t j = i + 1; j < src.size(); ++j) {
      if ((src[i] - src[j]).norm() < 1.0 || (dst[i] - dst[j]).norm() < 1.0) continue;
      const std::array<Point2, 2> s{src[i], src[j]}, d{dst[i], dst[j]};
      double spread = 0.0;
      auto in = inliers_of(estimate_similarity<double>(s, d), spread);
      if (in.size() > best_in.size() || (in.size() == best_in.size() && spread < best_spread)) {
        best_in = std::move(in);
        best_spread = spread;
      }
    }
  }
  if (best_in.size() < 3) return estimate_similarity<double>(src, dst);
  Transform2 fit = Transform2::Identity();
  for (int round = 0; round < 3; ++round) {
    std::vector<Point2> s, d;
    for (std::size_t k : best_in) {
      s.push_back(src[k]);
      d.push_back(dst[k]);
    }
    fit = estimate_similarity<double>(s, d);
    double spread = 0.0;
    auto in = inliers_of(fit, spread);
    if (in == best_in || in.size() < 3) break;
    best_in = std::move(in);
  }
  return fit;
}

ScoredAlignment select_best(const Arrangement& a1, const Arrangement& a2,
                            std::span<const Hypothesis> hyps, unsigned threads) {
  if (hyps.empty()) throw Error(ErrorCode::kEmptyPool, "empty hypothesis pool");
  const auto scored = score_hypotheses(a1, a2, hyps, threads);
  ScoredAlignment winner = scored[best_index(scored)];
  winner.low_confidence = std::all_of(scored.begin(), scored.end(),
                                      [](const ScoredAlignment& s) { return s.score == 0.0; });
  return winner;
}

}  // namespace mapalign
