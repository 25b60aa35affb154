#include "mapalign/alignment.hpp"

#include <cmath>

#include "mapalign/error.hpp"
#include "mapalign/parallel.hpp"

namespace mapalign {
namespace {

double interior_angle(const Point2& prev, const Point2& v, const Point2& next) {
  const Point2 in = v - prev;
  const Point2 out = next - v;
  const double turn = std::atan2(cross(in, out), in.dot(out));
  return kPi - turn;
}

// Shortest distance between two angles on the circle.
double angle_gap(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 2.0 * kPi);
  return std::min(d, 2.0 * kPi - d);
}

}  // namespace

ShapeDescriptor shape_descriptor(const Polygon& face, double corner_tolerance) {
  std::vector<Point2> pts = face.vertices;
  if (signed_area(face) < 0) std::reverse(pts.begin(), pts.end());
  // Straight-through vertices are removed one at a time, the flattest first,
  // so a run of nearly collinear vertices cannot erase a real corner.
  while (pts.size() > 3) {
    std::size_t flattest = pts.size();
    double best = corner_tolerance;
    for (std::size_t i = 0, n = pts.size(); i < n; ++i) {
      const double dev = std::abs(interior_angle(pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n]) - kPi);
      if (dev <= best) {
        best = dev;
        flattest = i;
      }
    }
    if (flattest == pts.size()) break;
    pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(flattest));
  }
  const std::size_t n = pts.size();
  bool flat = n < 3;
  for (std::size_t i = 0; i < n && !flat; ++i) {
    flat = std::abs(interior_angle(pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n]) - kPi) <= corner_tolerance;
  }
  if (flat) throw Error(ErrorCode::kDegenerate, "shape descriptor needs at least 3 corners");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += (pts[(i + 1) % n] - pts[i]).norm();
  ShapeDescriptor d;
  d.corners = pts;
  for (std::size_t i = 0; i < n; ++i) {
    d.entries.push_back({interior_angle(pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n]),
                         (pts[(i + 1) % n] - pts[i]).norm() / total});
  }
  return d;
}

std::vector<int> match_descriptors(const ShapeDescriptor& a, const ShapeDescriptor& b,
                                   const MatchTolerances& tol) {
  std::vector<int> shifts;
  const std::size_t n = a.size();
  if (n != b.size() || n == 0) return shifts;
  for (std::size_t s = 0; s < n; ++s) {
    bool ok = true;
    for (std::size_t k = 0; k < n && ok; ++k) {
      const auto& ea = a.entries[(k + s) % n];
      const auto& eb = b.entries[k];
      if (tol.use_angle && angle_gap(ea.corner_angle, eb.corner_angle) > tol.angle) ok = false;
      if (tol.use_ratio && std::abs(ea.edge_ratio - eb.edge_ratio) > tol.ratio) ok = false;
    }
    if (ok) shifts.push_back(static_cast<int>(s));
  }
  return shifts;
}

std::vector<Hypothesis> generate_hypotheses_exact(const Arrangement& a1, const Arrangement& a2,
                                                  const MatchTolerances& tol, unsigned threads) {
  auto describe = [&](const Arrangement& arr) {
    std::vector<std::optional<ShapeDescriptor>> out;
    for (const auto& f : arr.faces) {
      try {
        out.push_back(shape_descriptor(f.polygon(), tol.corner));
      } catch (const Error&) {
        out.emplace_back();
      }
    }
    return out;
  };
  const auto d1 = describe(a1);
  const auto d2 = describe(a2);

  std::vector<std::vector<Hypothesis>> per_source(d1.size());
  parallel_for(d1.size(), threads, [&](std::size_t i) {
    if (!d1[i]) return;
    for (std::size_t j = 0; j < d2.size(); ++j) {
      if (!d2[j]) continue;
      const std::size_t n = d1[i]->size();
      for (int s : match_descriptors(*d1[i], *d2[j], tol)) {
        std::vector<Point2> src(n);
        for (std::size_t k = 0; k < n; ++k) src[k] = d1[i]->corners[(k + s) % n];
        Hypothesis h;
        h.transform = estimate_similarity<double>(src, d2[j]->corners);
        h.source_face = static_cast<int>(i);
        h.target_face = static_cast<int>(j);
        h.shift = s;
        h.kind = HypothesisKind::kExact;
        per_source[i].push_back(h);
      }
    }
  });
  std::vector<Hypothesis> all;
  for (auto& v : per_source) all.insert(all.end(), v.begin(), v.end());
  return all;
}

std::vector<Hypothesis> generate_hypotheses_ombb(const Arrangement& a1, const Arrangement& a2,
                                                 unsigned threads,
                                                 std::vector<std::string>* warnings) {
  auto boxes = [&](const Arrangement& arr, const char* name) {
    std::vector<std::optional<Polygon>> out;
    for (std::size_t i = 0; i < arr.faces.size(); ++i) {
      try {
        out.push_back(ombb(arr.faces[i].polygon()));
      } catch (const Error&) {
        out.emplace_back();
        if (warnings) {
          warnings->push_back(std::string(name) + " face " + std::to_string(i) +
                              " has a degenerate bounding box; skipped");
        }
      }
    }
    return out;
  };
  const auto b1 = boxes(a1, "map1");
  const auto b2 = boxes(a2, "map2");

  std::vector<std::vector<Hypothesis>> per_source(b1.size());
  parallel_for(b1.size(), threads, [&](std::size_t i) {
    if (!b1[i]) return;
    for (std::size_t j = 0; j < b2.size(); ++j) {
      if (!b2[j]) continue;
      for (int s = 0; s < 4; ++s) {
        std::vector<Point2> src(4);
        for (int k = 0; k < 4; ++k) src[k] = b1[i]->vertices[(k + s) % 4];
        Hypothesis h;
        h.transform = estimate_affine<double>(src, b2[j]->vertices);
        h.source_face = static_cast<int>(i);
        h.target_face = static_cast<int>(j);
        h.shift = s;
        h.kind = HypothesisKind::kOmbb;
        per_source[i].push_back(h);
      }
    }
  });
  std::vector<Hypothesis> all;
  for (auto& v : per_source) all.insert(all.end(), v.begin(), v.end());
  return all;
}

bool is_acceptable_similarity(const Transform2& t, double thr_s) {
  const auto d = decompose_scales(t);
  if (d.reflection || !(d.s_y > 0.0)) return false;
  const double ratio = d.s_x / d.s_y;
  return 1.0 / thr_s < ratio && ratio < thr_s;
}

std::vector<Hypothesis> reject_false_positives(const std::vector<Hypothesis>& hyps, double thr_s) {
  if (!(thr_s > 1.0)) throw Error(ErrorCode::kInvalidArgument, "thr_s must exceed 1");
  std::vector<Hypothesis> kept;
  for (const auto& h : hyps) {
    if (is_acceptable_similarity(h.transform, thr_s)) kept.push_back(h);
  }
  return kept;
}

}  // namespace mapalign
