#pragma once

// 2D geometry kernel: points, line traits, polygons and polygonal regions,
// boolean areas, oriented minimum bounding boxes and least-squares transform
// estimation. Everything here is header-only and templated on the scalar
// type; the rest of the library instantiates it with double.

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "mapalign/error.hpp"

namespace mapalign {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Affine2 = Eigen::Transform<Scalar, 2, Eigen::Affine>;

using Point2 = Vector2<double>;
using Transform2 = Affine2<double>;

inline constexpr double kPi = std::numbers::pi;

template <typename Scalar>
Scalar cross(const Vector2<Scalar>& a, const Vector2<Scalar>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// ---------------------------------------------------------------------------
// Traits

enum class TraitKind { kLine };

// An unbounded straight line in Hesse normal form: p lies on the line iff
// p . (cos(angle), sin(angle)) == offset. The angle is kept in [0, pi) so the
// representation is canonical.
struct Trait {
  TraitKind kind = TraitKind::kLine;
  double angle = 0.0;
  double offset = 0.0;

  static Trait line(double angle, double offset) {
    angle = std::fmod(angle, 2.0 * kPi);
    if (angle < 0.0) angle += 2.0 * kPi;
    if (angle >= kPi) {
      angle -= kPi;
      offset = -offset;
    }
    if (angle >= kPi) angle = 0.0;  // rounding at the upper boundary
    return Trait{TraitKind::kLine, angle, offset};
  }

  // Line through two distinct points.
  static Trait through(const Point2& a, const Point2& b) {
    const Point2 d = b - a;
    if (d.norm() == 0.0) {
      throw Error(ErrorCode::kDegenerate, "line through coincident points");
    }
    const double angle = std::atan2(d.y(), d.x()) + kPi / 2.0;
    const Point2 n(std::cos(angle), std::sin(angle));
    return line(angle, n.dot(a));
  }

  Point2 normal() const { return {std::cos(angle), std::sin(angle)}; }
  Point2 direction() const { return {-std::sin(angle), std::cos(angle)}; }
  Point2 foot() const { return offset * normal(); }
  double signed_distance(const Point2& p) const {
    return normal().dot(p) - offset;
  }
};

inline constexpr double kExactParallelTolerance = 1e-9;

// Intersection of two line traits, or nullopt when they are parallel within
// `parallel_tolerance` radians.
inline std::optional<Point2> trait_intersection(
    const Trait& a, const Trait& b,
    double parallel_tolerance = kExactParallelTolerance) {
  const double det = std::sin(b.angle - a.angle);
  if (std::abs(det) < std::sin(parallel_tolerance)) return std::nullopt;
  Eigen::Matrix2d m;
  m << std::cos(a.angle), std::sin(a.angle), std::cos(b.angle),
      std::sin(b.angle);
  return Point2(m.inverse() * Eigen::Vector2d(a.offset, b.offset));
}

// ---------------------------------------------------------------------------
// Polygons

// Simple polygon, counter-clockwise, implicitly closed.
template <typename Scalar>
struct PolygonT {
  std::vector<Vector2<Scalar>> vertices;

  std::size_t size() const { return vertices.size(); }
  const Vector2<Scalar>& operator[](std::size_t i) const { return vertices[i]; }
};
using Polygon = PolygonT<double>;

template <typename Scalar>
Scalar signed_area(std::span<const Vector2<Scalar>> loop) {
  Scalar sum = 0;
  for (std::size_t i = 0, n = loop.size(); i < n; ++i) {
    sum += cross(loop[i], loop[(i + 1) % n]);
  }
  return sum / 2;
}

template <typename Scalar>
Scalar signed_area(const PolygonT<Scalar>& p) {
  return signed_area<Scalar>(std::span<const Vector2<Scalar>>(p.vertices));
}

template <typename Scalar>
Scalar polygon_area(const PolygonT<Scalar>& p) {
  return std::abs(signed_area(p));
}

template <typename Scalar>
Scalar perimeter(const PolygonT<Scalar>& p) {
  Scalar sum = 0;
  for (std::size_t i = 0, n = p.size(); i < n; ++i) {
    sum += (p[(i + 1) % n] - p[i]).norm();
  }
  return sum;
}

// Arithmetic mean of the vertex positions (not the area centroid).
template <typename Scalar>
Vector2<Scalar> vertex_centroid(const PolygonT<Scalar>& p) {
  Vector2<Scalar> c = Vector2<Scalar>::Zero();
  for (const auto& v : p.vertices) c += v;
  return c / static_cast<Scalar>(p.size());
}

template <typename Scalar>
std::pair<Vector2<Scalar>, Vector2<Scalar>> bounding_box(
    std::span<const Vector2<Scalar>> points) {
  Vector2<Scalar> lo = points.front(), hi = points.front();
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return {lo, hi};
}

// Even-odd crossing test. Points exactly on the boundary may land on either
// side.
template <typename Scalar>
bool loop_contains(std::span<const Vector2<Scalar>> loop,
                   const Vector2<Scalar>& p) {
  bool inside = false;
  for (std::size_t i = 0, n = loop.size(), j = n - 1; i < n; j = i++) {
    const auto& a = loop[i];
    const auto& b = loop[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const Scalar x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

template <typename Scalar>
bool contains(const PolygonT<Scalar>& poly, const Vector2<Scalar>& p) {
  return loop_contains<Scalar>(poly.vertices, p);
}

template <typename Scalar>
PolygonT<Scalar> transformed(const PolygonT<Scalar>& poly,
                             const Affine2<Scalar>& t) {
  PolygonT<Scalar> out;
  out.vertices.reserve(poly.size());
  for (const auto& v : poly.vertices) out.vertices.push_back(t * v);
  if (t.linear().determinant() < 0) {
    std::reverse(out.vertices.begin(), out.vertices.end());
  }
  return out;
}

// A polygonal region: one outer boundary and zero or more disjoint holes.
// Outer is stored counter-clockwise, holes clockwise.
template <typename Scalar>
struct RegionT {
  PolygonT<Scalar> outer;
  std::vector<PolygonT<Scalar>> holes;

  RegionT() = default;
  explicit RegionT(PolygonT<Scalar> outer_loop,
                   std::vector<PolygonT<Scalar>> hole_loops = {})
      : outer(std::move(outer_loop)), holes(std::move(hole_loops)) {
    if (signed_area(outer) < 0) {
      std::reverse(outer.vertices.begin(), outer.vertices.end());
    }
    for (auto& h : holes) {
      if (signed_area(h) > 0) std::reverse(h.vertices.begin(), h.vertices.end());
    }
  }
};
using Region = RegionT<double>;

template <typename Scalar>
Scalar region_area(const RegionT<Scalar>& r) {
  Scalar a = signed_area(r.outer);
  for (const auto& h : r.holes) a += signed_area(h);
  return a;
}

template <typename Scalar>
bool contains(const RegionT<Scalar>& r, const Vector2<Scalar>& p) {
  if (!contains(r.outer, p)) return false;
  for (const auto& h : r.holes) {
    if (contains(h, p)) return false;
  }
  return true;
}

template <typename Scalar>
RegionT<Scalar> transformed(const RegionT<Scalar>& r, const Affine2<Scalar>& t) {
  RegionT<Scalar> out;
  out.outer = transformed(r.outer, t);
  for (const auto& h : r.holes) out.holes.push_back(transformed(h, t));
  return out;
}

namespace detail {

template <typename Scalar>
void for_each_loop(const RegionT<Scalar>& r, auto&& fn) {
  fn(std::span<const Vector2<Scalar>>(r.outer.vertices));
  for (const auto& h : r.holes) fn(std::span<const Vector2<Scalar>>(h.vertices));
}

// Parameters t in (0,1) along p->q where the segment s->e touches it.
template <typename Scalar>
void collect_splits(const Vector2<Scalar>& p, const Vector2<Scalar>& q,
                    const Vector2<Scalar>& s, const Vector2<Scalar>& e,
                    Scalar eps, std::vector<Scalar>& ts) {
  const Vector2<Scalar> r = q - p;
  const Vector2<Scalar> d = e - s;
  const Scalar rr = r.squaredNorm();
  const Scalar denom = cross(r, d);
  const Scalar rlen = std::sqrt(rr);
  const Scalar dlen = d.norm();
  if (std::abs(denom) <= eps * rlen * std::max(dlen, Scalar(1))) {
    // Parallel: only overlapping collinear pieces split the edge.
    if (std::abs(cross(r, Vector2<Scalar>(s - p))) > eps * rlen) return;
    for (const auto& x : {s, e}) {
      const Scalar t = r.dot(x - p) / rr;
      if (t > 0 && t < 1) ts.push_back(t);
    }
    return;
  }
  const Scalar t = cross(Vector2<Scalar>(s - p), d) / denom;
  const Scalar u = cross(Vector2<Scalar>(s - p), r) / denom;
  const Scalar tol_t = eps / rlen;
  const Scalar tol_u = dlen > 0 ? eps / dlen : Scalar(0);
  if (u < -tol_u || u > 1 + tol_u) return;
  if (t > tol_t && t < 1 - tol_t) ts.push_back(t);
}

enum class Side { kOutside, kInside, kOnSame, kOnOpposite };

template <typename Scalar>
Side classify(const RegionT<Scalar>& r, const Vector2<Scalar>& m,
              const Vector2<Scalar>& dir, Scalar eps) {
  std::optional<Side> on;
  for_each_loop(r, [&](std::span<const Vector2<Scalar>> loop) {
    for (std::size_t i = 0, n = loop.size(); i < n && !on; ++i) {
      const auto& a = loop[i];
      const auto& b = loop[(i + 1) % n];
      const Vector2<Scalar> ab = b - a;
      const Scalar len2 = ab.squaredNorm();
      if (len2 == 0) continue;
      const Scalar t = std::clamp(ab.dot(m - a) / len2, Scalar(0), Scalar(1));
      if ((a + t * ab - m).norm() <= eps) {
        on = ab.dot(dir) > 0 ? Side::kOnSame : Side::kOnOpposite;
      }
    }
  });
  if (on) return *on;
  bool inside = false;
  for_each_loop(r, [&](std::span<const Vector2<Scalar>> loop) {
    if (loop_contains(loop, m)) inside = !inside;
  });
  return inside ? Side::kInside : Side::kOutside;
}

// Contour integral (1/2) x dy - y dx over the pieces of a's boundary that lie
// inside b. Pieces running along b's boundary count only when they have the
// same direction and `keep_shared` is set.
template <typename Scalar>
Scalar inside_boundary_integral(const RegionT<Scalar>& a,
                                const RegionT<Scalar>& b, bool keep_shared,
                                Scalar eps) {
  Scalar sum = 0;
  std::vector<Scalar> ts;
  for_each_loop(a, [&](std::span<const Vector2<Scalar>> loop) {
    for (std::size_t i = 0, n = loop.size(); i < n; ++i) {
      const Vector2<Scalar> p = loop[i];
      const Vector2<Scalar> q = loop[(i + 1) % n];
      const Vector2<Scalar> r = q - p;
      if (r.squaredNorm() == 0) continue;
      ts.assign({Scalar(0), Scalar(1)});
      for_each_loop(b, [&](std::span<const Vector2<Scalar>> other) {
        for (std::size_t k = 0, m = other.size(); k < m; ++k) {
          collect_splits(p, q, other[k], other[(k + 1) % m], eps, ts);
        }
      });
      std::sort(ts.begin(), ts.end());
      for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
        const Vector2<Scalar> a0 = p + ts[k] * r;
        const Vector2<Scalar> a1 = p + ts[k + 1] * r;
        if ((a1 - a0).norm() <= eps) continue;
        const Side side = classify(b, Vector2<Scalar>((a0 + a1) / 2), r, eps);
        if (side == Side::kInside || (keep_shared && side == Side::kOnSame)) {
          sum += cross(a0, a1) / 2;
        }
      }
    }
  });
  return sum;
}

template <typename Scalar>
Scalar coordinate_scale(const RegionT<Scalar>& a, const RegionT<Scalar>& b) {
  Scalar s = 1;
  for (const auto* r : {&a, &b}) {
    for (const auto& v : r->outer.vertices) s = std::max(s, v.cwiseAbs().maxCoeff());
  }
  return s;
}

}  // namespace detail

// Area of the set intersection of two regions. The boundary of a ∩ b is made
// of the parts of each boundary lying inside the other region, so the area
// follows from Green's theorem over those fragments.
template <typename Scalar>
Scalar intersection_area(const RegionT<Scalar>& a, const RegionT<Scalar>& b) {
  const auto [alo, ahi] = bounding_box<Scalar>(a.outer.vertices);
  const auto [blo, bhi] = bounding_box<Scalar>(b.outer.vertices);
  if ((alo.array() > bhi.array()).any() || (blo.array() > ahi.array()).any()) {
    return 0;
  }
  const Scalar eps = Scalar(1e-9) * detail::coordinate_scale(a, b);
  const Scalar area = detail::inside_boundary_integral(a, b, true, eps) +
                      detail::inside_boundary_integral(b, a, false, eps);
  return std::clamp(area, Scalar(0), std::min(region_area(a), region_area(b)));
}

template <typename Scalar>
Scalar union_area(const RegionT<Scalar>& a, const RegionT<Scalar>& b) {
  return region_area(a) + region_area(b) - intersection_area(a, b);
}

template <typename Scalar>
Scalar polygon_intersection_area(const PolygonT<Scalar>& a,
                                 const PolygonT<Scalar>& b) {
  return intersection_area(RegionT<Scalar>(a), RegionT<Scalar>(b));
}

template <typename Scalar>
Scalar polygon_union_area(const PolygonT<Scalar>& a, const PolygonT<Scalar>& b) {
  return union_area(RegionT<Scalar>(a), RegionT<Scalar>(b));
}

// ---------------------------------------------------------------------------
// Convex hull and oriented minimum bounding box

// Monotone chain; counter-clockwise, no collinear points.
template <typename Scalar>
std::vector<Vector2<Scalar>> convex_hull(std::vector<Vector2<Scalar>> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Vector2<Scalar>> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(Vector2<Scalar>(hull[k - 1] - hull[k - 2]),
                           Vector2<Scalar>(pts[i] - hull[k - 2])) <= 0) {
      --k;
    }
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(Vector2<Scalar>(hull[k - 1] - hull[k - 2]),
                           Vector2<Scalar>(pts[i] - hull[k - 2])) <= 0) {
      --k;
    }
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Minimum-area enclosing rectangle (rotating calipers over the hull edges).
// The result is counter-clockwise and starts at its lexicographically
// smallest corner.
template <typename Scalar>
PolygonT<Scalar> ombb(std::span<const Vector2<Scalar>> points) {
  const auto hull = convex_hull(
      std::vector<Vector2<Scalar>>(points.begin(), points.end()));
  if (hull.size() < 3) {
    throw Error(ErrorCode::kDegenerate, "bounding box of collinear points");
  }
  const auto [lo, hi] = bounding_box<Scalar>(hull);
  if (std::abs(signed_area<Scalar>(hull)) <= Scalar(1e-12) * (hi - lo).squaredNorm()) {
    throw Error(ErrorCode::kDegenerate, "bounding box of collinear points");
  }
  Scalar best_area = std::numeric_limits<Scalar>::infinity();
  PolygonT<Scalar> best;
  for (std::size_t i = 0, n = hull.size(); i < n; ++i) {
    const Vector2<Scalar> u = (hull[(i + 1) % n] - hull[i]).normalized();
    const Vector2<Scalar> v(-u.y(), u.x());
    Scalar umin = std::numeric_limits<Scalar>::infinity(), umax = -umin;
    Scalar vmin = umin, vmax = -umin;
    for (const auto& p : hull) {
      umin = std::min(umin, u.dot(p));
      umax = std::max(umax, u.dot(p));
      vmin = std::min(vmin, v.dot(p));
      vmax = std::max(vmax, v.dot(p));
    }
    const Scalar area = (umax - umin) * (vmax - vmin);
    if (area < best_area) {
      best_area = area;
      best.vertices = {umin * u + vmin * v, umax * u + vmin * v,
                       umax * u + vmax * v, umin * u + vmax * v};
    }
  }
  const auto first = std::min_element(
      best.vertices.begin(), best.vertices.end(), [](const auto& a, const auto& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
      });
  std::rotate(best.vertices.begin(), first, best.vertices.end());
  return best;
}

template <typename Scalar>
PolygonT<Scalar> ombb(const PolygonT<Scalar>& poly) {
  return ombb<Scalar>(std::span<const Vector2<Scalar>>(poly.vertices));
}

// ---------------------------------------------------------------------------
// Transform estimation

template <typename Scalar>
Eigen::Matrix<Scalar, 2, Eigen::Dynamic> as_matrix(
    std::span<const Vector2<Scalar>> pts) {
  Eigen::Matrix<Scalar, 2, Eigen::Dynamic> m(2, pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) m.col(i) = pts[i];
  return m;
}

// Least-squares similarity (uniform scale, proper rotation, translation)
// mapping src onto dst.
template <typename Scalar>
Affine2<Scalar> estimate_similarity(std::span<const Vector2<Scalar>> src,
                                    std::span<const Vector2<Scalar>> dst) {
  if (src.size() != dst.size() || src.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "similarity needs two equally sized sets of at least 2 points");
  }
  const auto s = as_matrix(src);
  const Vector2<Scalar> mean = s.rowwise().mean();
  if ((s.colwise() - mean).squaredNorm() <= Scalar(1e-18) * (1 + mean.squaredNorm())) {
    throw Error(ErrorCode::kDegenerate, "similarity from coincident points");
  }
  Affine2<Scalar> t;
  t.matrix() = Eigen::umeyama(s, as_matrix(dst), true);
  return t;
}

// Least-squares 6-DOF affine transform mapping src onto dst.
template <typename Scalar>
Affine2<Scalar> estimate_affine(std::span<const Vector2<Scalar>> src,
                                std::span<const Vector2<Scalar>> dst) {
  if (src.size() != dst.size() || src.size() < 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "affine needs two equally sized sets of at least 3 points");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(src.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, 3> a(n, 3);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> b(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    a.row(i) << src[i].x(), src[i].y(), Scalar(1);
    b.row(i) = dst[i].transpose();
  }
  // Center the design so the rank test is translation invariant.
  const Vector2<Scalar> mean = a.template leftCols<2>().colwise().mean();
  a.template leftCols<2>().rowwise() -= mean.transpose();
  Eigen::ColPivHouseholderQR<decltype(a)> qr(a);
  qr.setThreshold(Scalar(1e-10));
  if (qr.rank() < 3) {
    throw Error(ErrorCode::kDegenerate, "affine from collinear points");
  }
  const Eigen::Matrix<Scalar, 3, 2> x = qr.solve(b);
  Affine2<Scalar> t = Affine2<Scalar>::Identity();
  t.linear() = x.template topRows<2>().transpose();
  t.translation() = x.row(2).transpose() - t.linear() * mean;
  return t;
}

template <typename Scalar>
struct ScaleDecompositionT {
  Scalar s_x = 1;  // larger singular value
  Scalar s_y = 1;  // smaller singular value
  bool reflection = false;
};
using ScaleDecomposition = ScaleDecompositionT<double>;

template <typename Scalar>
ScaleDecompositionT<Scalar> decompose_scales(const Affine2<Scalar>& t) {
  Eigen::JacobiSVD<Eigen::Matrix<Scalar, 2, 2>> svd(t.linear());
  const auto sv = svd.singularValues();
  return {sv(0), sv(1), t.linear().determinant() < 0};
}

// Uniform scale of a (near-)similarity transform.
template <typename Scalar>
Scalar uniform_scale(const Affine2<Scalar>& t) {
  return std::sqrt(std::abs(t.linear().determinant()));
}

// Rotation angle of the linear block, in (-pi, pi].
template <typename Scalar>
Scalar rotation_angle(const Affine2<Scalar>& t) {
  const auto& l = t.linear();
  return std::atan2(l(1, 0) - l(0, 1), l(0, 0) + l(1, 1));
}

}  // namespace mapalign
