#include "mapalign/arrangement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "mapalign/error.hpp"

namespace mapalign {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Parameter range of the trait line (foot + s * direction) inside the frame.
std::optional<std::pair<double, double>> clip_to_frame(const Trait& t, const Frame& frame) {
  const Point2 p0 = t.foot();
  const Point2 d = t.direction();
  double lo = -kInf, hi = kInf;
  for (int axis = 0; axis < 2; ++axis) {
    if (std::abs(d[axis]) < 1e-15) {
      if (p0[axis] < frame.min()[axis] || p0[axis] > frame.max()[axis]) return std::nullopt;
      continue;
    }
    const double s1 = (frame.min()[axis] - p0[axis]) / d[axis];
    const double s2 = (frame.max()[axis] - p0[axis]) / d[axis];
    lo = std::max(lo, std::min(s1, s2));
    hi = std::min(hi, std::max(s1, s2));
  }
  if (!(hi - lo > 1e-9)) return std::nullopt;
  return std::make_pair(lo, hi);
}

Point2 clamp_to_frame(const Point2& p, const Frame& frame) {
  return p.cwiseMax(frame.min()).cwiseMin(frame.max());
}

// Points closer than the tolerance collapse onto the first one inserted.
class VertexPool {
 public:
  explicit VertexPool(double tolerance) : tolerance_(tolerance) {}

  int insert(const Point2& p) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if ((points_[i] - p).norm() <= tolerance_) return static_cast<int>(i);
    }
    points_.push_back(p);
    return static_cast<int>(points_.size()) - 1;
  }

  std::vector<Point2> release() { return std::move(points_); }

 private:
  double tolerance_;
  std::vector<Point2> points_;
};

struct Segment {
  Point2 a, b;
  int host;
};

void sort_incidence(PrimeGraph& g) {
  g.incidence.assign(g.vertices.size(), {});
  for (int h = 0; h < static_cast<int>(g.half_edge_count()); ++h) {
    g.incidence[g.half_edge_tail(h)].push_back(h);
  }
  for (std::size_t v = 0; v < g.vertices.size(); ++v) {
    auto& out = g.incidence[v];
    std::vector<std::pair<double, int>> keyed;
    keyed.reserve(out.size());
    for (int h : out) {
      const Point2 d = g.vertices[g.half_edge_head(h)] - g.vertices[v];
      keyed.emplace_back(std::atan2(d.y(), d.x()), h);
    }
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = keyed[i].second;
  }
}

// Partition of all half-edges into boundary loops. Leaving a vertex, a loop
// takes the outgoing half-edge immediately clockwise of the one it arrived
// on, so the traced region always stays on the left.
std::vector<std::vector<int>> trace_loops(const PrimeGraph& g) {
  const int nh = static_cast<int>(g.half_edge_count());
  std::vector<int> slot(nh, 0);
  for (const auto& out : g.incidence) {
    for (std::size_t i = 0; i < out.size(); ++i) slot[out[i]] = static_cast<int>(i);
  }
  auto next = [&](int h) {
    const int twin = h ^ 1;
    const auto& out = g.incidence[g.half_edge_tail(twin)];
    const int deg = static_cast<int>(out.size());
    return out[(slot[twin] - 1 + deg) % deg];
  };
  std::vector<char> visited(nh, 0);
  std::vector<std::vector<int>> loops;
  for (int start = 0; start < nh; ++start) {
    if (visited[start]) continue;
    std::vector<int> loop;
    int h = start;
    do {
      if (visited[h]) throw std::logic_error("half-edge traversal is not a permutation");
      visited[h] = 1;
      loop.push_back(h);
      h = next(h);
    } while (h != start);
    loops.push_back(std::move(loop));
  }
  return loops;
}

std::vector<Point2> loop_points(const PrimeGraph& g, const std::vector<int>& loop) {
  std::vector<Point2> pts;
  pts.reserve(loop.size());
  for (int h : loop) pts.push_back(g.vertices[g.half_edge_tail(h)]);
  return pts;
}

// Drops vertices where the boundary runs straight through.
Polygon corner_polygon(std::vector<Point2> pts) {
  bool changed = true;
  while (changed && pts.size() > 3) {
    changed = false;
    for (std::size_t i = 0; i < pts.size() && pts.size() > 3; ++i) {
      const std::size_t n = pts.size();
      const Point2 in = pts[i] - pts[(i + n - 1) % n];
      const Point2 out = pts[(i + 1) % n] - pts[i];
      if (std::abs(cross(in, out)) <= 1e-9 * in.norm() * out.norm() && in.dot(out) > 0) {
        pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        --i;
      }
    }
  }
  return Polygon{std::move(pts)};
}

Face make_face(const PrimeGraph& g, std::vector<int> outer, std::vector<std::vector<int>> holes) {
  Face f;
  std::vector<Polygon> hole_polys;
  for (const auto& h : holes) hole_polys.push_back(corner_polygon(loop_points(g, h)));
  f.region = Region(corner_polygon(loop_points(g, outer)), std::move(hole_polys));
  f.area = region_area(f.region);
  f.centroid = vertex_centroid(f.region.outer);
  f.boundary = std::move(outer);
  f.hole_boundaries = std::move(holes);
  return f;
}

// Faces ordered by centroid, x then y, so the numbering follows the geometry
// rather than the direction in which each trait happened to be clipped.
void order_faces(std::vector<Face>& faces, const Frame& frame) {
  const double tie = 1e-9 * frame.diagonal().norm();
  std::stable_sort(faces.begin(), faces.end(), [tie](const Face& a, const Face& b) {
    if (std::abs(a.centroid.x() - b.centroid.x()) > tie) return a.centroid.x() < b.centroid.x();
    if (std::abs(a.centroid.y() - b.centroid.y()) > tie) return a.centroid.y() < b.centroid.y();
    return false;
  });
}

std::vector<int> left_faces(const PrimeGraph& g, const std::vector<Face>& faces) {
  std::vector<int> left(g.half_edge_count(), -1);
  for (std::size_t i = 0; i < faces.size(); ++i) {
    for (int h : faces[i].boundary) left[h] = static_cast<int>(i);
    for (const auto& loop : faces[i].hole_boundaries) {
      for (int h : loop) left[h] = static_cast<int>(i);
    }
  }
  return left;
}

std::vector<std::pair<int, int>> neighborhood_of(const PrimeGraph& g, const std::vector<int>& left) {
  std::set<std::pair<int, int>> pairs;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const int a = left[2 * e], b = left[2 * e + 1];
    if (a >= 0 && b >= 0 && a != b) pairs.emplace(std::min(a, b), std::max(a, b));
  }
  return {pairs.begin(), pairs.end()};
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  int find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  // The smaller index stays the root.
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<int> parent_;
};

}  // namespace

double Arrangement::total_face_area() const {
  double sum = 0.0;
  for (const auto& f : faces) sum += f.area;
  return sum;
}

Arrangement build_arrangement(std::span<const Trait> traits, const Frame& frame,
                              const ArrangementParams& params) {
  if (frame.isEmpty() || !(frame.volume() > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "arrangement frame is degenerate");
  }
  const double tol = params.vertex_merge_tolerance;

  std::vector<Segment> segments;
  const Point2 c00 = frame.min(), c11 = frame.max();
  const Point2 c10(c11.x(), c00.y()), c01(c00.x(), c11.y());
  for (const auto& [a, b] : {std::pair{c00, c10}, {c10, c11}, {c11, c01}, {c01, c00}}) {
    segments.push_back({a, b, kFrameTrait});
  }
  std::vector<int> clipped;
  for (std::size_t i = 0; i < traits.size(); ++i) {
    if (auto range = clip_to_frame(traits[i], frame)) {
      const Point2 p0 = traits[i].foot(), d = traits[i].direction();
      segments.push_back({clamp_to_frame(p0 + range->first * d, frame),
                          clamp_to_frame(p0 + range->second * d, frame), static_cast<int>(i)});
      clipped.push_back(static_cast<int>(i));
    }
  }

  VertexPool pool(tol);
  for (const auto& s : segments) {
    pool.insert(s.a);
    pool.insert(s.b);
  }
  Frame grown = frame;
  grown.extend(frame.min() - Point2::Constant(tol)).extend(frame.max() + Point2::Constant(tol));
  for (std::size_t i = 0; i < clipped.size(); ++i) {
    for (std::size_t j = i + 1; j < clipped.size(); ++j) {
      const auto p = trait_intersection(traits[clipped[i]], traits[clipped[j]],
                                        params.parallel_tolerance);
      if (p && grown.contains(*p)) pool.insert(clamp_to_frame(*p, frame));
    }
  }

  Arrangement arr;
  arr.traits.assign(traits.begin(), traits.end());
  arr.frame = frame;
  PrimeGraph& g = arr.prime;
  g.vertices = pool.release();

  std::map<std::pair<int, int>, int> edge_index;
  for (const auto& s : segments) {
    const Point2 d = s.b - s.a;
    const double len = d.norm();
    const Point2 u = d / len;
    std::vector<std::pair<double, int>> on_segment;
    for (std::size_t v = 0; v < g.vertices.size(); ++v) {
      const Point2 r = g.vertices[v] - s.a;
      const double along = r.dot(u);
      if (std::abs(cross(u, r)) <= tol && along >= -tol && along <= len + tol) {
        on_segment.emplace_back(along, static_cast<int>(v));
      }
    }
    std::sort(on_segment.begin(), on_segment.end());
    for (std::size_t k = 0; k + 1 < on_segment.size(); ++k) {
      const int a = on_segment[k].second, b = on_segment[k + 1].second;
      if (a == b) continue;
      const auto key = std::minmax(a, b);
      if (edge_index.contains(key)) continue;
      edge_index.emplace(key, static_cast<int>(g.edges.size()));
      g.edges.push_back({s.host, a, b});
    }
  }
  if (std::none_of(g.edges.begin(), g.edges.end(), [](const PrimeEdge& e) { return !e.on_frame(); })) {
    throw Error(ErrorCode::kNoFaces, "no trait crosses the map frame");
  }
  sort_incidence(g);

  for (auto& loop : trace_loops(g)) {
    if (signed_area<double>(loop_points(g, loop)) > 0.0) {
      arr.faces.push_back(make_face(g, std::move(loop), {}));
    }
  }
  if (arr.faces.empty()) throw Error(ErrorCode::kNoFaces, "arrangement has no bounded face");
  order_faces(arr.faces, frame);
  arr.neighborhood = neighborhood_of(g, left_faces(g, arr.faces));
  return arr;
}

std::optional<double> edge_value(const PrimeGraph& graph, int edge, const DistanceMap& dmap,
                                 double band_radius) {
  const auto& e = graph.edges[edge];
  const Point2 a = graph.vertices[e.v_start] - dmap.origin;
  const Point2 b = graph.vertices[e.v_end] - dmap.origin;
  const Point2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x(), b.x()) - band_radius)));
  const int x1 = std::min(dmap.width() - 1, static_cast<int>(std::ceil(std::max(a.x(), b.x()) + band_radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y(), b.y()) - band_radius)));
  const int y1 = std::min(dmap.height() - 1, static_cast<int>(std::ceil(std::max(a.y(), b.y()) + band_radius)));
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const Point2 c(x + 0.5, y + 0.5);
      const double t = len2 > 0.0 ? std::clamp(ab.dot(c - a) / len2, 0.0, 1.0) : 0.0;
      if ((a + t * ab - c).norm() <= band_radius) {
        sum += dmap.at(x, y);
        ++n;
      }
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

Arrangement prune(const Arrangement& arr, const DistanceMap& dmap, const PruneParams& params) {
  if (!(params.thr_e > 0.0 && params.thr_e < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "thr_e must lie in (0, 1)");
  }
  const PrimeGraph& g = arr.prime;
  const std::size_t nf = arr.faces.size();
  const std::vector<int> left = left_faces(g, arr.faces);

  Arrangement out;
  out.traits = arr.traits;
  out.frame = arr.frame;
  out.warnings = arr.warnings;

  UnionFind groups(nf);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (g.edges[e].on_frame()) continue;
    const int fl = left[2 * e], fr = left[2 * e + 1];
    if (fl < 0 || fr < 0) continue;
    const auto value = edge_value(g, static_cast<int>(e), dmap, params.band_radius);
    if (!value) {
      out.warnings.push_back("edge " + std::to_string(e) +
                             " has no distance-map pixels nearby; removed");
    }
    if (!value || *value >= params.thr_e) groups.unite(fl, fr);
  }

  // Absorb degenerate regions, smallest first, into a neighbor.
  while (true) {
    std::vector<double> area(nf, 0.0), perim(nf, 0.0);
    std::vector<std::set<int>> corners(nf), neighbors(nf);
    for (std::size_t f = 0; f < nf; ++f) area[groups.find(static_cast<int>(f))] += arr.faces[f].area;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const int a = left[2 * e] < 0 ? -1 : groups.find(left[2 * e]);
      const int b = left[2 * e + 1] < 0 ? -1 : groups.find(left[2 * e + 1]);
      if (a == b) continue;
      const double len = (g.vertices[g.edges[e].v_end] - g.vertices[g.edges[e].v_start]).norm();
      for (int side : {a, b}) {
        if (side < 0) continue;
        perim[side] += len;
        corners[side].insert(g.edges[e].v_start);
        corners[side].insert(g.edges[e].v_end);
      }
      if (a >= 0 && b >= 0) {
        neighbors[a].insert(b);
        neighbors[b].insert(a);
      }
    }
    int victim = -1;
    for (std::size_t f = 0; f < nf; ++f) {
      const int r = static_cast<int>(f);
      if (groups.find(r) != r || neighbors[f].empty()) continue;
      const bool degenerate = area[f] < params.min_face_area || corners[f].size() < 3 ||
                              2.0 * area[f] / perim[f] < params.min_face_width;
      if (degenerate && (victim < 0 || area[f] < area[victim])) victim = r;
    }
    if (victim < 0) break;
    // The neighbor sharing the longest boundary takes it, the larger one on
    // a tie: a strip along the frame belongs to the room it runs along.
    std::map<int, double> shared;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const int a = left[2 * e] < 0 ? -1 : groups.find(left[2 * e]);
      const int b = left[2 * e + 1] < 0 ? -1 : groups.find(left[2 * e + 1]);
      if (a == b || a < 0 || b < 0 || (a != victim && b != victim)) continue;
      shared[a == victim ? b : a] += (g.vertices[g.edges[e].v_end] - g.vertices[g.edges[e].v_start]).norm();
    }
    int host = -1;
    for (const auto& [nb, len] : shared) {
      if (host < 0 || len > shared[host] + 1e-9 || (std::abs(len - shared[host]) <= 1e-9 && area[nb] > area[host])) {
        host = nb;
      }
    }
    groups.unite(victim, host);
  }

  // Surviving edges separate distinct regions (or lie on the frame).
  std::vector<int> vertex_map(g.vertices.size(), -1);
  std::vector<int> kept_edges;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const int a = left[2 * e] < 0 ? -1 : groups.find(left[2 * e]);
    const int b = left[2 * e + 1] < 0 ? -1 : groups.find(left[2 * e + 1]);
    if (g.edges[e].on_frame() || a != b) {
      kept_edges.push_back(static_cast<int>(e));
      vertex_map[g.edges[e].v_start] = 0;
      vertex_map[g.edges[e].v_end] = 0;
    }
  }
  PrimeGraph& pg = out.prime;
  for (std::size_t v = 0; v < g.vertices.size(); ++v) {
    if (vertex_map[v] < 0) continue;
    vertex_map[v] = static_cast<int>(pg.vertices.size());
    pg.vertices.push_back(g.vertices[v]);
  }
  for (int e : kept_edges) {
    const auto& old = g.edges[e];
    pg.edges.push_back({old.host_trait, vertex_map[old.v_start], vertex_map[old.v_end]});
  }
  sort_incidence(pg);

  // Each traced loop bounds exactly one region on its left: counter-clockwise
  // loops are outer boundaries, clockwise ones are holes.
  struct Loop {
    std::vector<int> half_edges;
    int group;
    double area;
  };
  std::vector<Loop> loops;
  for (auto& l : trace_loops(pg)) {
    const int h = l.front();
    const int old_h = 2 * kept_edges[h / 2] + (h % 2);
    const int group = left[old_h] < 0 ? -1 : groups.find(left[old_h]);
    const double a = signed_area<double>(loop_points(pg, l));
    loops.push_back({std::move(l), group, a});
  }
  std::vector<int> outer_of_loop(loops.size(), -1);
  std::vector<std::vector<int>> holes_of_face;
  std::vector<int> outer_loops;
  for (std::size_t i = 0; i < loops.size(); ++i) {
    if (loops[i].group >= 0 && loops[i].area > 0.0) {
      outer_of_loop[i] = static_cast<int>(outer_loops.size());
      outer_loops.push_back(static_cast<int>(i));
    }
  }
  holes_of_face.resize(outer_loops.size());
  for (std::size_t i = 0; i < loops.size(); ++i) {
    if (loops[i].group < 0 || loops[i].area > 0.0) continue;
    // A group is connected, so it normally has a single outer loop.
    const Point2 probe = pg.vertices[pg.half_edge_tail(loops[i].half_edges.front())];
    int owner = -1;
    for (std::size_t k = 0; k < outer_loops.size(); ++k) {
      const auto& ol = loops[outer_loops[k]];
      if (ol.group != loops[i].group) continue;
      if (owner < 0 || loop_contains<double>(loop_points(pg, ol.half_edges), probe)) {
        owner = static_cast<int>(k);
      }
    }
    if (owner >= 0) holes_of_face[owner].push_back(static_cast<int>(i));
  }
  for (std::size_t k = 0; k < outer_loops.size(); ++k) {
    std::vector<std::vector<int>> holes;
    for (int i : holes_of_face[k]) holes.push_back(loops[i].half_edges);
    out.faces.push_back(make_face(pg, loops[outer_loops[k]].half_edges, std::move(holes)));
  }
  if (out.faces.empty()) throw Error(ErrorCode::kNoFaces, "pruning left no faces");
  order_faces(out.faces, out.frame);
  out.neighborhood = neighborhood_of(pg, left_faces(pg, out.faces));
  return out;
}

Polygon face_polygon(const Arrangement& arr, int face) { return arr.faces.at(face).polygon(); }

Point2 face_centroid(const Arrangement& arr, int face) { return arr.faces.at(face).centroid; }

int locate_face(const Arrangement& arr, const Point2& p) {
  for (std::size_t i = 0; i < arr.faces.size(); ++i) {
    if (contains(arr.faces[i].region, p)) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace mapalign
