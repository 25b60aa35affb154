#pragma once

// Planar arrangement of line traits inside a rectangular frame, and its
// pruning into a region segmentation using a distance map.

#include <Eigen/Geometry>

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mapalign/geometry.hpp"
#include "mapalign/raster.hpp"

namespace mapalign {

using Frame = Eigen::AlignedBox2d;

// Host index of edges that lie on the frame boundary.
inline constexpr int kFrameTrait = -1;

struct PrimeEdge {
  int host_trait = kFrameTrait;
  int v_start = 0;
  int v_end = 0;

  bool on_frame() const { return host_trait == kFrameTrait; }
};

// Half-edge h runs along edge h / 2, from v_start to v_end when h is even
// and backwards when odd.
struct PrimeGraph {
  std::vector<Point2> vertices;
  std::vector<PrimeEdge> edges;
  // Outgoing half-edges of each vertex, sorted by direction angle.
  std::vector<std::vector<int>> incidence;

  int half_edge_tail(int h) const { return h % 2 == 0 ? edges[h / 2].v_start : edges[h / 2].v_end; }
  int half_edge_head(int h) const { return half_edge_tail(h ^ 1); }
  std::size_t half_edge_count() const { return 2 * edges.size(); }
};

struct Face {
  std::vector<int> boundary;                     // half-edge loop, counter-clockwise
  std::vector<std::vector<int>> hole_boundaries;  // clockwise half-edge loops
  Region region;  // corner vertices of the boundary loops
  double area = 0.0;
  Point2 centroid = Point2::Zero();  // mean of the outer corner vertices

  const Polygon& polygon() const { return region.outer; }
};

struct Arrangement {
  std::vector<Trait> traits;
  Frame frame;
  PrimeGraph prime;
  std::vector<Face> faces;  // by centroid, x then y
  std::vector<std::pair<int, int>> neighborhood;  // (i, j) with i < j, sorted
  std::vector<std::string> warnings;

  double total_face_area() const;
};

struct ArrangementParams {
  double vertex_merge_tolerance = 0.5;  // pixels
  double parallel_tolerance = kExactParallelTolerance;  // radians
};

struct PruneParams {
  double thr_e = 0.075;
  double band_radius = 3.0;     // pixels
  double min_face_area = 4.0;   // square pixels
  double min_face_width = 6.0;  // pixels; 2 * area / perimeter
};

// Clips every trait to the frame and adds the frame sides as boundary edges,
// so all faces are bounded. Faces are traced over half-edges, keeping the
// face on the left. Throws kNoFaces when no trait crosses the frame.
Arrangement build_arrangement(std::span<const Trait> traits, const Frame& frame,
                              const ArrangementParams& params = {});

// Mean distance-map value over the pixels whose centers lie within
// band_radius of the edge, or nullopt when no pixel does.
std::optional<double> edge_value(const PrimeGraph& graph, int edge,
                                 const DistanceMap& dmap, double band_radius);

// Removes every non-frame edge whose edge value reaches thr_e, merges the
// faces across removed edges, absorbs degenerate faces (too small, too thin)
// into the neighbor sharing most of their boundary, and rebuilds faces and adjacency from the
// surviving edges. Isolated vertices are dropped.
Arrangement prune(const Arrangement& arr, const DistanceMap& dmap,
                  const PruneParams& params = {});

Polygon face_polygon(const Arrangement& arr, int face);
Point2 face_centroid(const Arrangement& arr, int face);

// Index of the face containing p, or -1.
int locate_face(const Arrangement& arr, const Point2& p);

}  // namespace mapalign
