#pragma once

// Brute-force reference computations the library results are compared to.

#include <random>
#include <span>
#include <vector>

#include "mapalign/arrangement.hpp"
#include "mapalign/geometry.hpp"

namespace mapalign::testing {

// Cells of a line arrangement inside a frame by point location: samples on a
// regular grid are grouped by the side of every line they fall on. Each
// group is the intersection of half-planes with the frame, hence one convex
// connected cell; grouping by sign rather than flood fill keeps thin wedge
// tips, which the sampling grid cuts off, with their cell. Areas are sample
// counts times the sample area.
struct CellCensus {
  std::vector<double> areas;
  std::vector<Point2> seeds;  // one sample inside each cell
};

// n lines crossing the frame in general position: pairwise angles at least
// 5 degrees apart, and no two crossings, no crossing and frame side, and no
// line and frame corner closer than `clearance`.
std::vector<Trait> random_lines(std::mt19937& rng, int n, const Frame& frame, double clearance = 2.0);

CellCensus sample_cells(std::span<const Trait> traits, const Frame& frame, double step);

struct GridFit {
  double angle = 0.0;
  double scale = 1.0;
  Point2 translation = Point2::Zero();
  double residual = 0.0;  // sum of squared distances
  double angle_step = 0.0, scale_step = 0.0, translation_step = 0.0;  // final resolution
};

// Exhaustive search over rotation, scale and translation on a grid that is
// zoomed around the best point a fixed number of times. Rotation and scale
// are searched about the source centroid; `translation` is converted back to
// the usual x -> sRx + t form.
GridFit grid_search_similarity(std::span<const Point2> src, std::span<const Point2> dst);

double similarity_residual(std::span<const Point2> src, std::span<const Point2> dst,
                           const Transform2& t);

}  // namespace mapalign::testing
