#pragma once

// Bitmap maps: occupancy grids, their normalized distance transform, and
// straight-line trait detection by gradient-weighted Radon accumulation
// ("radiography").

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mapalign/geometry.hpp"
#include "mapalign/image_io.hpp"

namespace mapalign {

enum class CellState : std::uint8_t { kFree = 0, kOccupied = 1, kUnknown = 2 };

using RealRaster = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Cell (x, y) covers [x, x+1] x [y, y+1] in pixel units, offset by `origin`.
struct OccupancyGrid {
  int width = 0;
  int height = 0;
  std::vector<CellState> cells;
  Point2 origin = Point2::Zero();
  double resolution = 1.0;  // meters per pixel; informational only

  OccupancyGrid() = default;
  OccupancyGrid(int w, int h, CellState fill = CellState::kFree,
                Point2 grid_origin = Point2::Zero());

  CellState at(int x, int y) const { return cells[index(x, y)]; }
  void set(int x, int y, CellState s) { cells[index(x, y)] = s; }
  bool occupied(int x, int y) const { return at(x, y) == CellState::kOccupied; }

  Point2 cell_center(int x, int y) const { return origin + Point2(x + 0.5, y + 0.5); }
  Eigen::AlignedBox2d bounds() const {
    return {origin, origin + Point2(width, height)};
  }
  std::size_t count(CellState s) const;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + x;
  }
};

// Euclidean distance to the nearest occupied cell, scaled to [0, 1].
struct DistanceMap {
  RealRaster values;  // height x width
  Point2 origin = Point2::Zero();
  double max_distance = 0.0;  // pixels, before normalization

  int width() const { return static_cast<int>(values.cols()); }
  int height() const { return static_cast<int>(values.rows()); }
  double at(int x, int y) const { return values(y, x); }
};

// Accumulator over (normal angle, signed offset). Angle bin k is k*pi/N;
// offset bin b is centered at (b - center_bin + 1/2) * offset_bin_size, so
// the offset axis is symmetric around zero (bin b mirrors bin
// 2 * center_bin - 1 - b) and pixel centers of an axis-aligned edge fall on
// a bin center.
struct GradientSample {
  Point2 p;         // cell center
  Point2 gradient;  // smoothed occupancy gradient
};

struct RadiographyAccumulator {
  Eigen::ArrayXXd bins;  // angle_bins x offset_bins
  double offset_bin_size = 1.0;
  int center_bin = 0;
  Eigen::AlignedBox2d extent;  // area the projected pixels came from
  std::vector<GradientSample> samples;  // the voters; empty for hand-built bins

  int angle_bins() const { return static_cast<int>(bins.rows()); }
  int offset_bins() const { return static_cast<int>(bins.cols()); }
  double angle(int k) const { return kPi * k / angle_bins(); }
  double offset(int b) const { return (b - center_bin + 0.5) * offset_bin_size; }
  int mirrored(int b) const { return 2 * center_bin - 1 - b; }
};

struct RadiographyParams {
  int angle_bins = 180;
  double offset_bin_size = 1.0;
  double peak_threshold_ratio = 0.25;
  int nms_radius = 3;
  int twin_radius = 5;  // bins; pairs the two faces of walls up to ~4 px thick
};

OccupancyGrid grid_from_image(const GrayImage& image, int occupied_threshold);

// Gray < threshold is occupied, gray > 255 - threshold is free, the band in
// between is unknown.
OccupancyGrid load_grid(const std::filesystem::path& path, int occupied_threshold);

// Frees every 8-connected occupied component with fewer than min_size
// cells; returns the number of cells freed.
std::size_t remove_small_components(OccupancyGrid& grid, std::size_t min_size);

// Unknown cells count as free. Throws when the grid has no occupied cell or
// no free cell (the normalization would be undefined).
DistanceMap distance_map(const OccupancyGrid& grid);

// Smoothed gradient of the binarized occupancy (occupied = 1), as two
// height x width rasters.
std::pair<RealRaster, RealRaster> occupancy_gradient(const OccupancyGrid& grid);

// Every pixel adds |gradient| * |cos(gradient angle - normal angle)| to the
// offset axis along each normal, split linearly between the two nearest
// bins: a Radon projection weighted by how perpendicular the gradient is to
// the projection direction. Angles are
// processed independently, so the result is identical for any thread count.
RadiographyAccumulator radiography(const OccupancyGrid& grid, int angle_bins,
                                   double offset_bin_size, unsigned threads = 1);

// Peaks above ratio * global maximum that are maximal within their
// (angle, offset) window, suppressed greedily from the strongest down.
// A peak is also dropped when a stronger line within nms_radius angle bins
// crosses it inside the accumulator extent: the side lobes a long line leaves
// at neighboring angles. Each accepted line claims the gradient samples that
// lie on it and point along its normal; a later peak whose votes minus those
// claimed ones fall under the floor is already explained and is dropped.
// Offsets are refined below bin size by a parabola
// through the peak and its offset neighbors. A line whose angle row holds a
// ridge maximum 2..twin_radius bins away and at least half as strong (the
// other face of a thin wall) takes the value-weighted mean of both offsets,
// and the twin is not reported separately; twin_radius 0 disables this.
// Output is ordered by decreasing accumulator value.
std::vector<Trait> detect_line_traits(const RadiographyAccumulator& acc,
                                      double peak_threshold_ratio, int nms_radius,
                                      int twin_radius = 0);

inline std::vector<Trait> detect_line_traits(const OccupancyGrid& grid,
                                             const RadiographyParams& params,
                                             unsigned threads = 1) {
  return detect_line_traits(
      radiography(grid, params.angle_bins, params.offset_bin_size, threads),
      params.peak_threshold_ratio, params.nms_radius, params.twin_radius);
}

}  // namespace mapalign
