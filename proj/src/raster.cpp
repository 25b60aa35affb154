#include "mapalign/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <tuple>

#include "mapalign/error.hpp"
#include "mapalign/parallel.hpp"

namespace mapalign {

OccupancyGrid::OccupancyGrid(int w, int h, CellState fill, Point2 grid_origin)
    : width(w), height(h), origin(std::move(grid_origin)) {
  if (w <= 0 || h <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "occupancy grid must have positive size");
  }
  cells.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
}

std::size_t OccupancyGrid::count(CellState s) const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), s));
}

OccupancyGrid grid_from_image(const GrayImage& image, int occupied_threshold) {
  if (occupied_threshold < 0 || occupied_threshold > 255) {
    throw Error(ErrorCode::kInvalidArgument, "occupied threshold must lie in [0, 255]");
  }
  OccupancyGrid grid(image.width, image.height, CellState::kUnknown);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const int gray = image.at(x, y);
      if (gray < occupied_threshold) {
        grid.set(x, y, CellState::kOccupied);
      } else if (gray > 255 - occupied_threshold) {
        grid.set(x, y, CellState::kFree);
      }
    }
  }
  return grid;
}

OccupancyGrid load_grid(const std::filesystem::path& path, int occupied_threshold) {
  return grid_from_image(read_gray_image(path), occupied_threshold);
}

std::size_t remove_small_components(OccupancyGrid& grid, std::size_t min_size) {
  if (min_size <= 1) return 0;
  std::vector<char> seen(grid.cells.size(), 0);
  std::vector<std::pair<int, int>> component, stack;
  std::size_t freed = 0;
  for (int y0 = 0; y0 < grid.height; ++y0) {
    for (int x0 = 0; x0 < grid.width; ++x0) {
      const std::size_t i0 = static_cast<std::size_t>(y0) * grid.width + x0;
      if (seen[i0] || !grid.occupied(x0, y0)) continue;
      component.clear();
      stack.assign(1, {x0, y0});
      seen[i0] = 1;
      while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        component.emplace_back(x, y);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= grid.width || ny >= grid.height) continue;
            const std::size_t j = static_cast<std::size_t>(ny) * grid.width + nx;
            if (seen[j] || !grid.occupied(nx, ny)) continue;
            seen[j] = 1;
            stack.emplace_back(nx, ny);
          }
        }
      }
      if (component.size() < min_size) {
        for (const auto& [x, y] : component) grid.set(x, y, CellState::kFree);
        freed += component.size();
      }
    }
  }
  return freed;
}

namespace {

// Squared 1D distance transform of a sampled function (lower envelope of
// parabolas), after Felzenszwalb and Huttenlocher.
void squared_edt_1d(const double* f, int n, std::ptrdiff_t stride, double* out,
                    std::vector<int>& v, std::vector<double>& z) {
  v.resize(n);
  z.resize(n + 1);
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      const int p = v[k];
      s = ((f[q * stride] + q * q) - (f[p * stride] + p * p)) / (2.0 * (q - p));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double d = q - v[k];
    out[q * stride] = d * d + f[v[k] * stride];
  }
}

}  // namespace

DistanceMap distance_map(const OccupancyGrid& grid) {
  const std::size_t occupied = grid.count(CellState::kOccupied);
  if (occupied == 0) {
    throw Error(ErrorCode::kInvalidArgument, "distance map of a grid without occupied cells");
  }
  if (occupied == grid.cells.size()) {
    throw Error(ErrorCode::kInvalidArgument, "distance map of a fully occupied grid");
  }
  // Finite stand-in for infinity keeps the parabola intersections well defined.
  const double far = 4.0 * (static_cast<double>(grid.width) * grid.width +
                            static_cast<double>(grid.height) * grid.height) + 1.0;
  RealRaster f(grid.height, grid.width);
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) f(y, x) = grid.occupied(x, y) ? 0.0 : far;
  }
  RealRaster tmp(grid.height, grid.width);
  std::vector<int> v;
  std::vector<double> z;
  for (int x = 0; x < grid.width; ++x) {
    squared_edt_1d(f.data() + x, grid.height, grid.width, tmp.data() + x, v, z);
  }
  for (int y = 0; y < grid.height; ++y) {
    squared_edt_1d(tmp.data() + static_cast<std::ptrdiff_t>(y) * grid.width, grid.width, 1,
                   f.data() + static_cast<std::ptrdiff_t>(y) * grid.width, v, z);
  }
  DistanceMap dm;
  dm.origin = grid.origin;
  dm.values = f.sqrt();
  dm.max_distance = dm.values.maxCoeff();
  dm.values /= dm.max_distance;
  return dm;
}

std::pair<RealRaster, RealRaster> occupancy_gradient(const OccupancyGrid& grid) {
  const int w = grid.width, h = grid.height;
  // Cells beyond the map are free, like unknown cells: a two-cell ring of
  // zeros feeds the blur and the central differences at the border.
  RealRaster binary = RealRaster::Zero(h + 4, w + 4);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) binary(y + 2, x + 2) = grid.occupied(x, y) ? 1.0 : 0.0;
  }
  RealRaster blurred = RealRaster::Zero(h + 2, w + 2);
  for (int y = 0; y < h + 2; ++y) {
    for (int x = 0; x < w + 2; ++x) blurred(y, x) = binary.block(y, x, 3, 3).sum() / 9.0;
  }
  RealRaster gx(h, w), gy(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      gx(y, x) = 0.5 * (blurred(y + 1, x + 2) - blurred(y + 1, x));
      gy(y, x) = 0.5 * (blurred(y + 2, x + 1) - blurred(y, x + 1));
    }
  }
  return {std::move(gx), std::move(gy)};
}

RadiographyAccumulator radiography(const OccupancyGrid& grid, int angle_bins,
                                   double offset_bin_size, unsigned threads) {
  if (angle_bins < 2) {
    throw Error(ErrorCode::kInvalidArgument, "radiography needs at least 2 angle bins");
  }
  if (!(offset_bin_size > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "offset bin size must be positive");
  }
  const auto [gx, gy] = occupancy_gradient(grid);

  std::vector<GradientSample> samples;
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      if (gx(y, x) != 0.0 || gy(y, x) != 0.0) {
        samples.push_back({grid.cell_center(x, y), Point2(gx(y, x), gy(y, x))});
      }
    }
  }

  const auto box = grid.bounds();
  double reach = 0.0;
  for (auto corner : {Eigen::AlignedBox2d::TopLeft, Eigen::AlignedBox2d::TopRight,
                      Eigen::AlignedBox2d::BottomLeft, Eigen::AlignedBox2d::BottomRight}) {
    reach = std::max(reach, box.corner(corner).norm());
  }
  RadiographyAccumulator acc;
  acc.offset_bin_size = offset_bin_size;
  acc.extent = box;
  acc.center_bin = static_cast<int>(std::ceil(reach / offset_bin_size)) + 1;
  acc.bins = Eigen::ArrayXXd::Zero(angle_bins, 2 * acc.center_bin);

  parallel_for(static_cast<std::size_t>(angle_bins), threads, [&](std::size_t k) {
    const double theta = acc.angle(static_cast<int>(k));
    const double c = std::cos(theta), s = std::sin(theta);
    auto row = acc.bins.row(static_cast<Eigen::Index>(k));
    for (const auto& smp : samples) {
      const double weight = std::abs(smp.gradient.x() * c + smp.gradient.y() * s);
      const double u = (smp.p.x() * c + smp.p.y() * s) / offset_bin_size + acc.center_bin - 0.5;
      const double lower = std::floor(u);
      const double frac = u - lower;
      const long b = static_cast<long>(lower);
      row(b) += weight * (1.0 - frac);
      row(b + 1) += weight * frac;
    }
  });
  acc.samples = std::move(samples);
  return acc;
}

namespace {

// Bin (k, b) seen from angle row k + dk, wrapping through theta = pi where
// the offset changes sign.
std::pair<int, int> wrapped_bin(const RadiographyAccumulator& acc, int k, int b) {
  const int n = acc.angle_bins();
  if (k < 0) return {k + n, acc.mirrored(b)};
  if (k >= n) return {k - n, acc.mirrored(b)};
  return {k, b};
}

bool within_window(const RadiographyAccumulator& acc, int k1, int b1, int k2, int b2,
                   int radius) {
  const int n = acc.angle_bins();
  for (int shift : {0, -n, n}) {
    const int dk = k2 + shift - k1;
    if (std::abs(dk) > radius) continue;
    const int other_b = shift == 0 ? b2 : acc.mirrored(b2);
    if (std::abs(other_b - b1) <= radius) return true;
  }
  return false;
}

}  // namespace

std::vector<Trait> detect_line_traits(const RadiographyAccumulator& acc,
                                      double peak_threshold_ratio, int nms_radius,
                                      int twin_radius) {
  if (acc.bins.size() == 0 || !(acc.bins.maxCoeff() > 0.0)) {
    throw Error(ErrorCode::kNoTraits, "radiography accumulator is empty");
  }
  if (!(peak_threshold_ratio > 0.0 && peak_threshold_ratio <= 1.0) || nms_radius < 0 || twin_radius < 0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid peak detection parameters");
  }
  const double floor_value = peak_threshold_ratio * acc.bins.maxCoeff();
  const int nb = acc.offset_bins();

  struct Peak {
    double value;
    int k, b;
  };
  std::vector<Peak> peaks;
  for (int k = 0; k < acc.angle_bins(); ++k) {
    for (int b = 0; b < nb; ++b) {
      const double v = acc.bins(k, b);
      if (v < floor_value) continue;
      bool is_max = true;
      for (int dk = -nms_radius; dk <= nms_radius && is_max; ++dk) {
        for (int db = -nms_radius; db <= nms_radius; ++db) {
          const auto [kk, bb] = wrapped_bin(acc, k + dk, b + db);
          if (bb < 0 || bb >= nb) continue;
          if (acc.bins(kk, bb) > v) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) peaks.push_back({v, k, b});
    }
  }
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    return std::tie(b.value, a.k, a.b) < std::tie(a.value, b.k, b.b);
  });

  // Sub-bin offset from a parabola through the peak and its two neighbors.
  auto refined_offset = [&](const Peak& p) {
    double delta = 0.0;
    if (p.b > 0 && p.b + 1 < nb) {
      const double left = acc.bins(p.k, p.b - 1), right = acc.bins(p.k, p.b + 1);
      const double curvature = left - 2.0 * p.value + right;
      if (curvature < 0.0) delta = std::clamp(0.5 * (left - right) / curvature, -0.5, 0.5);
    }
    return acc.offset(p.b) + delta * acc.offset_bin_size;
  };
  // The two faces of a thin wall give twin ridges of similar strength a wall
  // thickness apart in the same angle row; the line moves to their weighted
  // middle and the twin is not reported on its own.
  auto find_twin = [&](const Peak& p) -> std::optional<Peak> {
    std::optional<Peak> twin;
    for (int db = 2; db <= twin_radius; ++db) {
      for (int b : {p.b - db, p.b + db}) {
        if (b < 1 || b + 1 >= nb) continue;
        const double v = acc.bins(p.k, b);
        if (v < 0.5 * p.value || v < acc.bins(p.k, b - 1) || v < acc.bins(p.k, b + 1)) continue;
        if (!twin || v > twin->value) twin = Peak{v, p.k, b};
      }
    }
    return twin;
  };
  struct Candidate {
    Peak peak;
    std::optional<Peak> twin;
    Trait line;
  };
  auto candidate = [&](const Peak& p) {
    Candidate c{p, find_twin(p), {}};
    double offset = refined_offset(p);
    if (c.twin) {
      offset = (p.value * offset + c.twin->value * refined_offset(*c.twin)) / (p.value + c.twin->value);
    }
    c.line = Trait::line(acc.angle(p.k), offset);
    return c;
  };
  // A long line leaves weaker peaks at neighboring angles that cross it
  // inside the projected area.
  auto side_lobe = [&](const Candidate& strong, const Candidate& weak) {
    if (acc.extent.isEmpty()) return false;
    const int dk = std::abs(strong.peak.k - weak.peak.k);
    const int gap = std::min(dk, acc.angle_bins() - dk);
    if (gap > nms_radius) return false;
    const auto x = trait_intersection(strong.line, weak.line);
    return x && acc.extent.contains(*x);
  };
  // Votes of the gradient samples along accepted lines no longer count: a
  // peak whose remaining votes fall under the floor is explained by lines
  // already found (butterfly lobes, the same wall seen from the next angle).
  std::vector<char> explained(acc.samples.size(), 0);
  std::vector<std::size_t> explained_list;
  const double band = 0.5 * (twin_radius + 3) * acc.offset_bin_size;
  auto explained_votes = [&](const Peak& p) {
    const double c = std::cos(acc.angle(p.k)), s = std::sin(acc.angle(p.k));
    double sum = 0.0;
    for (std::size_t i : explained_list) {
      const auto& smp = acc.samples[i];
      const double u = (smp.p.x() * c + smp.p.y() * s) / acc.offset_bin_size + acc.center_bin - 0.5;
      const double t = std::abs(u - p.b);
      if (t < 1.0) sum += std::abs(smp.gradient.x() * c + smp.gradient.y() * s) * (1.0 - t);
    }
    return sum;
  };
  auto explain = [&](const Trait& line) {
    const Point2 n = line.normal();
    for (std::size_t i = 0; i < acc.samples.size(); ++i) {
      const auto& smp = acc.samples[i];
      if (explained[i] || std::abs(line.signed_distance(smp.p)) > band) continue;
      if (std::abs(smp.gradient.dot(n)) < 0.8 * smp.gradient.norm()) continue;
      explained[i] = 1;
      explained_list.push_back(i);
    }
  };
  std::vector<Candidate> kept;
  for (const auto& p : peaks) {
    const Candidate c = candidate(p);
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Candidate& q) {
      return within_window(acc, q.peak.k, q.peak.b, p.k, p.b, nms_radius) || side_lobe(q, c) ||
             (q.twin && within_window(acc, q.twin->k, q.twin->b, p.k, p.b, 1));
    });
    if (suppressed) continue;
    if (!explained_list.empty() && p.value - explained_votes(p) < floor_value) continue;
    kept.push_back(c);
    explain(c.line);
  }
  std::vector<Trait> traits;
  traits.reserve(kept.size());
  for (const auto& q : kept) traits.push_back(q.line);
  return traits;
}

}  // namespace mapalign
