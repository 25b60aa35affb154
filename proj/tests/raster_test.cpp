#include "mapalign/raster.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <vector>

#include <unistd.h>

#include "gtest/gtest.h"
#include "mapalign/image_io.hpp"
#include "support/floorplan.hpp"

namespace mapalign {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("mapalign_raster_" + std::to_string(::getpid()))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

GrayImage gray(int w, int h, std::vector<std::uint8_t> pixels) { return GrayImage{w, h, std::move(pixels)}; }

OccupancyGrid stripe_grid(int w, int h, int x0, int x1) {
  OccupancyGrid g(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = x0; x < x1; ++x) g.set(x, y, CellState::kOccupied);
  }
  return g;
}

TEST(LoadGridTest, ThresholdBands) {
  TempDir dir;
  write_pgm(dir / "a.pgm", gray(2, 2, {0, 255, 255, 0}));
  const OccupancyGrid g = load_grid(dir / "a.pgm", 127);
  ASSERT_EQ(g.width, 2);
  ASSERT_EQ(g.height, 2);
  EXPECT_EQ(g.at(0, 0), CellState::kOccupied);
  EXPECT_EQ(g.at(1, 0), CellState::kFree);
  EXPECT_EQ(g.at(0, 1), CellState::kFree);
  EXPECT_EQ(g.at(1, 1), CellState::kOccupied);
}

TEST(LoadGridTest, MidGrayIsUnknown) {
  TempDir dir;
  write_pgm(dir / "b.pgm", gray(1, 1, {127}));
  EXPECT_EQ(load_grid(dir / "b.pgm", 127).at(0, 0), CellState::kUnknown);
}

TEST(LoadGridTest, WhitePngIsFree) {
  TempDir dir;
  write_png(dir / "c.png", gray(100, 100, std::vector<std::uint8_t>(100 * 100, 255)));
  const OccupancyGrid g = load_grid(dir / "c.png", 100);
  EXPECT_EQ(g.count(CellState::kFree), 100u * 100u);
}

TEST(LoadGridTest, Errors) {
  TempDir dir;
  EXPECT_THROW(load_grid(dir / "missing.pgm", 100), Error);
  {
    std::ofstream out(dir / "junk.pgm", std::ios::binary);
    out << "not an image";
  }
  EXPECT_THROW(load_grid(dir / "junk.pgm", 100), Error);
}

TEST(RemoveSmallComponentsTest, FreesOnlySmallBlobs) {
  OccupancyGrid g(20, 20);
  for (int x = 2; x < 18; ++x) g.set(x, 10, CellState::kOccupied);  // 16 cells
  g.set(3, 3, CellState::kOccupied);
  g.set(4, 4, CellState::kOccupied);  // diagonal neighbor: one component of 2
  g.set(15, 2, CellState::kOccupied);
  EXPECT_EQ(remove_small_components(g, 5), 3u);
  EXPECT_EQ(g.count(CellState::kOccupied), 16u);
  EXPECT_EQ(remove_small_components(g, 0), 0u);
}

TEST(DistanceMapTest, LinearRow) {
  OccupancyGrid g(3, 1);
  g.set(0, 0, CellState::kOccupied);
  const DistanceMap d = distance_map(g);
  EXPECT_DOUBLE_EQ(d.at(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(d.at(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(d.at(2, 0), 1.0);
  EXPECT_DOUBLE_EQ(d.max_distance, 2.0);
}

TEST(DistanceMapTest, DegenerateGrids) {
  EXPECT_THROW(distance_map(OccupancyGrid(4, 4, CellState::kOccupied)), Error);
  EXPECT_THROW(distance_map(OccupancyGrid(4, 4, CellState::kFree)), Error);
}

// All-pairs Euclidean distance to the nearest occupied cell.
std::vector<double> brute_force_distances(const OccupancyGrid& g) {
  std::vector<double> out(g.cells.size(), 1e300);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      for (int v = 0; v < g.height; ++v) {
        for (int u = 0; u < g.width; ++u) {
          if (g.occupied(u, v)) {
            out[y * g.width + x] = std::min(out[y * g.width + x], std::hypot(x - u, y - v));
          }
        }
      }
    }
  }
  return out;
}

TEST(DistanceMapTest, SingleCenterCell) {
  OccupancyGrid g(5, 5);
  g.set(2, 2, CellState::kOccupied);
  const DistanceMap d = distance_map(g);
  EXPECT_DOUBLE_EQ(d.at(2, 2), 0.0);
  EXPECT_DOUBLE_EQ(d.at(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(d.at(4, 4), 1.0);
  const auto oracle = brute_force_distances(g);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 5; ++x) EXPECT_NEAR(d.at(x, y), oracle[y * 5 + x] / std::sqrt(8.0), 1e-12);
  }
}

TEST(DistanceMapTest, MatchesBruteForceWithUnknownAsFree) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> state(0, 19);
  OccupancyGrid g(23, 17);
  for (auto& c : g.cells) {
    const int s = state(rng);
    c = s == 0 ? CellState::kOccupied : (s < 4 ? CellState::kUnknown : CellState::kFree);
  }
  g.set(0, 0, CellState::kOccupied);
  const DistanceMap d = distance_map(g);
  const auto oracle = brute_force_distances(g);
  const double max = *std::max_element(oracle.begin(), oracle.end());
  EXPECT_DOUBLE_EQ(d.max_distance, max);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      EXPECT_NEAR(d.at(x, y), oracle[y * g.width + x] / max, 1e-12);
      if (g.occupied(x, y)) EXPECT_EQ(d.at(x, y), 0.0);
    }
  }
  EXPECT_DOUBLE_EQ(d.values.maxCoeff(), 1.0);
  EXPECT_DOUBLE_EQ(d.values.minCoeff(), 0.0);
}

// Direct evaluation: smoothed occupancy S(x, y) is the mean of the 3x3 block
// of indicator values, cells outside the map counting as free; the gradient
// is the central difference of S; every cell votes |g . n| at offset
// p . n, split linearly between the two nearest bin centers.
RadiographyAccumulator brute_force_radiography(const OccupancyGrid& g, int angle_bins, double bin) {
  auto occ = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < g.width && y < g.height && g.occupied(x, y) ? 1.0 : 0.0;
  };
  auto smooth = [&](int x, int y) {
    double s = 0.0;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) s += occ(x + dx, y + dy);
    }
    return s / 9.0;
  };
  RadiographyAccumulator ref = radiography(OccupancyGrid(g.width, g.height), angle_bins, bin);
  ref.bins.setZero();
  for (int k = 0; k < angle_bins; ++k) {
    const double theta = kPi * k / angle_bins;
    for (int y = 0; y < g.height; ++y) {
      for (int x = 0; x < g.width; ++x) {
        const double gx = (smooth(x + 1, y) - smooth(x - 1, y)) / 2.0;
        const double gy = (smooth(x, y + 1) - smooth(x, y - 1)) / 2.0;
        const double w = std::abs(gx * std::cos(theta) + gy * std::sin(theta));
        if (w == 0.0) continue;
        const Point2 p = g.cell_center(x, y);
        const double rho = p.x() * std::cos(theta) + p.y() * std::sin(theta);
        for (int b = 0; b < ref.offset_bins(); ++b) {
          const double t = std::abs(rho - ref.offset(b)) / bin;
          if (t < 1.0) ref.bins(k, b) += w * (1.0 - t);
        }
      }
    }
  }
  return ref;
}

TEST(RadiographyTest, BlankGridIsZero) {
  const auto acc = radiography(OccupancyGrid(30, 20), 36, 1.0);
  EXPECT_EQ(acc.bins.maxCoeff(), 0.0);
  EXPECT_EQ(acc.bins.minCoeff(), 0.0);
  EXPECT_THROW(detect_line_traits(acc, 0.3, 3), Error);
}

TEST(RadiographyTest, VerticalStripeMatchesBruteForce) {
  const OccupancyGrid g = stripe_grid(40, 30, 19, 21);
  const auto acc = radiography(g, 60, 1.0);
  const auto ref = brute_force_radiography(g, 60, 1.0);
  ASSERT_EQ(acc.bins.rows(), ref.bins.rows());
  ASSERT_EQ(acc.bins.cols(), ref.bins.cols());
  EXPECT_LE((acc.bins - ref.bins).abs().maxCoeff(), 1e-9);
  EXPECT_GE(acc.bins.minCoeff(), 0.0);

  Eigen::Index k, b;
  acc.bins.maxCoeff(&k, &b);
  EXPECT_EQ(k, 0);
  // The stripe's two faces sit at x = 19 and x = 21; its axis is x = 20.
  EXPECT_NEAR(std::abs(acc.offset(static_cast<int>(b)) - 20.0), 1.0, 1.0);
}

TEST(RadiographyTest, CrossMatchesBruteForce) {
  OccupancyGrid g = stripe_grid(36, 36, 10, 12);
  for (int x = 0; x < 36; ++x) {
    g.set(x, 24, CellState::kOccupied);
    g.set(x, 25, CellState::kOccupied);
  }
  const auto acc = radiography(g, 72, 1.0);
  const auto ref = brute_force_radiography(g, 72, 1.0);
  EXPECT_LE((acc.bins - ref.bins).abs().maxCoeff(), 1e-9);

  // Two dominant angle columns, pi/2 apart.
  Eigen::VectorXd column_max = acc.bins.rowwise().maxCoeff();
  Eigen::Index first, second;
  column_max.maxCoeff(&first);
  column_max(first) = 0.0;
  column_max.maxCoeff(&second);
  EXPECT_EQ(std::abs(first - second), 36);
}

TEST(RadiographyTest, ThreadCountDoesNotChangeBins) {
  std::mt19937 rng(1);
  OccupancyGrid g(50, 40);
  for (auto& c : g.cells) c = rng() % 7 == 0 ? CellState::kOccupied : CellState::kFree;
  const auto a = radiography(g, 90, 1.0, 1);
  const auto b = radiography(g, 90, 1.0, 4);
  EXPECT_TRUE((a.bins == b.bins).all());
}

RadiographyAccumulator empty_accumulator(int angle_bins, int center_bin) {
  RadiographyAccumulator acc;
  acc.center_bin = center_bin;
  acc.bins = Eigen::ArrayXXd::Zero(angle_bins, 2 * center_bin);
  acc.extent = Eigen::AlignedBox2d(Point2(0, 0), Point2(50, 50));
  return acc;
}

TEST(DetectLineTraitsTest, IsolatedPeak) {
  auto acc = empty_accumulator(36, 50);
  acc.bins(9, 70) = 5.0;
  const auto traits = detect_line_traits(acc, 0.3, 3);
  ASSERT_EQ(traits.size(), 1u);
  EXPECT_NEAR(traits[0].angle, acc.angle(9), 1e-12);
  EXPECT_NEAR(traits[0].offset, acc.offset(70), 1e-12);
}

TEST(DetectLineTraitsTest, PeaksInOneWindowGiveTheLarger) {
  auto acc = empty_accumulator(36, 50);
  acc.bins(9, 70) = 5.0;
  acc.bins(10, 72) = 4.0;
  auto traits = detect_line_traits(acc, 0.3, 3);
  ASSERT_EQ(traits.size(), 1u);
  EXPECT_NEAR(traits[0].angle, acc.angle(9), 1e-12);
  EXPECT_NEAR(traits[0].offset, acc.offset(70), 1e-12);

  acc.bins(20, 30) = 3.0;  // far away: kept
  traits = detect_line_traits(acc, 0.3, 3);
  ASSERT_EQ(traits.size(), 2u);
  EXPECT_NEAR(traits[1].angle, acc.angle(20), 1e-12);
}

TEST(DetectLineTraitsTest, BelowThresholdIsDropped) {
  auto acc = empty_accumulator(36, 50);
  acc.bins(9, 70) = 5.0;
  acc.bins(25, 20) = 1.0;
  EXPECT_EQ(detect_line_traits(acc, 0.3, 3).size(), 1u);
  EXPECT_EQ(detect_line_traits(acc, 0.2, 3).size(), 2u);
}

TEST(DetectLineTraitsTest, WindowWrapsAroundPi) {
  // Angle row 35 at offset bin b continues as row 0 at the mirrored bin.
  auto acc = empty_accumulator(36, 50);
  acc.bins(0, 60) = 5.0;
  acc.bins(35, acc.mirrored(60)) = 4.0;
  EXPECT_EQ(detect_line_traits(acc, 0.3, 3).size(), 1u);
}

TEST(DetectLineTraitsTest, InvalidParameters) {
  auto acc = empty_accumulator(36, 50);
  acc.bins(1, 1) = 1.0;
  EXPECT_THROW(detect_line_traits(acc, 0.0, 3), Error);
  EXPECT_THROW(detect_line_traits(acc, 1.5, 3), Error);
  EXPECT_THROW(detect_line_traits(acc, 0.5, -1), Error);
}

// Three rooms in a row: outer walls and two partitions give six wall lines.
TEST(DetectLineTraitsTest, ThreeRoomPlanRecoversWallLines) {
  testing::PlanOptions o;
  o.width = 300;
  o.height = 200;
  const auto plan = testing::grid_floor_plan(1, 3, o);
  const Transform2 place = testing::similarity(0.0, 1.0, Point2(10, 10));
  const OccupancyGrid g = testing::rasterize(plan, 320, 220, place);
  const auto traits = detect_line_traits(g, RadiographyParams{});

  // Wall axes in pixel coordinates.
  const std::vector<Trait> truth{Trait::line(0, 11), Trait::line(0, 109), Trait::line(0, 209),
                                 Trait::line(0, 309), Trait::line(kPi / 2, 11), Trait::line(kPi / 2, 209)};
  EXPECT_NEAR(static_cast<double>(traits.size()), static_cast<double>(truth.size()), 1.0);
  for (const auto& t : truth) {
    const bool found = std::any_of(traits.begin(), traits.end(), [&](const Trait& d) {
      return std::abs(d.angle - t.angle) < 1e-9 && std::abs(d.offset - t.offset) < 2.0;
    });
    EXPECT_TRUE(found) << "wall at angle " << t.angle << " offset " << t.offset;
  }
}

OccupancyGrid rotate_quarter(const OccupancyGrid& g) {
  // (x, y) -> (H - 1 - y, x): a quarter turn in image coordinates.
  OccupancyGrid out(g.height, g.width);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) out.set(g.height - 1 - y, x, g.at(x, y));
  }
  return out;
}

double angle_gap(double a, double b) {
  const double d = std::fmod(std::abs(a - b), kPi);
  return std::min(d, kPi - d);
}

TEST(DetectLineTraitsTest, QuarterTurnShiftsAnglesByHalfPi) {
  std::mt19937 rng(13);
  testing::PlanOptions o;
  o.width = 240;
  o.height = 180;
  for (int trial = 0; trial < 3; ++trial) {
    const auto plan = testing::random_floor_plan(rng, o);
    const Transform2 place = testing::similarity(0.2, 1.0, Point2(60, 10));
    const OccupancyGrid g = testing::rasterize(plan, 320, 300, place);
    const auto before = detect_line_traits(g, RadiographyParams{});
    const auto after = detect_line_traits(rotate_quarter(g), RadiographyParams{});
    ASSERT_EQ(before.size(), after.size()) << trial;
    const double bin = kPi / RadiographyParams{}.angle_bins;
    for (const auto& t : before) {
      double best = kPi;
      for (const auto& u : after) best = std::min(best, angle_gap(t.angle + kPi / 2, u.angle));
      EXPECT_LE(best, bin + 1e-9) << trial;
    }
  }
}

TEST(DetectLineTraitsTest, CountNonIncreasingInThreshold) {
  std::mt19937 rng(21);
  testing::PlanOptions o;
  const auto plan = testing::random_floor_plan(rng, o);
  OccupancyGrid g = testing::rasterize(plan, 420, 320, testing::similarity(0.1, 1.0, Point2(20, 0)));
  std::mt19937 noise(2);
  testing::add_flip_noise(g, 0.01, noise);
  const auto acc = radiography(g, 180, 1.0);
  std::size_t previous = std::numeric_limits<std::size_t>::max();
  for (double ratio = 0.05; ratio <= 1.0; ratio += 0.05) {
    const std::size_t n = detect_line_traits(acc, ratio, 3, 5).size();
    EXPECT_LE(n, previous) << "ratio " << ratio;
    previous = n;
  }
  EXPECT_GE(previous, 1u);
}

}  // namespace
}  // namespace mapalign
