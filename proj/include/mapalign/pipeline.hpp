#pragma once

// End-to-end map interpretation and alignment.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mapalign/alignment.hpp"
#include "mapalign/arrangement.hpp"
#include "mapalign/raster.hpp"
#include "mapalign/scoring.hpp"

namespace mapalign {

enum class MatchingMode { kOmbb, kExact };

struct PipelineConfig {
  int occupied_threshold = 100;
  // Occupied blobs smaller than this many cells are cleared before
  // interpretation; 0 keeps the grid as loaded.
  std::size_t min_component_size = 10;
  RadiographyParams radiography;
  ArrangementParams arrangement;
  PruneParams prune;
  MatchingMode mode = MatchingMode::kOmbb;
  MatchTolerances matching;
  double thr_s = 1.2;
  // Fit the output similarity over every associated face pair instead of
  // the winning pair alone.
  bool refine = true;
  // Pairs scoring below this under the winner (a room split in one map
  // only) are left out of that fit.
  double refine_min_face_score = 0.9;
  // Maps with fewer faces than this after pruning yield no hypotheses.
  std::size_t min_faces = 2;
  double line_list_margin = 10.0;  // pixels around the segments of a line list
  unsigned threads = 0;            // 0 = hardware concurrency

  std::string result_path;
  std::string pool_path;
  std::string overlay_path;
  std::string arrangement_path;
  std::string render_path;
};

// A map as loaded from disk: a bitmap, or a line list whose segments are
// rasterized so the pruning step has a distance map to work with.
struct MapInput {
  std::string name;
  OccupancyGrid grid;
  std::optional<std::vector<Trait>> traits;  // set for line lists
};

// Line list: one `x1 y1 x2 y2` segment per line, in pixels; blank lines and
// '#' comments are ignored.
std::vector<std::pair<Point2, Point2>> parse_line_list(const std::string& text);
MapInput map_from_segments(const std::vector<std::pair<Point2, Point2>>& segments, double margin,
                           std::string name = "lines");

// Sniffs the file: PNG and binary PGM are bitmaps, anything else is parsed
// as a line list.
MapInput load_map(const std::filesystem::path& path, const PipelineConfig& config);

struct MapInterpretation {
  std::string name;
  OccupancyGrid grid;
  DistanceMap dmap;
  std::vector<Trait> traits;
  Arrangement raw;
  Arrangement pruned;
  bool from_line_list = false;
  std::map<std::string, double> seconds;
};

// Trait detection (or the given traits), arrangement, pruning. Throws
// kNoTraits when nothing is detected.
MapInterpretation interpret(const MapInput& input, const PipelineConfig& config);

struct MapStats {
  std::size_t traits = 0;
  std::size_t vertices_raw = 0, edges_raw = 0, faces_raw = 0;
  std::size_t vertices_pruned = 0, edges_pruned = 0, faces_pruned = 0;
};

MapStats map_stats(const MapInterpretation& m);

struct PoolEntry {
  Hypothesis hypothesis;
  ScaleDecomposition scales;
  bool kept = false;
};

struct AlignmentReport {
  MapStats map1, map2;
  MatchingMode mode = MatchingMode::kOmbb;
  std::vector<PoolEntry> pool;  // every generated hypothesis, in generation order
  std::size_t initial_hypotheses = 0;
  std::size_t surviving_hypotheses = 0;
  ScoredAlignment winner;  // as scored; an affine transform in OMBB mode
  Transform2 alignment = Transform2::Identity();  // similarity fitted to the winner
  double alignment_score = 0.0;
  std::vector<std::string> warnings;
  std::map<std::string, double> seconds;
};

// Generates, filters, scores and selects, then fits the output similarity
// to the winner. Throws kEmptyPool when no hypothesis survives.
AlignmentReport align(const MapInterpretation& m1, const MapInterpretation& m2,
                      const PipelineConfig& config);

}  // namespace mapalign
