#pragma once

// Serialization of pipeline results and diagnostic renderings.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "mapalign/image_io.hpp"
#include "mapalign/pipeline.hpp"

namespace mapalign {

// Row-major 3x3 homogeneous matrix.
nlohmann::json transform_json(const Transform2& t);
Transform2 transform_from_json(const nlohmann::json& j);

// Winner, counts, per-map statistics, the scores of the whole pool and the
// effective configuration. Wall-clock timings live under "timings" only,
// so two documents can be compared after erasing that key.
nlohmann::json result_document(const AlignmentReport& report, const MapInterpretation& m1,
                               const MapInterpretation& m2, const PipelineConfig& config);

// One JSON object per line and per generated hypothesis.
std::string pool_dump(const AlignmentReport& report);

// Vertices, edges, faces (as vertex index loops) and adjacency of the raw
// and pruned arrangements.
nlohmann::json arrangement_document(const MapInterpretation& m);

// Faces of `arr` in distinct colors over the grid; occupied cells are dark.
RgbImage render_faces(const Arrangement& arr, const OccupancyGrid& grid);

// Map 2 in gray with the occupied cells of map 1, carried by t (map 1 to
// map 2), blended in red.
RgbImage render_overlay(const OccupancyGrid& map1, const OccupancyGrid& map2, const Transform2& t,
                        double alpha = 0.6);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace mapalign
