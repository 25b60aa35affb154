#include "mapalign/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include "mapalign/config.hpp"
#include "mapalign/error.hpp"

namespace mapalign {
namespace {

using nlohmann::json;

json point_json(const Point2& p) { return json::array({p.x(), p.y()}); }

json stats_json(const std::string& name, const MapStats& s, bool from_line_list) {
  return {{"name", name},
          {"source", from_line_list ? "line_list" : "bitmap"},
          {"traits", s.traits},
          {"raw", {{"vertices", s.vertices_raw}, {"edges", s.edges_raw}, {"faces", s.faces_raw}}},
          {"pruned", {{"vertices", s.vertices_pruned}, {"edges", s.edges_pruned}, {"faces", s.faces_pruned}}}};
}

const char* kind_name(HypothesisKind k) { return k == HypothesisKind::kExact ? "exact" : "ombb"; }

std::vector<int> vertex_loop(const PrimeGraph& g, const std::vector<int>& half_edges) {
  std::vector<int> out;
  out.reserve(half_edges.size());
  for (int h : half_edges) out.push_back(g.half_edge_tail(h));
  return out;
}

json arrangement_json(const Arrangement& arr) {
  json vertices = json::array();
  for (const auto& v : arr.prime.vertices) vertices.push_back(point_json(v));
  json edges = json::array();
  for (const auto& e : arr.prime.edges) {
    edges.push_back({{"trait", e.host_trait}, {"v", {e.v_start, e.v_end}}});
  }
  json faces = json::array();
  for (const auto& f : arr.faces) {
    json holes = json::array();
    for (const auto& h : f.hole_boundaries) holes.push_back(vertex_loop(arr.prime, h));
    faces.push_back({{"boundary", vertex_loop(arr.prime, f.boundary)},
                     {"holes", holes},
                     {"area", f.area},
                     {"centroid", point_json(f.centroid)}});
  }
  json neighbors = json::array();
  for (const auto& [i, j] : arr.neighborhood) neighbors.push_back({i, j});
  return {{"vertices", vertices},
          {"edges", edges},
          {"faces", faces},
          {"neighborhood", neighbors},
          {"warnings", arr.warnings}};
}

std::array<std::uint8_t, 3> face_color(int index) {
  // Golden-ratio hue walk, fixed saturation and value.
  const double hue = std::fmod(0.13 + 0.618033988749895 * index, 1.0) * 6.0;
  const double s = 0.55, v = 0.95;
  const int sector = static_cast<int>(hue);
  const double f = hue - sector;
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  double r = v, g = t, b = p;
  switch (sector % 6) {
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    case 5: r = v; g = p; b = q; break;
    default: break;
  }
  auto byte = [](double x) { return static_cast<std::uint8_t>(std::lround(255.0 * x)); };
  return {byte(r), byte(g), byte(b)};
}

}  // namespace

json transform_json(const Transform2& t) {
  const Eigen::Matrix3d m = t.matrix();
  json out = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out.push_back(m(r, c));
  }
  return out;
}

Transform2 transform_from_json(const json& j) {
  if (!j.is_array() || j.size() != 9) throw Error(ErrorCode::kInvalidArgument, "transform needs 9 numbers");
  Transform2 t = Transform2::Identity();
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 3; ++c) t.matrix()(r, c) = j[3 * r + c].get<double>();
  }
  return t;
}

json result_document(const AlignmentReport& report, const MapInterpretation& m1,
                     const MapInterpretation& m2, const PipelineConfig& config) {
  const auto& w = report.winner;
  const auto& h = w.hypothesis;
  const auto scales = decompose_scales(h.transform);

  json association = json::array();
  for (const auto& c : w.contributions) {
    association.push_back({{"face1", c.face1},
                           {"face2", c.face2},
                           {"weight", c.min_weight},
                           {"face_score", c.face_score}});
  }
  json pool_scores = json::array();
  for (const auto& e : report.pool) {
    pool_scores.push_back(e.hypothesis.score ? json(*e.hypothesis.score) : json(nullptr));
  }
  json cfg = json::object();
  for (const auto& [k, v] : config_entries(config)) {
    if (k.rfind("output.", 0) != 0) cfg[k] = v;
  }
  json timings = json::object();
  for (const auto& [k, v] : m1.seconds) timings["map1." + k] = v;
  for (const auto& [k, v] : m2.seconds) timings["map2." + k] = v;
  for (const auto& [k, v] : report.seconds) timings[k] = v;

  return {{"map1", stats_json(m1.name, report.map1, m1.from_line_list)},
          {"map2", stats_json(m2.name, report.map2, m2.from_line_list)},
          {"mode", report.mode == MatchingMode::kOmbb ? "ombb" : "exact"},
          {"hypotheses", {{"initial", report.initial_hypotheses}, {"after_rejection", report.surviving_hypotheses}}},
          {"alignment",
           {{"transform", transform_json(report.alignment)},
            {"score", report.alignment_score},
            {"scale", uniform_scale(report.alignment)},
            {"rotation_deg", rotation_angle(report.alignment) * 180.0 / kPi},
            {"translation", point_json(report.alignment.translation())}}},
          {"winner",
           {{"transform", transform_json(h.transform)},
            {"score", w.score},
            {"s_x", scales.s_x},
            {"s_y", scales.s_y},
            {"source_face", h.source_face},
            {"target_face", h.target_face},
            {"shift", h.shift},
            {"kind", kind_name(h.kind)},
            {"association", association},
            {"low_confidence", w.low_confidence}}},
          {"pool_scores", pool_scores},
          {"warnings", report.warnings},
          {"config", cfg},
          {"timings", timings}};
}

std::string pool_dump(const AlignmentReport& report) {
  std::string out;
  for (const auto& e : report.pool) {
    const auto& h = e.hypothesis;
    json line = {{"source_face", h.source_face},
                 {"target_face", h.target_face},
                 {"shift", h.shift},
                 {"kind", kind_name(h.kind)},
                 {"transform", transform_json(h.transform)},
                 {"s_x", e.scales.s_x},
                 {"s_y", e.scales.s_y},
                 {"reflection", e.scales.reflection},
                 {"kept", e.kept},
                 {"score", h.score ? json(*h.score) : json(nullptr)}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

json arrangement_document(const MapInterpretation& m) {
  json traits = json::array();
  for (const auto& t : m.traits) traits.push_back({{"angle", t.angle}, {"offset", t.offset}});
  const auto& f = m.raw.frame;
  return {{"name", m.name},
          {"frame", {point_json(f.min()), point_json(f.max())}},
          {"traits", traits},
          {"raw", arrangement_json(m.raw)},
          {"pruned", arrangement_json(m.pruned)}};
}

RgbImage render_faces(const Arrangement& arr, const OccupancyGrid& grid) {
  RgbImage img(grid.width, grid.height);
  for (std::size_t i = 0; i < arr.faces.size(); ++i) {
    const auto color = face_color(static_cast<int>(i));
    Eigen::AlignedBox2d box;
    for (const auto& v : arr.faces[i].region.outer.vertices) box.extend(v);
    const int x0 = std::max(0, static_cast<int>(std::floor(box.min().x() - grid.origin.x())));
    const int x1 = std::min(grid.width - 1, static_cast<int>(std::ceil(box.max().x() - grid.origin.x())));
    const int y0 = std::max(0, static_cast<int>(std::floor(box.min().y() - grid.origin.y())));
    const int y1 = std::min(grid.height - 1, static_cast<int>(std::ceil(box.max().y() - grid.origin.y())));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (contains(arr.faces[i].region, grid.cell_center(x, y))) std::copy(color.begin(), color.end(), img.at(x, y));
      }
    }
  }
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      if (grid.occupied(x, y)) std::fill_n(img.at(x, y), 3, std::uint8_t{30});
    }
  }
  return img;
}

RgbImage render_overlay(const OccupancyGrid& map1, const OccupancyGrid& map2, const Transform2& t,
                        double alpha) {
  RgbImage img(map2.width, map2.height);
  const Transform2 inv = t.inverse();
  const std::array<double, 3> red{220, 30, 30};
  for (int y = 0; y < map2.height; ++y) {
    for (int x = 0; x < map2.width; ++x) {
      const std::uint8_t base = map2.occupied(x, y) ? 0 : (map2.at(x, y) == CellState::kUnknown ? 200 : 255);
      std::uint8_t* px = img.at(x, y);
      std::fill_n(px, 3, base);
      const Point2 q = inv * map2.cell_center(x, y) - map1.origin;
      const int sx = static_cast<int>(std::floor(q.x()));
      const int sy = static_cast<int>(std::floor(q.y()));
      if (sx < 0 || sy < 0 || sx >= map1.width || sy >= map1.height || !map1.occupied(sx, sy)) continue;
      for (int c = 0; c < 3; ++c) {
        px[c] = static_cast<std::uint8_t>(std::lround(alpha * red[c] + (1.0 - alpha) * base));
      }
    }
  }
  return img;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, path.string() + ": cannot write");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, path.string() + ": write failed");
}

}  // namespace mapalign
