#include "mapalign/pipeline.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>

#include "mapalign/error.hpp"

namespace mapalign {
namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

bool is_bitmap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, path.string() + ": cannot open");
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() >= 4 && static_cast<unsigned char>(magic[0]) == 0x89 && magic[1] == 'P' &&
      magic[2] == 'N' && magic[3] == 'G') {
    return true;
  }
  return in.gcount() >= 2 && magic[0] == 'P' && magic[1] == '5';
}

}  // namespace

std::vector<std::pair<Point2, Point2>> parse_line_list(const std::string& text) {
  std::vector<std::pair<Point2, Point2>> segments;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<double> v;
    double x;
    while (fields >> x) v.push_back(x);
    if (!fields.eof()) {
      throw Error(ErrorCode::kIo, "line list, line " + std::to_string(number) + ": not a number");
    }
    if (v.empty()) continue;
    if (v.size() != 4) {
      throw Error(ErrorCode::kIo, "line list, line " + std::to_string(number) +
                                      ": expected `x1 y1 x2 y2`");
    }
    const Point2 a(v[0], v[1]), b(v[2], v[3]);
    if (!a.allFinite() || !b.allFinite() || a == b) {
      throw Error(ErrorCode::kIo, "line list, line " + std::to_string(number) + ": degenerate segment");
    }
    segments.emplace_back(a, b);
  }
  return segments;
}

MapInput map_from_segments(const std::vector<std::pair<Point2, Point2>>& segments, double margin,
                           std::string name) {
  if (segments.empty()) throw Error(ErrorCode::kNoTraits, name + ": line list has no segments");
  Eigen::AlignedBox2d box;
  for (const auto& [a, b] : segments) box.extend(a).extend(b);
  const Point2 lo = box.min().array().floor() - margin;
  const Point2 hi = box.max().array().ceil() + margin;
  MapInput input;
  input.name = std::move(name);
  input.grid = OccupancyGrid(static_cast<int>(hi.x() - lo.x()), static_cast<int>(hi.y() - lo.y()),
                             CellState::kFree, lo);
  std::vector<Trait> traits;
  for (const auto& [a, b] : segments) {
    traits.push_back(Trait::through(a, b));
    const Point2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const int x0 = static_cast<int>(std::floor(std::min(a.x(), b.x()) - lo.x())) - 1;
    const int x1 = static_cast<int>(std::ceil(std::max(a.x(), b.x()) - lo.x())) + 1;
    const int y0 = static_cast<int>(std::floor(std::min(a.y(), b.y()) - lo.y())) - 1;
    const int y1 = static_cast<int>(std::ceil(std::max(a.y(), b.y()) - lo.y())) + 1;
    for (int y = std::max(0, y0); y <= std::min(input.grid.height - 1, y1); ++y) {
      for (int x = std::max(0, x0); x <= std::min(input.grid.width - 1, x1); ++x) {
        const Point2 c = input.grid.cell_center(x, y);
        const double t = std::clamp(ab.dot(c - a) / len2, 0.0, 1.0);
        if ((a + t * ab - c).norm() <= std::sqrt(0.5)) input.grid.set(x, y, CellState::kOccupied);
      }
    }
  }
  input.traits = std::move(traits);
  return input;
}

MapInput load_map(const std::filesystem::path& path, const PipelineConfig& config) {
  if (is_bitmap(path)) {
    MapInput input;
    input.name = path.filename().string();
    input.grid = load_grid(path, config.occupied_threshold);
    return input;
  }
  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  return map_from_segments(parse_line_list(text.str()), config.line_list_margin,
                           path.filename().string());
}

MapInterpretation interpret(const MapInput& input, const PipelineConfig& config) {
  Stopwatch clock;
  MapInterpretation m;
  m.name = input.name;
  m.grid = input.grid;
  m.from_line_list = input.traits.has_value();
  if (!m.from_line_list) remove_small_components(m.grid, config.min_component_size);
  if (input.traits) {
    m.traits = *input.traits;
  } else {
    m.traits = detect_line_traits(m.grid, config.radiography, config.threads);
  }
  if (m.traits.empty()) throw Error(ErrorCode::kNoTraits, m.name + ": no traits detected");
  m.seconds["traits"] = clock.lap();

  m.dmap = distance_map(m.grid);
  m.raw = build_arrangement(m.traits, m.grid.bounds(), config.arrangement);
  m.seconds["arrangement"] = clock.lap();
  m.pruned = prune(m.raw, m.dmap, config.prune);
  m.seconds["prune"] = clock.lap();
  return m;
}

MapStats map_stats(const MapInterpretation& m) {
  MapStats s;
  s.traits = m.traits.size();
  s.vertices_raw = m.raw.prime.vertices.size();
  s.edges_raw = m.raw.prime.edges.size();
  s.faces_raw = m.raw.faces.size();
  s.vertices_pruned = m.pruned.prime.vertices.size();
  s.edges_pruned = m.pruned.prime.edges.size();
  s.faces_pruned = m.pruned.faces.size();
  return s;
}

AlignmentReport align(const MapInterpretation& m1, const MapInterpretation& m2,
                      const PipelineConfig& config) {
  Stopwatch clock;
  AlignmentReport report;
  report.map1 = map_stats(m1);
  report.map2 = map_stats(m2);
  report.mode = config.mode;
  report.warnings = m1.pruned.warnings;
  report.warnings.insert(report.warnings.end(), m2.pruned.warnings.begin(), m2.pruned.warnings.end());

  const Arrangement& a1 = m1.pruned;
  const Arrangement& a2 = m2.pruned;
  std::vector<Hypothesis> generated;
  if (a1.faces.size() >= config.min_faces && a2.faces.size() >= config.min_faces) {
    generated = config.mode == MatchingMode::kOmbb
                    ? generate_hypotheses_ombb(a1, a2, config.threads, &report.warnings)
                    : generate_hypotheses_exact(a1, a2, config.matching, config.threads);
  } else {
    report.warnings.push_back("fewer than " + std::to_string(config.min_faces) +
                              " regions in a map; nothing to match");
  }
  report.seconds["hypotheses"] = clock.lap();

  std::vector<Hypothesis> survivors;
  for (const auto& h : generated) {
    PoolEntry e;
    e.hypothesis = h;
    e.scales = decompose_scales(h.transform);
    e.kept = is_acceptable_similarity(h.transform, config.thr_s);
    if (e.kept) survivors.push_back(h);
    report.pool.push_back(e);
  }
  report.initial_hypotheses = generated.size();
  report.surviving_hypotheses = survivors.size();
  report.seconds["rejection"] = clock.lap();
  if (survivors.empty()) {
    throw Error(ErrorCode::kEmptyPool, "empty hypothesis pool (" + std::to_string(generated.size()) +
                                           " generated, none acceptable)");
  }

  const auto scored = score_hypotheses(a1, a2, survivors, config.threads);
  const std::size_t best = best_index(scored);
  report.winner = scored[best];
  report.winner.low_confidence =
      std::all_of(scored.begin(), scored.end(), [](const ScoredAlignment& s) { return s.score == 0.0; });
  std::size_t k = 0;
  for (auto& e : report.pool) {
    if (e.kept) e.hypothesis.score = scored[k++].score;
  }
  report.seconds["scoring"] = clock.lap();

  const auto& h = report.winner.hypothesis;
  const std::vector<std::pair<int, int>> own{{h.source_face, h.target_face}};
  std::vector<std::pair<int, int>> pairs;
  if (config.refine) {
    for (const auto& c : report.winner.contributions) {
      if (c.face_score >= config.refine_min_face_score) pairs.emplace_back(c.face1, c.face2);
    }
  }
  if (pairs.empty()) pairs = own;
  try {
    report.alignment = fit_similarity(a1, a2, h.transform, pairs);
  } catch (const Error&) {
    report.alignment = fit_similarity(a1, a2, h.transform, own);
  }
  report.alignment_score = arrangement_match_score(a1, a2, report.alignment).score;
  report.seconds["fit"] = clock.lap();
  return report;
}

}  // namespace mapalign
