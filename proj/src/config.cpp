#include "mapalign/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "mapalign/error.hpp"

namespace mapalign {
namespace {

constexpr double kDegree = kPi / 180.0;

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view why) {
  throw Error(ErrorCode::kInvalidArgument,
              "config " + std::string(key) + " = '" + std::string(value) + "': " + std::string(why));
}

double parse_real(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value, "not a number");
  return out;
}

long parse_int(std::string_view key, std::string_view value) {
  long out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value, "not an integer");
  return out;
}

std::string format_real(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

struct Entry {
  ConfigKey key;
  std::function<void(PipelineConfig&, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

template <typename Get>
Entry real_entry(std::string name, std::string help, Get field, bool (*ok)(double), std::string range,
                 double unit = 1.0) {
  return Entry{
      {name, help},
      [=](PipelineConfig& c, std::string_view v) {
        const double x = parse_real(name, v);
        if (!ok(x)) bad_value(name, v, "must be " + range);
        field(c) = x * unit;
      },
      [=](const PipelineConfig& c) { return format_real(field(const_cast<PipelineConfig&>(c)) / unit); }};
}

template <typename Get>
Entry int_entry(std::string name, std::string help, Get field, long lo, long hi) {
  return Entry{
      {name, help},
      [=](PipelineConfig& c, std::string_view v) {
        const long x = parse_int(name, v);
        if (x < lo || x > hi) bad_value(name, v, "out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        field(c) = static_cast<std::remove_reference_t<decltype(field(c))>>(x);
      },
      [=](const PipelineConfig& c) { return std::to_string(field(const_cast<PipelineConfig&>(c))); }};
}

template <typename Get>
Entry path_entry(std::string name, std::string help, Get field) {
  return Entry{{name, help},
               [=](PipelineConfig& c, std::string_view v) { field(c) = std::string(v); },
               [=](const PipelineConfig& c) { return field(const_cast<PipelineConfig&>(c)); }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    auto positive = +[](double x) { return x > 0.0; };
    auto non_negative = +[](double x) { return x >= 0.0; };
    auto unit_open = +[](double x) { return x > 0.0 && x < 1.0; };
    auto unit_half_open = +[](double x) { return x > 0.0 && x <= 1.0; };
    auto above_one = +[](double x) { return x > 1.0; };
    std::vector<Entry> t;
    t.push_back(int_entry("occupied_threshold", "gray level below which a pixel is occupied",
                          [](PipelineConfig& c) -> int& { return c.occupied_threshold; }, 0, 255));
    t.push_back(int_entry("preprocess.min_component_size", "occupied blobs smaller than this are cleared",
                          [](PipelineConfig& c) -> std::size_t& { return c.min_component_size; }, 0, 1000000));
    t.push_back(int_entry("radiography.angle_bins", "projection angles over [0, pi)",
                          [](PipelineConfig& c) -> int& { return c.radiography.angle_bins; }, 2, 100000));
    t.push_back(real_entry("radiography.offset_bin_size", "offset bin size in pixels",
                           [](PipelineConfig& c) -> double& { return c.radiography.offset_bin_size; },
                           positive, "> 0"));
    t.push_back(real_entry("radiography.peak_threshold_ratio", "peak floor relative to the global maximum",
                           [](PipelineConfig& c) -> double& { return c.radiography.peak_threshold_ratio; },
                           unit_half_open, "in (0, 1]"));
    t.push_back(int_entry("radiography.nms_radius", "non-maximum suppression radius in bins",
                          [](PipelineConfig& c) -> int& { return c.radiography.nms_radius; }, 0, 10000));
    t.push_back(int_entry("radiography.twin_radius", "bins within which the two faces of a wall are paired",
                          [](PipelineConfig& c) -> int& { return c.radiography.twin_radius; }, 0, 10000));
    t.push_back(real_entry("arrangement.vertex_merge_tolerance", "vertex merge distance in pixels",
                           [](PipelineConfig& c) -> double& { return c.arrangement.vertex_merge_tolerance; },
                           non_negative, ">= 0"));
    t.push_back(real_entry("prune.thr_e", "wall/gateway threshold on the mean distance value",
                           [](PipelineConfig& c) -> double& { return c.prune.thr_e; }, unit_open, "in (0, 1)"));
    t.push_back(real_entry("prune.band_radius", "edge neighborhood radius in pixels",
                           [](PipelineConfig& c) -> double& { return c.prune.band_radius; }, positive, "> 0"));
    t.push_back(real_entry("prune.min_face_area", "faces below this area are absorbed",
                           [](PipelineConfig& c) -> double& { return c.prune.min_face_area; },
                           non_negative, ">= 0"));
    t.push_back(real_entry("prune.min_face_width", "faces thinner than this are absorbed",
                           [](PipelineConfig& c) -> double& { return c.prune.min_face_width; },
                           non_negative, ">= 0"));
    t.push_back(Entry{{"matching.mode", "ombb or exact"},
                      [](PipelineConfig& c, std::string_view v) {
                        if (v == "ombb") {
                          c.mode = MatchingMode::kOmbb;
                        } else if (v == "exact") {
                          c.mode = MatchingMode::kExact;
                        } else {
                          bad_value("matching.mode", v, "must be ombb or exact");
                        }
                      },
                      [](const PipelineConfig& c) {
                        return std::string(c.mode == MatchingMode::kOmbb ? "ombb" : "exact");
                      }});
    t.push_back(real_entry("matching.tol_angle", "corner angle tolerance in degrees",
                           [](PipelineConfig& c) -> double& { return c.matching.angle; }, positive, "> 0",
                           kDegree));
    t.push_back(real_entry("matching.tol_ratio", "edge length ratio tolerance",
                           [](PipelineConfig& c) -> double& { return c.matching.ratio; }, positive, "> 0"));
    t.push_back(real_entry("matching.corner_tolerance", "angles this close to 180 degrees are not corners",
                           [](PipelineConfig& c) -> double& { return c.matching.corner; }, non_negative,
                           ">= 0", kDegree));
    t.push_back(real_entry("matching.thr_s", "accepted ratio between the two scales",
                           [](PipelineConfig& c) -> double& { return c.thr_s; }, above_one, "> 1"));
    t.push_back(Entry{{"matching.refine", "fit the output over all associated faces (true/false)"},
                      [](PipelineConfig& c, std::string_view v) {
                        if (v == "true" || v == "1") {
                          c.refine = true;
                        } else if (v == "false" || v == "0") {
                          c.refine = false;
                        } else {
                          bad_value("matching.refine", v, "must be true or false");
                        }
                      },
                      [](const PipelineConfig& c) { return std::string(c.refine ? "true" : "false"); }});
    t.push_back(real_entry("matching.refine_min_face_score", "face score a pair needs to enter the final fit",
                           [](PipelineConfig& c) -> double& { return c.refine_min_face_score; },
                           non_negative, ">= 0"));
    t.push_back(int_entry("matching.min_faces", "regions a map needs before matching",
                          [](PipelineConfig& c) -> std::size_t& { return c.min_faces; }, 1, 1000000));
    t.push_back(real_entry("input.line_list_margin", "frame margin around line lists in pixels",
                           [](PipelineConfig& c) -> double& { return c.line_list_margin; }, non_negative,
                           ">= 0"));
    t.push_back(int_entry("parallel.threads", "worker threads, 0 for all cores",
                          [](PipelineConfig& c) -> unsigned& { return c.threads; }, 0, 4096));
    t.push_back(path_entry("output.result", "result document path",
                           [](PipelineConfig& c) -> std::string& { return c.result_path; }));
    t.push_back(path_entry("output.pool", "hypothesis pool dump path",
                           [](PipelineConfig& c) -> std::string& { return c.pool_path; }));
    t.push_back(path_entry("output.overlay", "overlay PNG path",
                           [](PipelineConfig& c) -> std::string& { return c.overlay_path; }));
    t.push_back(path_entry("output.arrangement", "arrangement document path",
                           [](PipelineConfig& c) -> std::string& { return c.arrangement_path; }));
    t.push_back(path_entry("output.render", "face rendering PNG path",
                           [](PipelineConfig& c) -> std::string& { return c.render_path; }));
    return t;
  }();
  return table;
}

const Entry& find_entry(std::string_view key) {
  for (const auto& e : entries()) {
    if (e.key.name == key) return e;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown config key '" + std::string(key) + "'");
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& e : entries()) k.push_back(e.key);
    return k;
  }();
  return keys;
}

void set_config_value(PipelineConfig& config, std::string_view key, std::string_view value) {
  find_entry(key).set(config, trim(value));
}

std::string get_config_value(const PipelineConfig& config, std::string_view key) {
  return find_entry(key).get(config);
}

void apply_config_text(PipelineConfig& config, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidArgument, "config line " + std::to_string(number) + ": expected key = value");
    }
    set_config_value(config, trim(view.substr(0, eq)), trim(view.substr(eq + 1)));
  }
}

void load_config_file(PipelineConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, path.string() + ": cannot open config");
  std::stringstream text;
  text << in.rdbuf();
  apply_config_text(config, text.str());
}

std::vector<std::pair<std::string, std::string>> config_entries(const PipelineConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : entries()) out.emplace_back(e.key.name, e.get(config));
  return out;
}

}  // namespace mapalign
