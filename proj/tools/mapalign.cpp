// mapalign: align two 2D maps through their region arrangements.
//
//   mapalign align <map1> <map2> [--config PATH] [--mode ombb|exact] [--out PATH]
//                  [--dump-pool PATH] [--overlay PATH] [--thr-e F] [--thr-s F] [--<key> V]...
//   mapalign interpret <map> [--out PATH] [--render PATH] [--<key> V]...
//
// Exit codes: 0 ok, 1 invalid argument, 2 I/O, 3 no traits, 4 no faces,
// 5 empty hypothesis pool.

#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mapalign/config.hpp"
#include "mapalign/error.hpp"
#include "mapalign/image_io.hpp"
#include "mapalign/pipeline.hpp"
#include "mapalign/report.hpp"

namespace {

using namespace mapalign;

struct Overrides {
  std::string config_path;
  std::map<std::string, std::string> values;  // dotted key -> raw value
  std::optional<std::string> mode, out, pool, overlay, render, thr_e, thr_s;
};

void add_config_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "config file of `section.key = value` lines");
  for (const auto& key : config_keys()) {
    cmd->add_option_function<std::string>(
        "--" + key.name, [&o, name = key.name](const std::string& v) { o.values[name] = v; }, key.help);
  }
}

PipelineConfig resolve(const Overrides& o) {
  PipelineConfig config;
  if (!o.config_path.empty()) load_config_file(config, o.config_path);
  for (const auto& [k, v] : o.values) set_config_value(config, k, v);
  auto apply = [&](const std::optional<std::string>& v, const char* key) {
    if (v) set_config_value(config, key, *v);
  };
  apply(o.mode, "matching.mode");
  apply(o.thr_e, "prune.thr_e");
  apply(o.thr_s, "matching.thr_s");
  apply(o.out, "output.result");
  apply(o.pool, "output.pool");
  apply(o.overlay, "output.overlay");
  apply(o.render, "output.render");
  return config;
}

void print_summary(const AlignmentReport& r) {
  const auto& t = r.alignment;
  std::cerr << "map1: " << r.map1.traits << " traits, " << r.map1.faces_raw << " -> "
            << r.map1.faces_pruned << " faces\n"
            << "map2: " << r.map2.traits << " traits, " << r.map2.faces_raw << " -> "
            << r.map2.faces_pruned << " faces\n"
            << "hypotheses: " << r.initial_hypotheses << " initial, " << r.surviving_hypotheses
            << " after rejection\n"
            << "winner: score " << r.winner.score << "; alignment: score " << r.alignment_score << ", scale " << uniform_scale(t) << ", rotation "
            << rotation_angle(t) * 180.0 / kPi << " deg, translation (" << t.translation().x() << ", "
            << t.translation().y() << ")" << (r.winner.low_confidence ? " [low confidence]" : "") << "\n";
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
}

int run_align(const std::string& path1, const std::string& path2, const Overrides& o) {
  const PipelineConfig config = resolve(o);
  auto task = [&config](const std::string& p) { return interpret(load_map(p, config), config); };
  auto f1 = std::async(std::launch::async, task, path1);
  auto f2 = std::async(std::launch::async, task, path2);
  // Collect both before rethrowing, so the second task never outlives us.
  f1.wait();
  f2.wait();
  const MapInterpretation m1 = f1.get();
  const MapInterpretation m2 = f2.get();

  const AlignmentReport report = align(m1, m2, config);
  const std::string doc = result_document(report, m1, m2, config).dump(2) + "\n";
  if (config.result_path.empty()) {
    std::cout << doc;
  } else {
    write_text(config.result_path, doc);
  }
  if (!config.pool_path.empty()) write_text(config.pool_path, pool_dump(report));
  if (!config.overlay_path.empty()) {
    write_png(config.overlay_path, render_overlay(m1.grid, m2.grid, report.alignment));
  }
  print_summary(report);
  return 0;
}

int run_interpret(const std::string& path, const Overrides& o) {
  const PipelineConfig config = resolve(o);
  const MapInterpretation m = interpret(load_map(path, config), config);
  const std::string doc = arrangement_document(m).dump(2) + "\n";
  const std::string out = config.arrangement_path.empty() ? config.result_path : config.arrangement_path;
  if (out.empty()) {
    std::cout << doc;
  } else {
    write_text(out, doc);
  }
  if (!config.render_path.empty()) write_png(config.render_path, render_faces(m.pruned, m.grid));
  const auto s = map_stats(m);
  std::cerr << m.name << ": " << s.traits << " traits; raw " << s.vertices_raw << " vertices, "
            << s.edges_raw << " edges, " << s.faces_raw << " faces; pruned " << s.vertices_pruned
            << " vertices, " << s.edges_pruned << " edges, " << s.faces_pruned << " faces\n";
  for (const auto& w : m.pruned.warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Align two 2D maps through their region arrangements"};
  app.require_subcommand(1);

  Overrides align_opts;
  std::string map1, map2;
  auto* align_cmd = app.add_subcommand("align", "estimate the transform carrying map1 onto map2");
  align_cmd->add_option("map1", map1, "bitmap (PNG/PGM) or line list")->required();
  align_cmd->add_option("map2", map2, "bitmap (PNG/PGM) or line list")->required();
  align_cmd->add_option("--mode", align_opts.mode, "ombb or exact");
  align_cmd->add_option("--out", align_opts.out, "result document (default: stdout)");
  align_cmd->add_option("--dump-pool", align_opts.pool, "hypothesis pool, one JSON object per line");
  align_cmd->add_option("--overlay", align_opts.overlay, "PNG of map1 warped onto map2");
  align_cmd->add_option("--thr-e", align_opts.thr_e, "pruning threshold");
  align_cmd->add_option("--thr-s", align_opts.thr_s, "scale ratio threshold");
  add_config_flags(align_cmd, align_opts);

  Overrides interpret_opts;
  std::string map;
  auto* interpret_cmd = app.add_subcommand("interpret", "decompose one map into regions");
  interpret_cmd->add_option("map", map, "bitmap (PNG/PGM) or line list")->required();
  interpret_cmd->add_option("--out", interpret_opts.out, "arrangement document (default: stdout)");
  interpret_cmd->add_option("--render", interpret_opts.render, "PNG of the pruned faces");
  interpret_cmd->add_option("--thr-e", interpret_opts.thr_e, "pruning threshold");
  add_config_flags(interpret_cmd, interpret_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : static_cast<int>(ErrorCode::kInvalidArgument);
  }

  try {
    if (*align_cmd) return run_align(map1, map2, align_opts);
    return run_interpret(map, interpret_opts);
  } catch (const Error& e) {
    std::cerr << "mapalign: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "mapalign: " << e.what() << "\n";
    return static_cast<int>(ErrorCode::kIo);
  }
}
