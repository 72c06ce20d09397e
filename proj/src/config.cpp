#include <cstdio>
#include <fstream>
#include <sstream>

#include "quiltframe/experiments.hpp"

namespace quiltframe::experiments {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": field '" + key + "' has the wrong type");
  }
}

template <typename T>
T field_or(const json& obj, const char* key, T fallback, const std::string& where) {
  return obj.contains(key) ? field<T>(obj, key, where) : fallback;
}

TolMode parse_tol_mode(const std::string& name) {
  if (name == "update-norm") return TolMode::update_norm;
  if (name == "residual-norm") return TolMode::residual_norm;
  if (name == "truth-error") return TolMode::truth_error;
  throw ConfigError("solver: unknown tol_mode '" + name + "'");
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  ExperimentConfig cfg;
  cfg.L = field<Index>(doc, "L", "config");
  check_length(cfg.L);
  cfg.seed = field_or<std::uint64_t>(doc, "seed", kDefaultSeed, "config");
  cfg.delta = field_or<Index>(doc, "delta", 0, "config");
  if (cfg.delta < 0) throw ConfigError("config: delta must be nonnegative");

  if (!doc.contains("frames") || !doc["frames"].is_array() || doc["frames"].empty()) {
    throw ConfigError("config: 'frames' must be a nonempty array");
  }
  for (const json& f : doc["frames"]) {
    const std::string where = "frame";
    FrameSpec spec;
    spec.id = field<int>(f, "id", where);
    spec.window = field_or<std::string>(f, "window", "gaussian", where);
    spec.tfr = field_or<double>(f, "tfr", 1.0, where);
    spec.half_width = field_or<Index>(f, "half_width", 0, where);
    spec.a = field<Index>(f, "a", where);
    spec.b = field<Index>(f, "b", where);
    spec.tighten = field_or<bool>(f, "tighten", true, where);
    if (spec.window != "gaussian" && spec.window != "truncated_gaussian" && spec.window != "raised_cosine") {
      throw ConfigError("frame " + std::to_string(spec.id) + ": unknown window '" + spec.window + "'");
    }
    cfg.frames.push_back(spec);
  }

  if (!doc.contains("partition") || !doc["partition"].is_object()) throw ConfigError("config: missing 'partition'");
  const json& p = doc["partition"];
  cfg.partition.type = field<std::string>(p, "type", "partition");
  if (cfg.partition.type == "stripes") {
    cfg.partition.boundaries = field<std::vector<Index>>(p, "boundaries", "partition");
  } else if (cfg.partition.type == "tiles") {
    cfg.partition.tile = field<Index>(p, "tile", "partition");
  } else if (cfg.partition.type == "replacement") {
    if (!p.contains("omega") || !p["omega"].is_object()) throw ConfigError("partition: replacement needs 'omega'");
    const json& box = p["omega"];
    cfg.partition.box_x = field<Index>(box, "x", "omega");
    cfg.partition.box_width = field<Index>(box, "width", "omega");
    cfg.partition.box_omega = field<Index>(box, "omega", "omega");
    cfg.partition.box_height = field<Index>(box, "height", "omega");
    if (cfg.partition.box_width <= 0 || cfg.partition.box_height <= 0) {
      throw ConfigError("omega: width and height must be positive");
    }
    if (p.contains("omega_star_delta") && !(p["omega_star_delta"].is_string() && p["omega_star_delta"] == "auto")) {
      cfg.partition.omega_star_delta = field<Index>(p, "omega_star_delta", "partition");
      if (*cfg.partition.omega_star_delta < 0) throw ConfigError("partition: omega_star_delta must be nonnegative");
    }
    if (cfg.frames.size() != 2) throw ConfigError("partition: replacement needs exactly two frames");
  } else {
    throw ConfigError("partition: unknown type '" + cfg.partition.type + "'");
  }

  if (cfg.partition.type != "replacement") {
    if (!doc.contains("assignment") || !doc["assignment"].is_array()) {
      throw ConfigError("config: 'assignment' must be an array of [region, frame] pairs");
    }
    for (const json& pair : doc["assignment"]) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() || !pair[1].is_number_integer()) {
        throw ConfigError("assignment: entries must be [region, frame] integer pairs");
      }
      cfg.assignment.emplace_back(pair[0].get<int>(), pair[1].get<int>());
    }
  }

  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    if (!s.is_object()) throw ConfigError("config: 'solver' must be an object");
    if (s.contains("relaxation") && !s["relaxation"].is_null()) {
      cfg.solver.relaxation = field<double>(s, "relaxation", "solver");
    }
    cfg.solver.tol = field_or<double>(s, "tol", cfg.solver.tol, "solver");
    cfg.solver.max_iter = field_or<int>(s, "max_iter", cfg.solver.max_iter, "solver");
    cfg.solver.tol_mode = parse_tol_mode(field_or<std::string>(s, "tol_mode", "update-norm", "solver"));
  }
  cfg.solver.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

std::vector<Frame> build_frames(const ExperimentConfig& config) {
  std::vector<Frame> frames;
  for (const FrameSpec& spec : config.frames) {
    Signal<double> g;
    if (spec.window == "gaussian") {
      g = periodized_gaussian<double>(config.L, spec.tfr);
    } else if (spec.window == "truncated_gaussian") {
      g = truncated_gaussian<double>(config.L, spec.half_width, spec.tfr);
    } else {
      g = raised_cosine<double>(config.L, spec.half_width);
    }
    Frame frame(std::move(g), Lattice(config.L, spec.a, spec.b), spec.id);
    frames.push_back(spec.tighten ? tightened(frame) : frame);
  }
  return frames;
}

RunResult run(const ExperimentConfig& config) {
  std::vector<Frame> frames = build_frames(config);
  std::optional<Quilt> quilt;
  std::optional<ReplacementPlan<double>> plan;
  const PartitionSpec& ps = config.partition;
  if (ps.type == "replacement") {
    const Region omega = Region::box(config.L, ps.box_x, ps.box_width, ps.box_omega, ps.box_height);
    Region omega_star;
    if (ps.omega_star_delta) {
      omega_star = enlarge_region(omega, *ps.omega_star_delta, config.L);
    } else {
      omega_star = choose_omega_star(omega, frames[0], frames[1], frame_bounds(frames[0]).A).region;
    }
    Replacement<double> rep = build_replacement(frames[0], frames[1], omega, omega_star);
    quilt = std::move(rep.quilt);
    plan = std::move(rep.plan);
  } else {
    Partition partition = ps.type == "stripes" ? build_partition_stripes(config.L, ps.boundaries)
                                               : build_partition_tiles(config.L, ps.tile);
    quilt = assemble_quilt<double>(std::move(frames), std::move(partition), FrameAssignment{config.assignment},
                                   config.delta);
  }
  const Signal<double> f = random_signal<double>(config.L, config.seed);
  RunResult result{*quilt, quilt_frame_bounds(*quilt), {}, std::move(plan)};
  if (!result.bounds.is_frame()) throw NotAFrameError("configured quilt is not a frame (A = 0)");
  result.report = frame_algorithm(*quilt, quilt_analysis(*quilt, f), config.solver, std::optional<Signal<double>>(f));
  return result;
}

json region_to_json(const Region& region) {
  json rects = json::array();
  for (const Rect& r : region.rects) rects.push_back({{"x0", r.x0}, {"x1", r.x1}, {"w0", r.w0}, {"w1", r.w1}});
  return {{"id", region.id}, {"rects", rects}};
}

json plan_to_json(const ReplacementPlan<double>& plan) {
  return {
      {"omega", region_to_json(plan.omega)},
      {"omega_star", region_to_json(plan.omega_star)},
      {"F1_count", plan.F1.size()},
      {"F2_count", plan.F2.size()},
      {"A1", plan.A1},
      {"C", plan.defect},
      {"C_power_iteration", plan.defect_power},
      {"Lmap_norm_sq", plan.Lnorm},
      {"certified", plan.certified},
      {"guaranteed_A", plan.guaranteed_A},
  };
}

std::string format_fixed(double value, int decimals) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(decimals);
  out << value;
  return out.str();
}

std::string format_sci(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits, value);
  return buf;
}

}  // namespace quiltframe::experiments
