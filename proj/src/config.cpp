#include "aerobat/config.hpp"

#include "aerobat/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace aerobat::config {

using nlohmann::json;
using nlohmann::ordered_json;

void RunConfig::validate() const {
  if (schema_version != kSchemaVersion)
    throw ConfigError("schema_version: expected " + std::to_string(kSchemaVersion) + ", got " +
                      std::to_string(schema_version));
  scenario.validate();
  if (output.stick_stride < 1) throw ConfigError("output.stick_stride must be >= 1");
  for (const std::string* name : {&output.trajectory_csv, &output.stick_svg, &output.stick_csv})
    if (name->empty()) throw ConfigError("output: file names must not be empty");
}

namespace {

// Shortest decimal degrees that convert back to exactly `rad`.
double to_degrees(double rad) {
  const double d = rad2deg(rad);
  if (!std::isfinite(d)) return d;
  char buf[40];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, d);
    const double c = std::strtod(buf, nullptr);
    if (deg2rad(c) == rad) return c;
  }
  double lo = d, hi = d;
  for (int step = 0; step < 4096; ++step) {
    lo = std::nextafter(lo, -INFINITY);
    hi = std::nextafter(hi, INFINITY);
    if (deg2rad(lo) == rad) return lo;
    if (deg2rad(hi) == rad) return hi;
  }
  return d;
}

// Signed zeros print as -0.0; they compare equal to +0.0 anyway.
double unsign_zero(double v) { return v == 0.0 ? 0.0 : v; }

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(j_.at(key), join(path_, key));
  }

  void number(const std::string& key, double& out) {
    if (const json* v = take(key)) out = as_number(*v, join(path_, key));
  }
  void degrees(const std::string& key, double& out) {
    if (const json* v = take(key)) out = deg2rad(as_number(*v, join(path_, key)));
  }
  void integer(const std::string& key, int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer())
        throw ConfigError(join(path_, key) + ": expected an integer");
      out = v->get<int>();
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) throw ConfigError(join(path_, key) + ": expected true or false");
      out = v->get<bool>();
    }
  }
  void string(const std::string& key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) throw ConfigError(join(path_, key) + ": expected a string");
      out = v->get<std::string>();
    }
  }
  void vec3(const std::string& key, Vec3& out, bool in_degrees = false) {
    if (const json* v = take(key)) {
      out = as_vec3(*v, join(path_, key));
      if (in_degrees) out = out.unaryExpr([](double d) { return deg2rad(d); });
    }
  }
  void mat3(const std::string& key, Mat3& out) {
    if (const json* v = take(key)) {
      const std::string p = join(path_, key);
      if (!v->is_array() || v->size() != 3) throw ConfigError(p + ": expected 3 rows");
      for (int r = 0; r < 3; ++r) out.row(r) = as_vec3((*v)[r], p + "[" + std::to_string(r) + "]");
    }
  }
  void optional_number(const std::string& key, std::optional<double>& out) {
    if (const json* v = take(key)) {
      if (v->is_null()) out.reset();
      else out = as_number(*v, join(path_, key));
    }
  }

  /// Rejects keys that were never consumed.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key()))
        throw ConfigError("unknown key '" + join(path_, it.key()) + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }

  const json* take(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  static double as_number(const json& v, const std::string& p) {
    if (!v.is_number()) throw ConfigError(p + ": expected a number");
    return v.get<double>();
  }
  static Vec3 as_vec3(const json& v, const std::string& p) {
    if (!v.is_array() || v.size() != 3) throw ConfigError(p + ": expected an array of 3 numbers");
    return Vec3(as_number(v[0], p + "[0]"), as_number(v[1], p + "[1]"), as_number(v[2], p + "[2]"));
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_body(Section s, RigidBodyProperties& b) {
  s.number("mass_kg", b.mass);
  s.mat3("inertia_kgm2", b.inertia);
  s.vec3("com_m", b.com);
  s.finish();
}

void read_morphology(Section s, MorphologyConfig& m) {
  if (s.has("body")) read_body(s.child("body"), m.body);
  if (s.has("proximal")) read_body(s.child("proximal"), m.proximal);
  if (s.has("distal")) read_body(s.child("distal"), m.distal);
  s.vec3("shoulder_position_m", m.shoulder_position);
  s.vec3("shoulder_axis", m.shoulder_axis);
  s.number("proximal_length_m", m.proximal_length);
  s.vec3("elbow_axis", m.elbow_axis);
  s.number("wingspan_m", m.wingspan);
  s.number("root_chord_m", m.root_chord);
  std::string chord = to_string(m.chord_distribution);
  s.string("chord_distribution", chord);
  m.chord_distribution = chord_distribution_from_string(chord);
  s.number("tip_chord_ratio", m.tip_chord_ratio);
  s.number("lift_slope_per_rad", m.lift_slope);
  s.number("air_density_kgm3", m.air_density);
  s.integer("blade_elements", m.blade_elements);
  s.boolean("allow_mass_out_of_range", m.allow_mass_out_of_range);
  s.finish();
}

void read_gait(Section s, KSGaitConfig& g) {
  s.number("flap_frequency_hz", g.flap_frequency);
  s.degrees("shoulder_amplitude_deg", g.shoulder_amplitude);
  s.degrees("shoulder_offset_deg", g.shoulder_offset);
  s.degrees("elbow_amplitude_deg", g.elbow_amplitude);
  s.degrees("elbow_offset_deg", g.elbow_offset);
  s.degrees("elbow_phase_lag_deg", g.elbow_phase_lag);
  s.finish();
}

void read_aero(Section s, sim::AeroSettings& a) {
  s.boolean("enabled", a.enabled);
  if (s.has("wagner")) {
    Section w = s.child("wagner");
    w.number("psi1", a.wagner.psi1);
    w.number("psi2", a.wagner.psi2);
    w.number("eps1", a.wagner.eps1);
    w.number("eps2", a.wagner.eps2);
    w.finish();
  }
  std::string ode = aero::to_string(a.ode), speed = aero::to_string(a.speed_model);
  s.string("wagner_ode", ode);
  s.string("speed_model", speed);
  a.ode = aero::wagner_ode_from_string(ode);
  a.speed_model = aero::speed_model_from_string(speed);
  s.number("min_reference_speed_mps", a.min_reference_speed);
  s.optional_number("lag_reference_speed_mps", a.lag_reference_speed);
  s.vec3("freestream_mps", a.freestream);
  s.finish();
}

void read_controller(Section s, sim::ControllerSettings& c) {
  s.degrees("roll_ref_deg", c.reference.roll);
  s.degrees("pitch_ref_deg", c.reference.pitch);
  s.number("hold_interval_s", c.hold_interval);
  s.finish();
}

void read_thrusters(Section s, control::ThrusterLayout& l) {
  for (std::size_t i = 0; i < l.thrusters.size(); ++i) {
    const std::string name = control::thruster_name(i);
    if (!s.has(name)) continue;
    Section t = s.child(name);
    t.vec3("position_m", l.thrusters[i].position);
    t.vec3("direction", l.thrusters[i].direction);
    t.number("magnitude_n", l.thrusters[i].magnitude);
    t.finish();
  }
  s.finish();
}

void read_sim(Section s, sim::SimSettings& p) {
  s.number("dt_s", p.dt);
  s.number("duration_s", p.duration);
  s.vec3("initial_position_m", p.initial_position);
  s.vec3("initial_velocity_mps", p.initial_velocity);
  s.vec3("initial_euler_deg", p.initial_euler, true);
  s.vec3("initial_euler_rates_dps", p.initial_euler_rates, true);
  s.boolean("gait_constraint", p.gait_constraint);
  s.number("divergence_threshold", p.divergence_threshold);
  s.finish();
}

void read_output(Section s, OutputSettings& o) {
  s.string("directory", o.directory);
  s.string("trajectory_csv", o.trajectory_csv);
  s.string("stick_svg", o.stick_svg);
  s.string("stick_csv", o.stick_csv);
  s.integer("stick_stride", o.stick_stride);
  s.finish();
}

RunConfig from_json(const json& j) {
  RunConfig cfg;
  Section root(j, "");
  root.integer("schema_version", cfg.schema_version);
  if (cfg.schema_version != kSchemaVersion)
    throw ConfigError("schema_version: expected " + std::to_string(kSchemaVersion) + ", got " +
                      std::to_string(cfg.schema_version));
  root.string("name", cfg.scenario.name);
  if (root.has("morphology")) read_morphology(root.child("morphology"), cfg.scenario.morphology);
  if (root.has("gait")) read_gait(root.child("gait"), cfg.scenario.gait);
  if (root.has("aero")) read_aero(root.child("aero"), cfg.scenario.aero);
  if (root.has("controller")) read_controller(root.child("controller"), cfg.scenario.controller);
  if (root.has("thrusters")) read_thrusters(root.child("thrusters"), cfg.scenario.thrusters);
  if (root.has("sim")) read_sim(root.child("sim"), cfg.scenario.sim);
  if (root.has("output")) read_output(root.child("output"), cfg.output);
  root.finish();
  cfg.validate();
  return cfg;
}

ordered_json vec(const Vec3& v) {
  return ordered_json::array({unsign_zero(v.x()), unsign_zero(v.y()), unsign_zero(v.z())});
}
ordered_json vec_deg(const Vec3& v) {
  return ordered_json::array({to_degrees(v.x()), to_degrees(v.y()), to_degrees(v.z())});
}
ordered_json mat(const Mat3& m) {
  ordered_json rows = ordered_json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(vec(m.row(r).transpose()));
  return rows;
}
ordered_json body(const RigidBodyProperties& b) {
  return {{"mass_kg", b.mass}, {"inertia_kgm2", mat(b.inertia)}, {"com_m", vec(b.com)}};
}

// Like dump(2), but arrays without nested containers stay on one line.
void write_pretty(std::ostream& out, const ordered_json& j, int indent) {
  const std::string pad(indent, ' ');
  const std::string inner(indent + 2, ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out << "{}";
      return;
    }
    out << "{\n";
    std::size_t i = 0;
    for (auto it = j.begin(); it != j.end(); ++it, ++i) {
      out << inner << ordered_json(it.key()).dump() << ": ";
      write_pretty(out, it.value(), indent + 2);
      out << (i + 1 < j.size() ? ",\n" : "\n");
    }
    out << pad << "}";
  } else if (j.is_array()) {
    const bool flat = std::none_of(j.begin(), j.end(), [](const ordered_json& e) {
      return e.is_structured();
    });
    if (flat) {
      out << "[";
      for (std::size_t i = 0; i < j.size(); ++i) out << (i ? ", " : "") << j[i].dump();
      out << "]";
      return;
    }
    out << "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      out << inner;
      write_pretty(out, j[i], indent + 2);
      out << (i + 1 < j.size() ? ",\n" : "\n");
    }
    out << pad << "]";
  } else {
    out << j.dump();
  }
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    std::string msg = e.what();
    if (auto pos = msg.find("parse error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }
  try {
    return from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading config file '" + path.string() + "'");
  return parse_config(ss.str(), path.string());
}

std::string to_json(const RunConfig& cfg) {
  const sim::ScenarioConfig& s = cfg.scenario;
  const MorphologyConfig& m = s.morphology;
  ordered_json j;
  j["schema_version"] = cfg.schema_version;
  j["name"] = s.name;
  j["morphology"] = {
      {"body", body(m.body)},
      {"proximal", body(m.proximal)},
      {"distal", body(m.distal)},
      {"shoulder_position_m", vec(m.shoulder_position)},
      {"shoulder_axis", vec(m.shoulder_axis)},
      {"proximal_length_m", m.proximal_length},
      {"elbow_axis", vec(m.elbow_axis)},
      {"wingspan_m", m.wingspan},
      {"root_chord_m", m.root_chord},
      {"chord_distribution", to_string(m.chord_distribution)},
      {"tip_chord_ratio", m.tip_chord_ratio},
      {"lift_slope_per_rad", m.lift_slope},
      {"air_density_kgm3", m.air_density},
      {"blade_elements", m.blade_elements},
      {"allow_mass_out_of_range", m.allow_mass_out_of_range},
  };
  j["gait"] = {
      {"flap_frequency_hz", s.gait.flap_frequency},
      {"shoulder_amplitude_deg", to_degrees(s.gait.shoulder_amplitude)},
      {"shoulder_offset_deg", to_degrees(s.gait.shoulder_offset)},
      {"elbow_amplitude_deg", to_degrees(s.gait.elbow_amplitude)},
      {"elbow_offset_deg", to_degrees(s.gait.elbow_offset)},
      {"elbow_phase_lag_deg", to_degrees(s.gait.elbow_phase_lag)},
  };
  j["aero"] = {
      {"enabled", s.aero.enabled},
      {"wagner",
       {{"psi1", s.aero.wagner.psi1},
        {"psi2", s.aero.wagner.psi2},
        {"eps1", s.aero.wagner.eps1},
        {"eps2", s.aero.wagner.eps2}}},
      {"wagner_ode", aero::to_string(s.aero.ode)},
      {"speed_model", aero::to_string(s.aero.speed_model)},
      {"min_reference_speed_mps", s.aero.min_reference_speed},
      {"lag_reference_speed_mps",
       s.aero.lag_reference_speed ? ordered_json(*s.aero.lag_reference_speed) : ordered_json()},
      {"freestream_mps", vec(s.aero.freestream)},
  };
  j["controller"] = {
      {"roll_ref_deg", to_degrees(s.controller.reference.roll)},
      {"pitch_ref_deg", to_degrees(s.controller.reference.pitch)},
      {"hold_interval_s", s.controller.hold_interval},
  };
  ordered_json thrusters;
  for (std::size_t i = 0; i < s.thrusters.thrusters.size(); ++i) {
    const control::Thruster& t = s.thrusters.thrusters[i];
    thrusters[control::thruster_name(i)] = {{"position_m", vec(t.position)},
                                            {"direction", vec(t.direction)},
                                            {"magnitude_n", t.magnitude}};
  }
  j["thrusters"] = thrusters;
  j["sim"] = {
      {"dt_s", s.sim.dt},
      {"duration_s", s.sim.duration},
      {"initial_position_m", vec(s.sim.initial_position)},
      {"initial_velocity_mps", vec(s.sim.initial_velocity)},
      {"initial_euler_deg", vec_deg(s.sim.initial_euler)},
      {"initial_euler_rates_dps", vec_deg(s.sim.initial_euler_rates)},
      {"gait_constraint", s.sim.gait_constraint},
      {"divergence_threshold", s.sim.divergence_threshold},
  };
  j["output"] = {
      {"directory", cfg.output.directory},
      {"trajectory_csv", cfg.output.trajectory_csv},
      {"stick_svg", cfg.output.stick_svg},
      {"stick_csv", cfg.output.stick_csv},
      {"stick_stride", cfg.output.stick_stride},
  };
  std::ostringstream out;
  write_pretty(out, j, 0);
  out << "\n";
  return out.str();
}

void save_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write config file '" + path.string() + "'");
  out << to_json(cfg);
  if (!out) throw IoError("error writing config file '" + path.string() + "'");
}

}  // namespace aerobat::config
