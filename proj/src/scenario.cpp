#include "flexarm/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "flexarm/errors.hpp"

namespace flexarm {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

// ---- builtin data ---------------------------------------------------------

// Fixed gains shared by C1-C3; only the alpha values differ between cases.
SatGains case_gains(double alpha_l, double alpha_m) {
  SatGains g;
  g.R_cm = Vec2(25.0, 25.0).asDiagonal();
  g.R_cl = Vec2(10.0, 40.0).asDiagonal();
  g.K_c = Vec2(5.0, 5.0).asDiagonal();
  g.beta_l = Vec2(2.0, 1.0);
  g.beta_m = Vec2(1.0, 1.0);
  g.alpha_l = Vec2::Constant(alpha_l);
  g.alpha_m = Vec2::Constant(alpha_m);
  return g;
}

IntGains integral_gains() {
  IntGains g;
  g.sat.R_cl = Vec2(25.0, 40.0).asDiagonal();
  g.sat.R_cm = 0.25 * Mat2::Identity();
  g.sat.K_c = 0.1 * Mat2::Identity();
  g.K_sigma = Mat2::Identity();
  g.sat.alpha_l = Vec2(0.6, 0.3);
  g.sat.alpha_m = Vec2(0.25, 0.6);
  g.alpha_sigma = Vec2(0.35, 0.3);
  g.sat.beta_l = Vec2(3.0, 1.0);
  g.sat.beta_m = Vec2(1.0, 1.0);
  g.beta_sigma = Vec2(2.5, 3.0);
  return g;
}

Scenario make_builtin(std::string name, std::string description, ControllerSpec spec, double t_final) {
  Scenario s;
  s.name = std::move(name);
  s.description = std::move(description);
  s.controller = std::move(spec);
  s.sim.t_final = t_final;
  s.sim.record_stride = 10;
  s.q_star = Vec2(-1.0, 1.0);
  s.x0 = VecX::Zero(closed_loop_dim(s.controller));
  s.validate();
  return s;
}

std::vector<Scenario> make_builtins() {
  std::vector<Scenario> out;

  Scenario open = make_builtin("OPENLOOP", "u = 0 passive decay of an initial link deflection", OpenLoop{}, 30.0);
  open.q_star = Vec2::Zero();
  open.x0(0) = 0.3;
  open.x0(1) = -0.2;
  open.validate();
  out.push_back(std::move(open));

  PiGains pi;
  pi.K_Pm = Mat2::Identity();
  pi.K_Pl = 0.1 * Mat2::Identity();
  pi.K_I = 5.0 * Mat2::Identity();
  out.push_back(make_builtin("PI", "velocity-feedback PI baseline (needs momenta, unbounded input)", pi, 300.0));

  out.push_back(make_builtin("C1", "saturated output feedback, alpha_l = 0.8, alpha_m = 0.4", case_gains(0.8, 0.4), 300.0));
  out.push_back(make_builtin("C2", "saturated output feedback, alpha_l = 0.2, alpha_m = 1.0", case_gains(0.2, 1.0), 300.0));
  out.push_back(make_builtin("C3", "saturated output feedback, alpha_l = 0, alpha_m = 1.2", case_gains(0.0, 1.2), 300.0));
  out.push_back(make_builtin("INT", "saturated output feedback with integral-like sigma action", integral_gains(), 300.0));
  return out;
}

// ---- json helpers ---------------------------------------------------------

[[noreturn]] void fail(std::string_view origin, const std::string& msg) {
  throw ConfigError(std::string(origin) + ": " + msg);
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where,
                    std::string_view origin) {
  if (!obj.is_object()) fail(origin, std::string(where) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(origin, "unknown key '" + key + "' in " + std::string(where));
    }
  }
}

double get_number(const json& j, std::string_view what, std::string_view origin) {
  if (!j.is_number()) fail(origin, std::string(what) + " must be a number");
  return j.get<double>();
}

Vec2 get_vec2(const json& j, std::string_view what, std::string_view origin) {
  if (!j.is_array() || j.size() != 2) fail(origin, std::string(what) + " must be an array of 2 numbers");
  return {get_number(j[0], what, origin), get_number(j[1], what, origin)};
}

// [[a, b], [c, d]], or [d1, d2] as shorthand for a diagonal matrix.
Mat2 get_mat2(const json& j, std::string_view what, std::string_view origin) {
  if (j.is_array() && j.size() == 2 && j[0].is_number()) return get_vec2(j, what, origin).asDiagonal();
  if (!j.is_array() || j.size() != 2) fail(origin, std::string(what) + " must be a 2x2 array");
  Mat2 m;
  m.row(0) = get_vec2(j[0], what, origin).transpose();
  m.row(1) = get_vec2(j[1], what, origin).transpose();
  return m;
}

json vec_json(const VecX& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json mat_json(const Mat2& m) { return json::array({vec_json(m.row(0).transpose()), vec_json(m.row(1).transpose())}); }

template <class F>
void read_opt(const json& obj, const char* key, F&& f) {
  if (auto it = obj.find(key); it != obj.end()) f(*it);
}

PlantParams parse_plant(const json& j, std::string_view origin) {
  reject_unknown(j, {"a1", "a2", "b", "Im1", "Im2", "Dl1", "Dl2", "Dm1", "Dm2", "ks1", "ks2", "u_max"}, "plant",
                 origin);
  PlantParams p;
  const std::pair<const char*, double*> fields[] = {{"a1", &p.a1},   {"a2", &p.a2},   {"b", &p.b},
                                                    {"Im1", &p.Im1}, {"Im2", &p.Im2}, {"Dl1", &p.Dl1},
                                                    {"Dl2", &p.Dl2}, {"Dm1", &p.Dm1}, {"Dm2", &p.Dm2},
                                                    {"ks1", &p.ks1}, {"ks2", &p.ks2}, {"u_max", &p.u_max}};
  for (const auto& [key, dst] : fields) read_opt(j, key, [&](const json& v) { *dst = get_number(v, key, origin); });
  return p;
}

json plant_json(const PlantParams& p) {
  return {{"a1", p.a1},   {"a2", p.a2},   {"b", p.b},     {"Im1", p.Im1}, {"Im2", p.Im2}, {"Dl1", p.Dl1},
          {"Dl2", p.Dl2}, {"Dm1", p.Dm1}, {"Dm2", p.Dm2}, {"ks1", p.ks1}, {"ks2", p.ks2}, {"u_max", p.u_max}};
}

void parse_sat_fields(const json& j, SatGains& g, std::string_view origin) {
  read_opt(j, "alpha_l", [&](const json& v) { g.alpha_l = get_vec2(v, "alpha_l", origin); });
  read_opt(j, "beta_l", [&](const json& v) { g.beta_l = get_vec2(v, "beta_l", origin); });
  read_opt(j, "alpha_m", [&](const json& v) { g.alpha_m = get_vec2(v, "alpha_m", origin); });
  read_opt(j, "beta_m", [&](const json& v) { g.beta_m = get_vec2(v, "beta_m", origin); });
  read_opt(j, "R_cl", [&](const json& v) { g.R_cl = get_mat2(v, "R_cl", origin); });
  read_opt(j, "R_cm", [&](const json& v) { g.R_cm = get_mat2(v, "R_cm", origin); });
  read_opt(j, "K_c", [&](const json& v) { g.K_c = get_mat2(v, "K_c", origin); });
}

void sat_fields_json(json& j, const SatGains& g) {
  j["alpha_l"] = vec_json(g.alpha_l);
  j["beta_l"] = vec_json(g.beta_l);
  j["alpha_m"] = vec_json(g.alpha_m);
  j["beta_m"] = vec_json(g.beta_m);
  j["R_cl"] = mat_json(g.R_cl);
  j["R_cm"] = mat_json(g.R_cm);
  j["K_c"] = mat_json(g.K_c);
}

ControllerSpec parse_controller(const json& j, std::string_view origin) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    fail(origin, "controller must be an object with a string 'type'");
  }
  const std::string type = j["type"].get<std::string>();
  if (type == "open_loop") {
    reject_unknown(j, {"type"}, "controller", origin);
    return OpenLoop{};
  }
  if (type == "pi") {
    reject_unknown(j, {"type", "K_Pm", "K_Pl", "K_I"}, "controller", origin);
    PiGains g;
    read_opt(j, "K_Pm", [&](const json& v) { g.K_Pm = get_mat2(v, "K_Pm", origin); });
    read_opt(j, "K_Pl", [&](const json& v) { g.K_Pl = get_mat2(v, "K_Pl", origin); });
    read_opt(j, "K_I", [&](const json& v) { g.K_I = get_mat2(v, "K_I", origin); });
    return g;
  }
  if (type == "saturated") {
    reject_unknown(j, {"type", "alpha_l", "beta_l", "alpha_m", "beta_m", "R_cl", "R_cm", "K_c"}, "controller",
                   origin);
    SatGains g;
    parse_sat_fields(j, g, origin);
    return g;
  }
  if (type == "saturated_integral") {
    reject_unknown(j,
                   {"type", "alpha_l", "beta_l", "alpha_m", "beta_m", "R_cl", "R_cm", "K_c", "alpha_sigma",
                    "beta_sigma", "K_sigma"},
                   "controller", origin);
    IntGains g;
    parse_sat_fields(j, g.sat, origin);
    read_opt(j, "alpha_sigma", [&](const json& v) { g.alpha_sigma = get_vec2(v, "alpha_sigma", origin); });
    read_opt(j, "beta_sigma", [&](const json& v) { g.beta_sigma = get_vec2(v, "beta_sigma", origin); });
    read_opt(j, "K_sigma", [&](const json& v) { g.K_sigma = get_mat2(v, "K_sigma", origin); });
    return g;
  }
  fail(origin, "unknown controller type '" + type + "' (open_loop, pi, saturated, saturated_integral)");
}

json controller_json(const ControllerSpec& spec) {
  json j;
  j["type"] = controller_kind(spec);
  std::visit(overloaded{[](const OpenLoop&) {},
                        [&](const PiGains& g) {
                          j["K_Pm"] = mat_json(g.K_Pm);
                          j["K_Pl"] = mat_json(g.K_Pl);
                          j["K_I"] = mat_json(g.K_I);
                        },
                        [&](const SatGains& g) { sat_fields_json(j, g); },
                        [&](const IntGains& g) {
                          sat_fields_json(j, g.sat);
                          j["alpha_sigma"] = vec_json(g.alpha_sigma);
                          j["beta_sigma"] = vec_json(g.beta_sigma);
                          j["K_sigma"] = mat_json(g.K_sigma);
                        }},
             spec);
  return j;
}

ActuatorModel parse_actuator_json(const json& j, double u_max, std::string_view origin) {
  if (j.is_string()) return parse_actuator(j.get<std::string>(), u_max);
  reject_unknown(j, {"type", "threshold", "u_max"}, "actuator", origin);
  if (!j.contains("type") || !j["type"].is_string()) fail(origin, "actuator needs a string 'type'");
  ActuatorModel a = parse_actuator(j["type"].get<std::string>(), u_max);
  read_opt(j, "threshold", [&](const json& v) { a.threshold = get_number(v, "actuator.threshold", origin); });
  read_opt(j, "u_max", [&](const json& v) { a.u_max = get_number(v, "actuator.u_max", origin); });
  return a;
}

json actuator_json(const ActuatorModel& a) {
  switch (a.kind) {
    case ActuatorModel::Kind::ideal:
      return {{"type", "ideal"}};
    case ActuatorModel::Kind::deadzone:
      return {{"type", "deadzone"}, {"threshold", a.threshold}};
    case ActuatorModel::Kind::clamp:
      return {{"type", "clamp"}, {"u_max", a.u_max}};
  }
  return {};
}

SimConfig parse_sim(const json& j, std::string_view origin) {
  reject_unknown(j, {"dt", "t_final", "integrator", "record_stride"}, "sim", origin);
  SimConfig c;
  read_opt(j, "dt", [&](const json& v) { c.dt = get_number(v, "sim.dt", origin); });
  read_opt(j, "t_final", [&](const json& v) { c.t_final = get_number(v, "sim.t_final", origin); });
  read_opt(j, "integrator", [&](const json& v) {
    const std::string name = v.is_string() ? v.get<std::string>() : "";
    if (name == "rk4") {
      c.integrator = Integrator::rk4;
    } else if (name == "euler") {
      c.integrator = Integrator::euler;
    } else {
      fail(origin, "sim.integrator must be \"rk4\" or \"euler\"");
    }
  });
  read_opt(j, "record_stride", [&](const json& v) {
    if (!v.is_number_integer()) fail(origin, "sim.record_stride must be an integer");
    c.record_stride = v.get<int>();
  });
  return c;
}

json sim_json(const SimConfig& c) {
  return {{"dt", c.dt},
          {"t_final", c.t_final},
          {"integrator", c.integrator == Integrator::rk4 ? "rk4" : "euler"},
          {"record_stride", c.record_stride}};
}

}  // namespace

void Scenario::validate() {
  set_reference(controller, q_star);
  plant.validate();
  sim.validate();
  actuator.validate();
  const int n = closed_loop_dim(controller);
  if (x0.size() != n) {
    throw ConfigError("scenario '" + name + "': x0 has " + std::to_string(x0.size()) + " entries but the " +
                      controller_kind(controller) + " loop has dimension " + std::to_string(n));
  }
  if (!x0.allFinite() || !q_star.allFinite()) throw ConfigError("scenario '" + name + "': non-finite x0 or q_star");
}

bool Scenario::operator==(const Scenario& other) const {
  return name == other.name && description == other.description && plant == other.plant &&
         controller == other.controller && actuator == other.actuator && sim == other.sim &&
         q_star == other.q_star && x0.size() == other.x0.size() && x0 == other.x0;
}

const std::vector<Scenario>& builtin_scenarios() {
  static const std::vector<Scenario> builtins = make_builtins();
  return builtins;
}

std::optional<Scenario> find_builtin(std::string_view name) {
  for (const auto& s : builtin_scenarios()) {
    if (s.name == name) return s;
  }
  return std::nullopt;
}

ActuatorModel parse_actuator(std::string_view text, double default_u_max) {
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  std::optional<double> value;
  if (colon != std::string_view::npos) {
    const std::string_view num = text.substr(colon + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
    if (ec != std::errc() || ptr != num.data() + num.size()) {
      throw ConfigError("bad actuator parameter in '" + std::string(text) + "'");
    }
    value = v;
  }
  ActuatorModel a;
  if (kind == "ideal" && !value) {
    a = ActuatorModel::ideal();
  } else if (kind == "deadzone") {
    a = ActuatorModel::deadzone(value.value_or(0.12));
  } else if (kind == "clamp") {
    a = ActuatorModel::clamp(value.value_or(default_u_max));
  } else {
    throw ConfigError("unknown actuator '" + std::string(text) + "' (ideal, deadzone[:thr], clamp[:u_max])");
  }
  a.validate();
  return a;
}

Scenario parse_scenario(std::string_view text, std::string_view origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(origin, std::string("malformed JSON: ") + e.what());
  }
  reject_unknown(j, {"name", "description", "plant", "controller", "actuator", "sim", "q_star", "x0"}, "scenario",
                 origin);
  Scenario s;
  if (!j.contains("name") || !j["name"].is_string()) fail(origin, "scenario needs a string 'name'");
  s.name = j["name"].get<std::string>();
  read_opt(j, "description", [&](const json& v) {
    if (!v.is_string()) fail(origin, "description must be a string");
    s.description = v.get<std::string>();
  });
  read_opt(j, "plant", [&](const json& v) { s.plant = parse_plant(v, origin); });
  if (!j.contains("controller")) fail(origin, "scenario needs a 'controller'");
  s.controller = parse_controller(j["controller"], origin);
  read_opt(j, "actuator", [&](const json& v) { s.actuator = parse_actuator_json(v, s.plant.u_max, origin); });
  read_opt(j, "sim", [&](const json& v) { s.sim = parse_sim(v, origin); });
  s.q_star = Vec2(-1.0, 1.0);
  read_opt(j, "q_star", [&](const json& v) { s.q_star = get_vec2(v, "q_star", origin); });
  s.x0 = VecX::Zero(closed_loop_dim(s.controller));
  read_opt(j, "x0", [&](const json& v) {
    if (!v.is_array()) fail(origin, "x0 must be an array");
    s.x0.resize(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) s.x0(static_cast<Eigen::Index>(i)) = get_number(v[i], "x0", origin);
  });
  try {
    s.validate();
  } catch (const ConfigError& e) {
    fail(origin, e.what());
  }
  return s;
}

std::string serialize_scenario(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["description"] = s.description;
  j["plant"] = plant_json(s.plant);
  j["controller"] = controller_json(s.controller);
  j["actuator"] = actuator_json(s.actuator);
  j["sim"] = sim_json(s.sim);
  j["q_star"] = vec_json(s.q_star);
  j["x0"] = vec_json(s.x0);
  return j.dump(2) + "\n";
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

namespace {

std::vector<std::filesystem::path> config_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw ConfigError("config directory " + dir.string() + " not found");
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

Scenario resolve_scenario(std::string_view ref, const std::optional<std::filesystem::path>& config_dir) {
  if (auto s = find_builtin(ref)) return *s;
  if (config_dir) {
    for (const auto& file : config_files(*config_dir)) {
      if (file.stem() == ref) return load_scenario_file(file);
    }
  }
  const std::filesystem::path path(ref);
  std::error_code ec;
  if (std::filesystem::is_regular_file(path, ec)) return load_scenario_file(path);
  throw ConfigError("unknown scenario '" + std::string(ref) + "' (not a built-in name or a readable file)");
}

std::vector<ScenarioListing> list_scenarios(const std::optional<std::filesystem::path>& config_dir) {
  std::vector<ScenarioListing> out;
  for (const auto& s : builtin_scenarios()) out.push_back({s.name, s.description, "builtin"});
  if (config_dir) {
    for (const auto& file : config_files(*config_dir)) {
      const Scenario s = load_scenario_file(file);
      out.push_back({file.stem().string(), s.description, file.string()});
    }
  }
  return out;
}

}  // namespace flexarm
