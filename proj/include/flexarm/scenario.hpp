#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flexarm/controllers.hpp"
#include "flexarm/plant.hpp"
#include "flexarm/sim.hpp"

namespace flexarm {

/// Everything needed to reproduce one run. `q_star` is authoritative and is
/// copied into the controller gains by `validate()` and the parsers.
struct Scenario {
  std::string name;
  std::string description;
  PlantParams plant;
  ControllerSpec controller = OpenLoop{};
  ActuatorModel actuator;
  SimConfig sim;
  Vec2 q_star = Vec2::Zero();
  VecX x0 = VecX::Zero(8);

  /// Syncs q_star into the gains and checks x0 against the controller dimension.
  void validate();

  bool operator==(const Scenario& other) const;
};

/// Experiment reproductions (C1, C2, C3, INT) plus demos (OPENLOOP, PI).
const std::vector<Scenario>& builtin_scenarios();
std::optional<Scenario> find_builtin(std::string_view name);

/// JSON text <-> Scenario. Unknown keys are rejected with ConfigError.
Scenario parse_scenario(std::string_view text, std::string_view origin = "<string>");
std::string serialize_scenario(const Scenario& s);
Scenario load_scenario_file(const std::filesystem::path& path);

/// A built-in name, a scenario in `config_dir` (by file stem), or a path to a JSON file.
Scenario resolve_scenario(std::string_view ref, const std::optional<std::filesystem::path>& config_dir = {});

struct ScenarioListing {
  std::string name;
  std::string description;
  std::string source;  // "builtin" or the file path
};

std::vector<ScenarioListing> list_scenarios(const std::optional<std::filesystem::path>& config_dir = {});

/// Parses "ideal", "deadzone", "deadzone:<thr>", "clamp", "clamp:<u_max>".
ActuatorModel parse_actuator(std::string_view text, double default_u_max);

}  // namespace flexarm
