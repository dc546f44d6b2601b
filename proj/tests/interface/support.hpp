#pragma once

#include <string>

#include "ocplens/scenario_io.hpp"

namespace fixtures {

inline std::string scenario_path(const std::string& name) {
  return std::string(OCPLENS_TEST_SCENARIO_DIR) + "/" + name + ".json";
}

inline std::string scenario_text(const std::string& name) {
  return ocplens::read_text_file(scenario_path(name));
}

inline ocplens::Scenario load_scenario(const std::string& name) {
  return ocplens::parse_scenario(scenario_text(name));
}

inline ocplens::Json load_json(const std::string& name) {
  return ocplens::parse_json(scenario_text(name));
}

}  // namespace fixtures
