#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mtsplan/scene.hpp"

namespace testutil {

inline std::filesystem::path data_path(const std::string& rel) {
  return std::filesystem::path(MTSPLAN_DATA_DIR) / rel;
}

inline mtsplan::Material concrete() { return mtsplan::builtin_materials().at("concrete"); }
inline mtsplan::Material metal() { return mtsplan::builtin_materials().at("metal"); }

/// Axis-aligned rectangular room [0,w]x[0,h] of concrete walls (bottom, right, top, left).
inline std::vector<mtsplan::Wall> rectangle(double w, double h) {
  return {{{0, 0}, {w, 0}, concrete()},
          {{w, 0}, {w, h}, concrete()},
          {{w, h}, {0, h}, concrete()},
          {{0, h}, {0, 0}, concrete()}};
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mtsplan_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil
