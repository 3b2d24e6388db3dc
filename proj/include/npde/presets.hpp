#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace npde {

struct ExperimentConfig;

struct PresetInfo {
  std::string name;
  std::string description;
};

/// Named configurations of the benchmark experiments.  Throws
/// std::invalid_argument for unknown names.
ExperimentConfig preset(std::string_view name);

std::vector<PresetInfo> list_presets();

}  // namespace npde
