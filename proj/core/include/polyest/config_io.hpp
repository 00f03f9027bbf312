#pragma once

#include "polyest/experiments.hpp"

#include <ostream>
#include <string>

namespace polyest {

// JSON scenario configs. Unknown keys, wrong types and out-of-range values throw std::invalid_argument.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);

SignalSet parse_signal_set(const std::string& json_text);

void write_json(std::ostream& os, const RunResult& result);
void write_design_json(std::ostream& os, const DesignReport& report);

}  // namespace polyest
