#pragma once

#include <filesystem>
#include <string>

#include "lsmimo/channel.hpp"

namespace lsmimo {

// YAML mapping whose keys are exactly the SystemConfig field names. Missing
// keys keep their defaults; unknown keys are rejected. `rho` accepts either
// a linear value or a decibel string such as "20dB".

SystemConfig parse_config(const std::string& text);
SystemConfig load_config(const std::filesystem::path& path);

/// Round-trips through parse_config. rho is written in linear scale.
std::string dump_config(const SystemConfig& config);

/// "20dB", "20 dB" or a plain number (linear).
double parse_rho(const std::string& text);

}  // namespace lsmimo
