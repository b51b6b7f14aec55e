#pragma once

#include <filesystem>
#include <string>

#include "fuselage/simulator.hpp"

namespace fuselage::cli {

// JSON object whose keys override fields of `base`; unknown keys are a
// ConfigError. "response" maps corruption names to
// {"sigma_mult": [5], "miss_mult": [5], "fp_mult": [5]}.
SimDetectorSpec parse_detector_config(const std::string& text, SimDetectorSpec base,
                                      const std::string& source);
SimDetectorSpec load_detector_config(const std::filesystem::path& path, SimDetectorSpec base);
std::string dump_detector_config(const SimDetectorSpec& spec);

}  // namespace fuselage::cli
