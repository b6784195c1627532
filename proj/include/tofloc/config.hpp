#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tofloc/study.hpp"

namespace tofloc {

// Flat key-value settings file: one "key = value" per line, '#' comments.
// Keys are dotted (pf.particles, noise.sigma_fraction, ...); see README for
// the full list. Unknown keys are an error.
std::vector<std::pair<std::string, std::string>> parse_settings_text(const std::string& text);

void apply_setting(StudyConfig& cfg, const std::string& key, const std::string& value);

void load_config_file(StudyConfig& cfg, const std::string& path);

// "1,2,5" or "1-10" (ranges and values can mix).
std::vector<int> parse_int_list(const std::string& key, const std::string& value);

}  // namespace tofloc
