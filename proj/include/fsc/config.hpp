#pragma once

#include <istream>
#include <string>
#include <vector>

#include "fsc/pipeline.hpp"

namespace fsc {

// Plain-text configuration: "key = value" lines grouped under [section] headers; '#' starts a comment.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

// Applies one "section.key=value" assignment.
void apply_setting(RunConfig& config, const std::string& assignment);
void apply_setting(RunConfig& config, const std::string& section, const std::string& key, const std::string& value);

// "a, b, c" or "lo:hi:step".
std::vector<double> parse_real_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

std::string describe(const RunConfig& config);

}  // namespace fsc
