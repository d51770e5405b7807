#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace enslab {

// Minimal TOML subset: [section] headers, key = value, # comments.
// Values are numbers, "strings", true/false, or flat arrays of numbers or of
// strings (arrays may span lines). Keys before the first header belong to "".
using TomlValue = std::variant<double, std::string, bool, std::vector<double>, std::vector<std::string>>;
using TomlTable = std::map<std::string, TomlValue>;
using TomlDoc = std::map<std::string, TomlTable>;

// Throws ConfigError with the offending line number.
TomlDoc parse_toml(const std::string& text);

}  // namespace enslab
