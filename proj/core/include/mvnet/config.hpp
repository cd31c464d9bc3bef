#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mvnet {

/// One "key = value" line of a config file.
struct ConfigEntry {
    int line = 0;
    std::string key;
    std::string value;
};

/// Splits text into key/value entries. '#' starts a comment; blank lines are
/// skipped. Throws ConfigError on lines without '='.
std::vector<ConfigEntry> parse_config(std::string_view text);

std::vector<std::string> split_ws(std::string_view s);
std::string_view trim(std::string_view s);

double parse_double(const ConfigEntry& e, std::string_view token);
long long parse_int(const ConfigEntry& e, std::string_view token);
std::vector<double> parse_doubles(const ConfigEntry& e);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double x);

}  // namespace mvnet
