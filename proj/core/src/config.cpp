#include "mvnet/config.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "mvnet/error.hpp"

namespace mvnet {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > start) out.emplace_back(s.substr(start, i - start));
    }
    return out;
}

std::vector<ConfigEntry> parse_config(std::string_view text) {
    std::vector<ConfigEntry> entries;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (!line.empty()) {
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw ConfigError(line_no, std::string(line), "expected key = value");
            ConfigEntry e;
            e.line = line_no;
            e.key = std::string(trim(line.substr(0, eq)));
            e.value = std::string(trim(line.substr(eq + 1)));
            if (e.key.empty()) throw ConfigError(line_no, "", "empty key");
            entries.push_back(std::move(e));
        }
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    return entries;
}

double parse_double(const ConfigEntry& e, std::string_view token) {
    double v = 0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
        throw ConfigError(e.line, e.key, "expected a number, got '" + std::string(token) + "'");
    }
    return v;
}

long long parse_int(const ConfigEntry& e, std::string_view token) {
    long long v = 0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError(e.line, e.key, "expected an integer, got '" + std::string(token) + "'");
    }
    return v;
}

std::vector<double> parse_doubles(const ConfigEntry& e) {
    std::vector<double> out;
    for (const auto& tok : split_ws(e.value)) out.push_back(parse_double(e, tok));
    if (out.empty()) throw ConfigError(e.line, e.key, "expected at least one number");
    return out;
}

std::string format_double(double x) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc{}) return "nan";
    return std::string(buf.data(), ptr);
}

}  // namespace mvnet
