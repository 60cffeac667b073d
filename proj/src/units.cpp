#include "gridflow/units.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "gridflow/errors.hpp"

namespace gridflow::units {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void bad_value(const std::string& key, std::string_view text, const char* expected) {
    raise(Errc::syntax_error, "key '" + key + "': cannot read '" + std::string(text) +
                                  "' as " + expected);
}

/// Splits "<number><suffix>" and returns the number; suffix out-param may be empty.
double split_number(std::string_view text, const std::string& key, const char* expected,
                    std::string& suffix) {
    const std::string_view t = trim(text);
    if (t.empty()) bad_value(key, text, expected);
    const std::string owned(t);
    errno = 0;
    char* end = nullptr;
    const double value = std::strtod(owned.c_str(), &end);
    if (end == owned.c_str() || errno == ERANGE || !std::isfinite(value))
        bad_value(key, text, expected);
    suffix = std::string(trim(std::string_view(end)));
    return value;
}

double scaled(std::string_view text, const std::string& key, const char* expected,
              std::initializer_list<std::pair<const char*, double>> suffixes,
              double bare_scale) {
    std::string suffix;
    const double value = split_number(text, key, expected, suffix);
    if (suffix.empty()) return value * bare_scale;
    for (const auto& [name, scale] : suffixes)
        if (suffix == name) return value * scale;
    bad_value(key, text, expected);
}

} // namespace

double parse_bytes(std::string_view text, const std::string& key) {
    return scaled(text, key, "a byte quantity (B/kB/MB/GB/TB)",
                  {{"B", 1.0},
                   {"kB", 1e3},
                   {"KB", 1e3},
                   {"MB", 1e6},
                   {"GB", 1e9},
                   {"TB", 1e12}},
                  1.0);
}

double parse_rate(std::string_view text, const std::string& key) {
    return scaled(text, key, "a data rate (B/s, kB/s, MB/s, GB/s)",
                  {{"B/s", 1.0},
                   {"kB/s", 1e3},
                   {"KB/s", 1e3},
                   {"MB/s", 1e6},
                   {"GB/s", 1e9}},
                  1.0);
}

double parse_capacity(std::string_view text, const std::string& key) {
    return scaled(text, key, "a link capacity (Gbps, Mbps, or B/s forms)",
                  {{"bps", 1.25e-1},
                   {"kbps", 1.25e2},
                   {"Mbps", 1.25e5},
                   {"Gbps", 1.25e8},
                   {"B/s", 1.0},
                   {"kB/s", 1e3},
                   {"MB/s", 1e6},
                   {"GB/s", 1e9}},
                  1.0);
}

double parse_seconds(std::string_view text, const std::string& key) {
    return scaled(text, key, "a duration (ms, s, min, h)",
                  {{"ms", 1e-3}, {"s", 1.0}, {"min", 60.0}, {"h", 3600.0}},
                  1.0);
}

double parse_millis(std::string_view text, const std::string& key) {
    return scaled(text, key, "a latency (ms, s)", {{"ms", 1.0}, {"s", 1e3}}, 1.0);
}

double parse_real(std::string_view text, const std::string& key) {
    std::string suffix;
    const double value = split_number(text, key, "a number", suffix);
    if (!suffix.empty()) bad_value(key, text, "a plain number");
    return value;
}

long long parse_integer(std::string_view text, const std::string& key) {
    const double value = parse_real(text, key);
    const long long as_int = static_cast<long long>(value);
    if (static_cast<double>(as_int) != value) bad_value(key, text, "an integer");
    return as_int;
}

bool parse_bool(std::string_view text, const std::string& key) {
    const std::string_view t = trim(text);
    if (t == "true" || t == "on" || t == "yes") return true;
    if (t == "false" || t == "off" || t == "no") return false;
    bad_value(key, text, "a boolean (true/false/on/off)");
}

std::string format_double(double value) {
    char buf[40];
    // Exact integers up to 2^53 print without an exponent: "86400", not "8.64e+04".
    if (value == std::floor(value) && std::fabs(value) < 9.007199254740992e15) {
        std::snprintf(buf, sizeof buf, "%.0f", value);
        if (std::strtod(buf, nullptr) == value) return buf;
    }
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, value);
        if (std::strtod(buf, nullptr) == value) break;
    }
    return buf;
}

} // namespace gridflow::units
