#pragma once

#include <string>
#include <string_view>

namespace gridflow::units {

// Decimal units throughout: 1 kB = 1e3 B, 1 Gbps = 1e9 bit/s = 1.25e8 B/s.
inline constexpr double bytes_per_second_per_gbps = 1.25e8;

/// "2GB", "8MB", "1500", "2.2e9" -> bytes. Bare numbers are bytes.
double parse_bytes(std::string_view text, const std::string& key);

/// "200MB/s", "1.25e8" -> bytes per second. Bare numbers are B/s.
double parse_rate(std::string_view text, const std::string& key);

/// "10Gbps", "400Mbps", "312.5MB/s", "1.25e9" -> bytes per second.
double parse_capacity(std::string_view text, const std::string& key);

/// "24h", "90min", "300", "250ms" -> seconds. Bare numbers are seconds.
double parse_seconds(std::string_view text, const std::string& key);

/// "20ms", "0.12s", "120" -> milliseconds. Bare numbers are milliseconds.
double parse_millis(std::string_view text, const std::string& key);

double parse_real(std::string_view text, const std::string& key);
long long parse_integer(std::string_view text, const std::string& key);
bool parse_bool(std::string_view text, const std::string& key);

/// Shortest decimal form that round-trips a double exactly.
std::string format_double(double value);

} // namespace gridflow::units
