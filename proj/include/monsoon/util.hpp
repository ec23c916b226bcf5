#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace monsoon {

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);
// write to <path>.tmp then rename, so readers never see partial content
void write_file_atomic(const std::string& path, std::string_view content);

std::string iso_timestamp_utc();

// shortest decimal representation that round-trips the double exactly
std::string format_double(double v);

std::vector<std::string> split_string(std::string_view s, char sep);
std::optional<double> parse_double(std::string_view s);
std::optional<long> parse_long(std::string_view s);

}  // namespace monsoon
