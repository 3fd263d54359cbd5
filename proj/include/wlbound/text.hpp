#pragma once

#include <charconv>
#include <filesystem>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "wlbound/error.hpp"

// Small line/token helpers for the text formats (TU files, pattern files, CSV).
namespace wlbound::text {

std::vector<std::string_view> lines(std::string_view text);
std::string_view trim(std::string_view s);
std::string_view strip_comment(std::string_view line, char marker);
std::vector<std::string_view> split_ws(std::string_view line);
std::vector<std::string_view> split(std::string_view line, char sep);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

template <typename Int>
Int parse_int(std::string_view token, std::size_t line_no) {
    token = trim(token);
    Int value{};
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || token.empty()) {
        throw DataError("expected an integer but found '" + std::string(token) + "' on line " +
                        std::to_string(line_no));
    }
    return value;
}

double parse_double(std::string_view token, std::size_t line_no);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

}  // namespace wlbound::text
