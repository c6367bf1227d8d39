#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace chai::text {

std::string_view trim(std::string_view s) noexcept;
std::string_view rtrim(std::string_view s) noexcept;
bool is_blank(std::string_view s) noexcept;

std::string to_lower_ascii(std::string_view s);
bool iequals(std::string_view a, std::string_view b) noexcept;
bool istarts_with(std::string_view s, std::string_view prefix) noexcept;

/// Splits on LF, dropping a CR before each LF. A trailing LF does not
/// produce an extra empty line.
std::vector<std::string_view> split_lines(std::string_view s);

/// CRLF to LF, trailing blanks stripped from every line, leading and
/// trailing blank lines removed.
std::string canonical_block(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view separator);

}  // namespace chai::text
