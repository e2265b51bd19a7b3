#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace socratic::text {

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

/// Strips `prefix` (ASCII case-insensitive) from the front of `s`, ignoring
/// leading whitespace. Returns `s` unchanged when the prefix is absent.
std::string_view strip_prefix_ci(std::string_view s, std::string_view prefix, bool* stripped = nullptr);

/// Counts sentences terminated by '.', '!' or '?' followed by whitespace or
/// end of text. A trailing fragment without terminal punctuation counts too.
int count_sentences(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace socratic::text
