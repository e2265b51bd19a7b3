#include "socratic/text.hpp"

#include <cctype>

namespace socratic::text {

namespace {
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }
}  // namespace

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && to_lower_ascii(a) == to_lower_ascii(b);
}

std::string_view strip_prefix_ci(std::string_view s, std::string_view prefix, bool* stripped) {
    std::string_view body = s;
    while (!body.empty() && is_space(body.front())) body.remove_prefix(1);
    const bool match = body.size() >= prefix.size() && iequals(body.substr(0, prefix.size()), prefix);
    if (stripped != nullptr) *stripped = match;
    return match ? body.substr(prefix.size()) : s;
}

int count_sentences(std::string_view s) {
    s = trim(s);
    int count = 0;
    bool in_sentence = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (is_terminal(c)) {
            // collapse runs such as "?!" or "..."
            while (i + 1 < s.size() && is_terminal(s[i + 1])) ++i;
            if (i + 1 == s.size() || is_space(s[i + 1])) {
                if (in_sentence) ++count;
                in_sentence = false;
            }
        } else if (!is_space(c)) {
            in_sentence = true;
        }
    }
    return in_sentence ? count + 1 : count;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i != 0) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace socratic::text
