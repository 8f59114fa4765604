#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace multisurf {

inline bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
inline bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

/// ASCII case-fold. Class labels and model answers are ASCII in this domain.
inline std::string casefold(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

/// Strip whitespace and punctuation from both ends.
inline std::string trim_edges(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (is_space(s[b]) || is_punct(s[b]))) ++b;
    while (e > b && (is_space(s[e - 1]) || is_punct(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

/// Canonical form used when comparing model answers to class labels.
inline std::string canonical_label(std::string_view s) { return casefold(trim_edges(s)); }

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

inline bool contains(std::string_view hay, std::string_view needle) {
    return hay.find(needle) != std::string_view::npos;
}

inline bool starts_with_ci(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[i])) !=
            std::tolower(static_cast<unsigned char>(prefix[i])))
            return false;
    }
    return true;
}

inline std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.emplace_back(text.substr(start));
            break;
        }
        std::string line(text.substr(start, nl - start));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        start = nl + 1;
    }
    return lines;
}

/// Plain comma split; the radar CSV interface has no quoting rules.
inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.emplace_back(line.substr(start));
            break;
        }
        cells.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

/// Split prose into sentences at ./!/? boundaries, dropping empties.
inline std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        cur += c;
        if (c == '.' || c == '!' || c == '?') {
            std::string t = trim(cur);
            if (!t.empty() && t != "." && t != "!" && t != "?") out.push_back(std::move(t));
            cur.clear();
        }
    }
    std::string tail = trim(cur);
    if (!tail.empty()) out.push_back(std::move(tail));
    return out;
}

/// Fixed-point decimal format, e.g. format_fixed(10.0/11, 4) == "0.9091".
inline std::string format_fixed(double x, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, x);
    return buf;
}

/// Signed fixed-point format, e.g. "+23.33".
inline std::string format_signed(double x, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%+.*f", decimals, x);
    return buf;
}

}  // namespace multisurf
