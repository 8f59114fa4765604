#pragma once

#include <optional>
#include <string>
#include <vector>

#include "multisurf/errors.hpp"
#include "multisurf/strings.hpp"

namespace multisurf {

enum class ParseOutcome { exact, salvaged, off_class };

inline std::string_view to_string(ParseOutcome o) {
    switch (o) {
        case ParseOutcome::exact: return "exact";
        case ParseOutcome::salvaged: return "salvaged";
        case ParseOutcome::off_class: return "off_class";
    }
    return "?";
}

struct ParsedLabel {
    ParseOutcome outcome = ParseOutcome::off_class;
    std::optional<std::string> label;  // always one of class_labels when set
    std::string raw_text;

    /// Only exact answers obeyed the "Do not output any other text" rule.
    bool compliant() const { return outcome == ParseOutcome::exact; }
};

/// Map a model answer onto the class list.
///   1. trim whitespace/punctuation, case-fold, exact match  -> exact
///   2. else exactly one label occurs as a folded substring  -> salvaged
///   3. else                                                 -> off_class
inline ParsedLabel parse_class_label(const std::string& response_text,
                                     const std::vector<std::string>& class_labels) {
    if (class_labels.empty()) throw EmptyClassList();

    ParsedLabel out;
    out.raw_text = response_text;

    const std::string answer = canonical_label(response_text);
    for (const auto& label : class_labels) {
        if (!answer.empty() && answer == canonical_label(label)) {
            out.outcome = ParseOutcome::exact;
            out.label = label;
            return out;
        }
    }

    const std::string folded = casefold(response_text);
    const std::string* found = nullptr;
    for (const auto& label : class_labels) {
        const std::string needle = canonical_label(label);
        if (needle.empty()) continue;
        if (contains(folded, needle)) {
            if (found != nullptr) {  // ambiguous: more than one label mentioned
                out.outcome = ParseOutcome::off_class;
                return out;
            }
            found = &label;
        }
    }
    if (found != nullptr) {
        out.outcome = ParseOutcome::salvaged;
        out.label = *found;
    }
    return out;
}

struct ProfileFields {
    std::string equipment;
    std::string method_sentence;
    std::string usage_sentence;
    bool fallback_used = false;  // segments assigned by sentence order
    std::string raw_text;
};

/// Split a document-prompt answer into equipment / method / usage segments.
/// Labeled lines ("Equipment:", "Method:", "Usage:") win; otherwise the first
/// three sentences are taken in order and the fallback flag is set.
inline ProfileFields parse_profile_text(const std::string& response_text) {
    ProfileFields out;
    out.raw_text = response_text;

    std::optional<std::string> equipment, method, usage;
    for (const auto& raw_line : split_lines(response_text)) {
        const std::string line = trim(raw_line);
        auto tail = [&line](std::size_t prefix_len) { return trim(line.substr(prefix_len)); };
        if (starts_with_ci(line, "equipment:") && !equipment) {
            if (auto t = tail(10); !t.empty()) equipment = t;
        } else if (starts_with_ci(line, "method:") && !method) {
            if (auto t = tail(7); !t.empty()) method = t;
        } else if (starts_with_ci(line, "usage:") && !usage) {
            if (auto t = tail(6); !t.empty()) usage = t;
        }
    }
    if (equipment && method && usage) {
        out.equipment = *equipment;
        out.method_sentence = *method;
        out.usage_sentence = *usage;
        return out;
    }

    const std::vector<std::string> sentences = split_sentences(response_text);
    if (sentences.size() < 3) throw ProfileParse(response_text);
    out.equipment = sentences[0];
    out.method_sentence = sentences[1];
    out.usage_sentence = sentences[2];
    out.fallback_used = true;
    return out;
}

}  // namespace multisurf
