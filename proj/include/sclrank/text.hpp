#pragma once

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sclrank {

struct Sentence {
    std::size_t index = 0;        ///< position within the owning document
    std::size_t source_index = 0; ///< position within the document it was extracted from
    std::string text;
    std::vector<std::string> tokens;

    friend bool operator==(Sentence const&, Sentence const&) = default;
};

/// Lowercase ASCII alphanumeric runs; every other byte is a separator.
inline std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        auto const u = static_cast<unsigned char>(c);
        if (u < 0x80 && std::isalnum(u)) {
            current.push_back(static_cast<char>(std::tolower(u)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

/// Collapse whitespace runs to a single space and trim both ends.
inline std::string normalize_whitespace(std::string_view text)
{
    std::string out;
    bool pending_space = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
        } else {
            if (pending_space) {
                out.push_back(' ');
                pending_space = false;
            }
            out.push_back(c);
        }
    }
    return out;
}

namespace detail {

inline bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

inline bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

} // namespace detail

/// Rule-based splitter: a sentence ends at a run of '.', '!' or '?' (plus any
/// closing quotes or brackets abutting it) that is followed by whitespace or
/// the end of the text. Sentence texts are whitespace-normalized.
inline std::vector<Sentence> split_sentences(std::string_view text)
{
    std::vector<Sentence> sentences;
    auto emit = [&](std::string_view piece) {
        auto normalized = normalize_whitespace(piece);
        if (normalized.empty()) {
            return;
        }
        Sentence s;
        s.index = sentences.size();
        s.source_index = s.index;
        s.tokens = tokenize(normalized);
        s.text = std::move(normalized);
        sentences.push_back(std::move(s));
    };

    std::size_t start = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!detail::is_terminal(text[i])) {
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end < text.size() && detail::is_terminal(text[end])) {
            ++end;
        }
        while (end < text.size() && detail::is_closer(text[end])) {
            ++end;
        }
        if (end == text.size() || std::isspace(static_cast<unsigned char>(text[end]))) {
            emit(text.substr(start, end - start));
            start = end;
        }
        i = end;
    }
    emit(text.substr(start));
    return sentences;
}

} // namespace sclrank
