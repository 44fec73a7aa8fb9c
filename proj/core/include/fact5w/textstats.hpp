#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fact5w::text {

/// A token plus its byte span in the original text. `begin`/`end` delimit the
/// stripped token, so `original.substr(begin, end - begin) == text`.
struct TokenSpan {
    std::string text;
    std::size_t begin = 0;
    std::size_t end = 0;

    bool operator==(const TokenSpan&) const = default;
};

/// Whitespace tokenizer with edge punctuation stripped.
///
/// Rules, fixed so every count in StatVector is testable:
///   - split on Unicode whitespace;
///   - strip punctuation codepoints from both token edges, except that a
///     leading '#' or '@' marker is kept (hashtags and mentions);
///   - interior punctuation (apostrophes, hyphens) is preserved;
///   - tokens with no non-punctuation codepoint are dropped.
std::vector<TokenSpan> tokenize_spans(std::string_view text);
std::vector<std::string> tokenize(std::string_view text);

/// Joins a multi-valued field (question list, answer list) into the single
/// text that statistics, similarities and embeddings treat as one source.
std::string join_parts(std::span<const std::string> parts);

/// The embedded, versioned English stopword list (one lowercase word per
/// entry). Matching is case-insensitive.
const std::vector<std::string>& stopword_list();
bool is_stopword(std::string_view word);

/// The 11 per-text counters, in the fixed order used by the feature layout.
struct StatVector {
    std::int64_t characters = 0;     // Unicode codepoints
    std::int64_t words = 0;          // tokens
    std::int64_t capital_chars = 0;  // uppercase letters
    std::int64_t capital_words = 0;  // tokens whose letters are all uppercase, >= 2 letters
    std::int64_t punctuation = 0;    // punctuation codepoints
    std::int64_t quoted_words = 0;   // tokens inside matched double quotes
    std::int64_t sentences = 0;      // segments ended by . ! ? or end of text
    std::int64_t unique_words = 0;   // distinct lowercased tokens
    std::int64_t hashtags = 0;       // tokens starting '#' with more after it
    std::int64_t mentions = 0;       // tokens starting '@' with more after it
    std::int64_t stopwords = 0;      // case-insensitive matches against the list

    std::array<std::int64_t, 11> as_array() const {
        return {characters, words,     capital_chars, capital_words, punctuation, quoted_words,
                sentences,  unique_words, hashtags,   mentions,      stopwords};
    }

    bool operator==(const StatVector&) const = default;
};

inline constexpr std::array<const char*, 11> kStatNames = {
    "chars",     "words",        "capital_chars", "capital_words", "punctuation", "quoted_words",
    "sentences", "unique_words", "hashtags",      "mentions",      "stopwords"};

StatVector compute_stats(std::string_view text);

} // namespace fact5w::text
