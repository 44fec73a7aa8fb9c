#include "fact5w/textstats.hpp"

#include <unordered_set>

#include "fact5w/stopwords_data.hpp"
#include "fact5w/unicode.hpp"

namespace fact5w::text {

namespace {

struct Codepoint {
    char32_t cp;
    std::size_t begin; // byte offset
    std::size_t end;
};

std::vector<Codepoint> decode_positions(std::string_view text) {
    std::vector<Codepoint> cps;
    cps.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const std::size_t begin = i;
        const char32_t cp = decode_utf8(text, i);
        cps.push_back({cp, begin, i});
    }
    return cps;
}

bool keeps_leading_marker(char32_t cp) { return cp == U'#' || cp == U'@'; }

} // namespace

std::vector<TokenSpan> tokenize_spans(std::string_view text) {
    const std::vector<Codepoint> cps = decode_positions(text);
    std::vector<TokenSpan> tokens;
    std::size_t i = 0;
    const std::size_t n = cps.size();
    while (i < n) {
        while (i < n && is_space(cps[i].cp)) {
            ++i;
        }
        if (i >= n) {
            break;
        }
        std::size_t j = i;
        while (j < n && !is_space(cps[j].cp)) {
            ++j;
        }
        // Raw token is cps[i, j). Strip edge punctuation.
        std::size_t lo = i;
        std::size_t hi = j; // exclusive
        if (lo < hi && keeps_leading_marker(cps[lo].cp) && hi - lo >= 2 && !is_punct(cps[lo + 1].cp)) {
            // Keep the marker; strip nothing from the front.
        } else {
            while (lo < hi && is_punct(cps[lo].cp) && !keeps_leading_marker(cps[lo].cp)) {
                ++lo;
            }
            if (lo < hi && keeps_leading_marker(cps[lo].cp) && (hi - lo < 2 || is_punct(cps[lo + 1].cp))) {
                ++lo; // lone '#'/'@' or marker followed by punctuation: plain punctuation
            }
        }
        while (hi > lo && is_punct(cps[hi - 1].cp)) {
            --hi;
        }
        // Hashtag/mention markers at the very end survive the trailing strip
        // only as part of a larger token, which the loop above handles.
        bool has_content = false;
        for (std::size_t k = lo; k < hi; ++k) {
            if (!is_punct(cps[k].cp)) {
                has_content = true;
                break;
            }
        }
        if (lo < hi && has_content) {
            TokenSpan tok;
            tok.begin = cps[lo].begin;
            tok.end = cps[hi - 1].end;
            tok.text = std::string(text.substr(tok.begin, tok.end - tok.begin));
            tokens.push_back(std::move(tok));
        }
        i = j;
    }
    return tokens;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    for (TokenSpan& tok : tokenize_spans(text)) {
        out.push_back(std::move(tok.text));
    }
    return out;
}

std::string join_parts(std::span<const std::string> parts) {
    std::string joined;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) {
            joined += " | ";
        }
        joined += parts[i];
    }
    return joined;
}

const std::vector<std::string>& stopword_list() {
    static const std::vector<std::string> words = [] {
        std::vector<std::string> list;
        std::string_view data = detail::kStopwordsData;
        std::size_t start = 0;
        while (start <= data.size()) {
            std::size_t nl = data.find('\n', start);
            std::string_view line =
                nl == std::string_view::npos ? data.substr(start) : data.substr(start, nl - start);
            if (!line.empty() && line.front() != '#') {
                list.emplace_back(line);
            }
            if (nl == std::string_view::npos) {
                break;
            }
            start = nl + 1;
        }
        return list;
    }();
    return words;
}

bool is_stopword(std::string_view word) {
    static const std::unordered_set<std::string> set(stopword_list().begin(), stopword_list().end());
    return set.count(lower_copy(word)) > 0;
}

namespace {

/// Byte ranges lying inside matched double-quote pairs. Straight quotes pair
/// up greedily left to right; curly quotes pair a left mark with the next
/// right mark. Unmatched openers are ignored.
std::vector<std::pair<std::size_t, std::size_t>> quoted_regions(const std::vector<Codepoint>& cps) {
    std::vector<std::pair<std::size_t, std::size_t>> regions;
    std::size_t open_straight = SIZE_MAX;
    std::size_t open_curly = SIZE_MAX;
    for (const Codepoint& c : cps) {
        if (c.cp == U'"') {
            if (open_straight == SIZE_MAX) {
                open_straight = c.end;
            } else {
                regions.emplace_back(open_straight, c.begin);
                open_straight = SIZE_MAX;
            }
        } else if (c.cp == 0x201C) { // left curly quote
            open_curly = c.end;
        } else if (c.cp == 0x201D) { // right curly quote
            if (open_curly != SIZE_MAX) {
                regions.emplace_back(open_curly, c.begin);
                open_curly = SIZE_MAX;
            }
        }
    }
    return regions;
}

} // namespace

StatVector compute_stats(std::string_view text) {
    StatVector stats;
    const std::vector<Codepoint> cps = decode_positions(text);

    bool segment_has_content = false;
    for (const Codepoint& c : cps) {
        stats.characters += 1;
        if (is_upper(c.cp)) {
            stats.capital_chars += 1;
        }
        if (is_punct(c.cp)) {
            stats.punctuation += 1;
        }
        // Sentence segmentation: a run of terminators closes one segment.
        if (c.cp == U'.' || c.cp == U'!' || c.cp == U'?') {
            if (segment_has_content) {
                stats.sentences += 1;
                segment_has_content = false;
            }
        } else if (!is_space(c.cp)) {
            segment_has_content = true;
        }
    }
    if (segment_has_content) {
        stats.sentences += 1; // trailing segment closed by end of text
    }
    if (!text.empty() && stats.sentences == 0) {
        stats.sentences = 1;
    }

    const std::vector<TokenSpan> tokens = tokenize_spans(text);
    stats.words = static_cast<std::int64_t>(tokens.size());

    std::unordered_set<std::string> unique;
    for (const TokenSpan& tok : tokens) {
        unique.insert(lower_copy(tok.text));
        if (is_stopword(tok.text)) {
            stats.stopwords += 1;
        }
        if (tok.text.size() >= 2 && tok.text[0] == '#') {
            stats.hashtags += 1;
        }
        if (tok.text.size() >= 2 && tok.text[0] == '@') {
            stats.mentions += 1;
        }
        int letters = 0;
        bool all_upper = true;
        std::size_t i = 0;
        while (i < tok.text.size()) {
            const char32_t cp = decode_utf8(tok.text, i);
            if (is_alpha(cp)) {
                ++letters;
                if (!is_upper(cp)) {
                    all_upper = false;
                }
            }
        }
        if (letters >= 2 && all_upper) {
            stats.capital_words += 1;
        }
    }
    stats.unique_words = static_cast<std::int64_t>(unique.size());

    const auto regions = quoted_regions(cps);
    for (const TokenSpan& tok : tokens) {
        for (const auto& [lo, hi] : regions) {
            if (tok.begin >= lo && tok.end <= hi) {
                stats.quoted_words += 1;
                break;
            }
        }
    }
    return stats;
}

} // namespace fact5w::text
