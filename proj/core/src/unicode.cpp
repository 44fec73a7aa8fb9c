#include "fact5w/unicode.hpp"

namespace fact5w::text {

char32_t decode_utf8(std::string_view s, std::size_t& i) {
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    const unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }

    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return kReplacementChar;
    }
    if (i + static_cast<std::size_t>(len) > s.size()) {
        ++i;
        return kReplacementChar;
    }
    for (int k = 1; k < len; ++k) {
        const unsigned char bk = byte(i + static_cast<std::size_t>(k));
        if ((bk & 0xC0) != 0x80) {
            ++i;
            return kReplacementChar;
        }
        cp = (cp << 6) | (bk & 0x3F);
    }
    // Reject overlong encodings and surrogates.
    const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ++i;
        return kReplacementChar;
    }
    i += static_cast<std::size_t>(len);
    return cp;
}

std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        out.push_back(decode_utf8(s, i));
    }
    return out;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_space(char32_t cp) {
    switch (cp) {
        case U' ':
        case U'\t':
        case U'\n':
        case U'\v':
        case U'\f':
        case U'\r':
        case 0x85:   // NEL
        case 0xA0:   // NBSP
        case 0x1680: // ogham space
        case 0x2028: // line separator
        case 0x2029: // paragraph separator
        case 0x202F: // narrow NBSP
        case 0x205F: // math space
        case 0x3000: // ideographic space
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

bool is_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

bool is_punct(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) || (cp >= 0x5B && cp <= 0x60) ||
               (cp >= 0x7B && cp <= 0x7E);
    }
    switch (cp) {
        case 0xA1: // inverted exclamation
        case 0xA7: // section sign
        case 0xAB: // left guillemet
        case 0xB6: // pilcrow
        case 0xB7: // middle dot
        case 0xBB: // right guillemet
        case 0xBF: // inverted question mark
        case 0x3001: // ideographic comma
        case 0x3002: // ideographic full stop
            return true;
        default:
            break;
    }
    // General Punctuation block: dashes, curly quotes, daggers, bullet,
    // ellipsis (2010-2027) and permille, primes, single guillemets (2030-205E).
    if ((cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E)) {
        return true;
    }
    // Fullwidth ASCII punctuation.
    if ((cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF1F)) {
        return true;
    }
    return false;
}

bool is_upper(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') {
        return true;
    }
    if ((cp >= 0xC0 && cp <= 0xD6) || (cp >= 0xD8 && cp <= 0xDE)) {
        return true; // Latin-1 capitals, multiplication sign excluded
    }
    if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) {
        return true; // Greek capitals
    }
    if (cp >= 0x400 && cp <= 0x42F) {
        return true; // Cyrillic capitals
    }
    return false;
}

bool is_lower(char32_t cp) {
    if (cp >= U'a' && cp <= U'z') {
        return true;
    }
    if ((cp >= 0xDF && cp <= 0xF6) || (cp >= 0xF8 && cp <= 0xFF)) {
        return true;
    }
    if ((cp >= 0x3B1 && cp <= 0x3C9) || (cp >= 0x3AC && cp <= 0x3AF)) {
        return true;
    }
    if (cp >= 0x430 && cp <= 0x45F) {
        return true;
    }
    return false;
}

bool is_alpha(char32_t cp) {
    if (is_upper(cp) || is_lower(cp)) {
        return true;
    }
    // Latin Extended-A/B: alphabetic, case left unclassified.
    return cp >= 0x100 && cp <= 0x24F;
}

char32_t to_lower(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') {
        return cp + 32;
    }
    if ((cp >= 0xC0 && cp <= 0xD6) || (cp >= 0xD8 && cp <= 0xDE)) {
        return cp + 32;
    }
    if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) {
        return cp + 32;
    }
    if (cp >= 0x410 && cp <= 0x42F) {
        return cp + 32;
    }
    if (cp >= 0x400 && cp <= 0x40F) {
        return cp + 80;
    }
    return cp;
}

std::string lower_copy(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        append_utf8(out, to_lower(decode_utf8(s, i)));
    }
    return out;
}

std::size_t codepoint_count(std::string_view s) {
    std::size_t n = 0;
    std::size_t i = 0;
    while (i < s.size()) {
        decode_utf8(s, i);
        ++n;
    }
    return n;
}

} // namespace fact5w::text
