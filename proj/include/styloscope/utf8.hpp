#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace styloscope::utf8 {

/// Byte length of the valid UTF-8 sequence at `s[pos]`, or 0 if invalid.
inline std::size_t sequence_length(std::string_view s, std::size_t pos) {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    std::size_t len = 0;
    std::uint32_t min = 0;
    if (b0 < 0x80) return 1;
    if ((b0 & 0xE0) == 0xC0) { len = 2; min = 0x80; }
    else if ((b0 & 0xF0) == 0xE0) { len = 3; min = 0x800; }
    else if ((b0 & 0xF8) == 0xF0) { len = 4; min = 0x10000; }
    else return 0;
    if (pos + len > s.size()) return 0;
    std::uint32_t cp = b0 & (0x7F >> len);
    for (std::size_t k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[pos + k]);
        if ((b & 0xC0) != 0x80) return 0;
        cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
    return len;
}

inline bool is_valid(std::string_view s) {
    for (std::size_t i = 0; i < s.size();) {
        const std::size_t len = sequence_length(s, i);
        if (len == 0) return false;
        i += len;
    }
    return true;
}

/// Decodes the code point at `s[pos]`; `len` receives its byte length.
/// Invalid bytes decode as U+FFFD with length 1.
inline char32_t decode(std::string_view s, std::size_t pos, std::size_t& len) {
    len = sequence_length(s, pos);
    if (len == 0) {
        len = 1;
        return U'�';
    }
    const auto b0 = static_cast<unsigned char>(s[pos]);
    if (len == 1) return b0;
    char32_t cp = b0 & (0x7F >> len);
    for (std::size_t k = 1; k < len; ++k) {
        cp = (cp << 6) | (static_cast<unsigned char>(s[pos + k]) & 0x3F);
    }
    return cp;
}

inline std::size_t code_points(std::string_view s) {
    std::size_t n = 0;
    for (std::size_t i = 0, len = 0; i < s.size(); i += len) {
        decode(s, i, len);
        ++n;
    }
    return n;
}

/// Letters and digits. ASCII is classified exactly; above U+00BF everything
/// outside the common punctuation and symbol blocks counts as a word char.
inline bool is_word_char(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    }
    if (cp < 0xC0) return false;
    if (cp == 0xD7 || cp == 0xF7) return false;
    if (cp >= 0x2000 && cp <= 0x2BFF) return false;
    if (cp >= 0x3000 && cp <= 0x303F) return false;
    if (cp >= 0xFE30 && cp <= 0xFE4F) return false;
    if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
    if (cp == 0xFFFD) return false;
    return true;
}

inline bool has_word_char(std::string_view s) {
    for (std::size_t i = 0, len = 0; i < s.size(); i += len) {
        if (is_word_char(decode(s, i, len))) return true;
    }
    return false;
}

/// ASCII lower-casing; other bytes pass through.
inline std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

}  // namespace styloscope::utf8
