#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

namespace s2lpp {

/// Unicode NFC normalization. Invalid UTF-8 bytes are replaced with U+FFFD.
inline std::string nfc(std::string_view text) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) return std::string(text);
    icu::UnicodeString u = icu::UnicodeString::fromUTF8(text);
    icu::UnicodeString out = nfc->normalize(u, status);
    if (U_FAILURE(status)) return std::string(text);
    std::string result;
    out.toUTF8String(result);
    return result;
}

/// Full Unicode case folding ("Straße" -> "strasse").
inline std::string casefold(std::string_view text) {
    icu::UnicodeString u = icu::UnicodeString::fromUTF8(text);
    u.foldCase(U_FOLD_CASE_DEFAULT);
    std::string result;
    u.toUTF8String(result);
    return result;
}

/// Collapses every run of Unicode whitespace to a single ASCII space and
/// strips leading/trailing whitespace.
inline std::string collapse_whitespace(std::string_view text) {
    icu::UnicodeString u = icu::UnicodeString::fromUTF8(text);
    icu::UnicodeString out;
    bool pending_space = false;
    bool seen_content = false;
    for (int32_t i = 0; i < u.length();) {
        UChar32 c = u.char32At(i);
        i += U16_LENGTH(c);
        if (u_isUWhiteSpace(c)) {
            pending_space = seen_content;
        } else {
            if (pending_space) out.append(static_cast<UChar32>(' '));
            out.append(c);
            pending_space = false;
            seen_content = true;
        }
    }
    std::string result;
    out.toUTF8String(result);
    return result;
}

/// The fixed match-normalization pipeline used by all scoring: NFC, then
/// case folding, then whitespace collapse. Punctuation is left untouched.
inline std::string normalize_for_match(std::string_view text) {
    return collapse_whitespace(casefold(nfc(text)));
}

inline std::string trim(std::string_view s) {
    const char* ws = " \t\r\n\f\v";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return "";
    auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.emplace_back(text.substr(start));
            break;
        }
        std::string_view line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(line);
        start = nl + 1;
    }
    return lines;
}

inline bool is_word_char(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '\'';
}

/// Position of the first occurrence of `token` in `text` that sits on word
/// boundaries (so "correct" does not match inside "incorrect", and "no" does
/// not match inside "know"). Returns npos when absent.
inline std::size_t find_word(std::string_view text, std::string_view token) {
    std::size_t pos = 0;
    while ((pos = text.find(token, pos)) != std::string_view::npos) {
        bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
        std::size_t end = pos + token.size();
        bool right_ok = end >= text.size() || !is_word_char(text[end]);
        // A token beginning/ending in an apostrophe ("doesn't") still needs
        // alphanumeric boundaries outside it.
        if (left_ok && right_ok) return pos;
        ++pos;
    }
    return std::string_view::npos;
}

}  // namespace s2lpp
