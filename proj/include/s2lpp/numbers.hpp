#pragma once

#include <cctype>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>

namespace s2lpp {

/// Exact rational value, used for arithmetic gold answers so that "1,000",
/// "1000" and "1000.0" all compare equal without floating-point surprises.
struct ExactNumber {
    long long num = 0;
    long long den = 1;  // always > 0, gcd(num, den) == 1

    static ExactNumber from_parts(long long n, long long d) {
        ExactNumber r{n, d};
        if (r.den < 0) {
            r.num = -r.num;
            r.den = -r.den;
        }
        long long g = std::gcd(r.num < 0 ? -r.num : r.num, r.den);
        if (g > 1) {
            r.num /= g;
            r.den /= g;
        }
        return r;
    }

    bool operator==(const ExactNumber& o) const {
        return static_cast<__int128>(num) * o.den == static_cast<__int128>(o.num) * den;
    }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

    std::string to_string() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }
};

/// Parses a plain decimal token ("-12", "1,000", "3.25"). Commas between
/// digits are digit-group separators and are dropped. Returns nullopt on
/// anything else (including overflow).
inline std::optional<ExactNumber> parse_number(std::string_view token) {
    if (token.empty()) return std::nullopt;
    std::size_t i = 0;
    bool negative = false;
    if (token[i] == '+' || token[i] == '-') {
        negative = token[i] == '-';
        ++i;
    }
    if (i >= token.size() || !std::isdigit(static_cast<unsigned char>(token[i])))
        return std::nullopt;

    long long mantissa = 0;
    long long den = 1;
    bool seen_point = false;
    bool any_digit = false;
    for (; i < token.size(); ++i) {
        char c = token[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            if (mantissa > (INT64_MAX - 9) / 10) return std::nullopt;
            mantissa = mantissa * 10 + (c - '0');
            if (seen_point) {
                if (den > INT64_MAX / 10) return std::nullopt;
                den *= 10;
            }
            any_digit = true;
        } else if (c == ',' && !seen_point) {
            if (i + 1 >= token.size() || !std::isdigit(static_cast<unsigned char>(token[i + 1])))
                return std::nullopt;
        } else if (c == '.' && !seen_point) {
            if (i + 1 >= token.size() || !std::isdigit(static_cast<unsigned char>(token[i + 1])))
                return std::nullopt;
            seen_point = true;
        } else {
            return std::nullopt;
        }
    }
    if (!any_digit) return std::nullopt;
    return ExactNumber::from_parts(negative ? -mantissa : mantissa, den);
}

namespace detail {

// Longest number token starting at `pos`: digits with comma groups and at
// most one decimal point, each of which must be followed by a digit. A
// trailing "." or "," is punctuation, not part of the number.
inline std::size_t number_token_end(std::string_view text, std::size_t pos) {
    std::size_t i = pos;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) ++i;
    bool seen_point = false;
    std::size_t end = i;
    while (i < text.size()) {
        char c = text[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            end = ++i;
        } else if ((c == ',' || (c == '.' && !seen_point)) && i + 1 < text.size() &&
                   std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
            if (c == '.') seen_point = true;
            ++i;
        } else {
            break;
        }
    }
    return end;
}

}  // namespace detail

/// The last number appearing in `text`, with digit-group commas stripped and
/// trailing punctuation ignored ("...costs 1,000 dollars." -> 1000).
inline std::optional<ExactNumber> last_number_in(std::string_view text) {
    std::optional<ExactNumber> last;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        bool starts_number =
            std::isdigit(static_cast<unsigned char>(c)) ||
            ((c == '+' || c == '-') && i + 1 < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[i + 1])) &&
             (i == 0 || !std::isdigit(static_cast<unsigned char>(text[i - 1]))));
        if (starts_number) {
            std::size_t end = detail::number_token_end(text, i);
            if (end > i) {
                if (auto n = parse_number(text.substr(i, end - i))) last = n;
                i = end;
                continue;
            }
        }
        ++i;
    }
    return last;
}

/// The first unsigned integer appearing in `text` ("best is paragraph 4" -> 4).
inline std::optional<long long> first_integer_in(std::string_view text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(text[i]))) {
            long long v = 0;
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
                if (v > (INT64_MAX - 9) / 10) return std::nullopt;
                v = v * 10 + (text[i] - '0');
                ++i;
            }
            return v;
        }
    }
    return std::nullopt;
}

}  // namespace s2lpp
