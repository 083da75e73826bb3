#pragma once

#include <charconv>
#include <string>
#include <string_view>

#include "srl/errors.hpp"

namespace srl {

// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Fixed decimals, for compact deterministic coordinates.
inline std::string format_fixed(double v, int digits) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, digits);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& context) {
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ParseError(context + ": bad number '" + std::string(text) + "'");
    }
    return v;
}

inline long long parse_int(std::string_view text, const std::string& context) {
    long long v = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ParseError(context + ": bad integer '" + std::string(text) + "'");
    }
    return v;
}

}  // namespace srl
