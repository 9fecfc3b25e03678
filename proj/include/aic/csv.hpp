#pragma once

#include <charconv>
#include <string>

namespace aic::detail {

// Shortest round-trippable decimal form, locale-independent.
inline void append_double(std::string& out, double v) {
    char buf[48];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    out.append(buf, r.ptr);
}

inline std::string format_double(double v) {
    std::string s;
    append_double(s, v);
    return s;
}

} // namespace aic::detail
