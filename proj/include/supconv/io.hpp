#pragma once

// Deterministic text formatting for CSV outputs: shortest round-trip doubles
// via std::to_chars, locale-independent, '.' decimal separator.

#include <charconv>
#include <initializer_list>
#include <ostream>
#include <string>
#include <system_error>

namespace supconv {

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline void write_csv_row(std::ostream& os, std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
        if (!first) os << ',';
        os << format_double(v);
        first = false;
    }
    os << '\n';
}

} // namespace supconv
