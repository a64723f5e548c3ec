#ifndef PVRISK_IO_HPP
#define PVRISK_IO_HPP

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "pvrisk/errors.hpp"

namespace pvrisk {

/// Decimal form with enough digits to round-trip a double exactly.
inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// 9 significant digits, for exported field tables.
inline std::string format_sig9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == sep) {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline bool parse_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size();
}

/// Days since 1970-01-01 for a proleptic Gregorian date (civil-days algorithm).
inline long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

/// Parses strict "YYYY-MM-DD"; returns false on malformed or out-of-range.
inline bool parse_date(const std::string& s, long& serial_day) {
    const std::string t = trim(s);
    if (t.size() != 10 || t[4] != '-' || t[7] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
    const int y = std::atoi(t.substr(0, 4).c_str());
    const int m = std::atoi(t.substr(5, 2).c_str());
    const int d = std::atoi(t.substr(8, 2).c_str());
    if (m < 1 || m > 12 || d < 1 || d > 31) return false;
    serial_day = days_from_civil(y, m, d);
    return true;
}

} // namespace pvrisk

#endif
