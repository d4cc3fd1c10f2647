#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "rdd/common.hpp"

namespace rdd::csv {

// Splits one CSV line on commas. Quoting is not supported; none of our files need it.
inline void split(std::string_view line, std::vector<std::string_view>& fields) {
    fields.clear();
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

template <class T>
T parse(std::string_view s, std::string_view what) {
    T value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw Error("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
    return value;
}

inline void append_fixed(std::string& out, double v, int decimals) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
    out.append(buf, ptr);
}

// Shortest representation that parses back to the same double.
inline void append_exact(std::string& out, double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
}

template <class I>
void append_int(std::string& out, I v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
}

}  // namespace rdd::csv
