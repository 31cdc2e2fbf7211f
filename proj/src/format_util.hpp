#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace skelsign {

// Shortest decimal form that round-trips the exact double; keeps every file
// we write byte-deterministic.
inline std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

}  // namespace skelsign
