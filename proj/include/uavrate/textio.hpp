#pragma once

#include <cstdio>
#include <string>

namespace uvr {

// Fixed-width scientific form, 17 significant digits. Round-trips exactly and
// keeps serialized files byte-stable across runs.
inline std::string fmt_sci17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

// Shortest form that still round-trips; used for CSV cells.
inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace uvr
