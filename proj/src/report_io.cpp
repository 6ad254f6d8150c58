#include "heisenvar/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace heisenvar {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string tool_version() { return "0.1.0"; }

std::string provenance_line(const std::string& canonical_config, const std::string& extra) {
    std::string line = "heisenvar v" + tool_version() + " config=" + hex64(fnv1a64(canonical_config));
    if (!extra.empty()) line += " " + extra;
    return line;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("write_text_file: cannot open " + path);
    os << content;
    if (!os) throw std::runtime_error("write_text_file: write failure for " + path);
}

}  // namespace heisenvar
