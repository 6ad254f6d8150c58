#pragma once

#include <cstdint>
#include <string>

namespace heisenvar {

// 17 significant digits, locale-independent
std::string fmt17(double v);

// FNV-1a 64-bit over a canonical string; stable across platforms
std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);

std::string tool_version();

// "heisenvar v<ver> config=<hash> <extra>"
std::string provenance_line(const std::string& canonical_config, const std::string& extra = "");

void write_text_file(const std::string& path, const std::string& content);

}  // namespace heisenvar
