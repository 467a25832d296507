#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace pqlap {

inline constexpr const char* kVersion = "0.3.1";

/// Shortest round-trip decimal; integral values keep a trailing ".0".
std::string fmt_num(double v);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

/// "# pqlap <version> config_hash=<hash>" followed by a newline.
std::string file_header(const std::string& config_hash);

}  // namespace pqlap
