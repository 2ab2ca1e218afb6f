#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace padlab {

// FNV-1a over bytes; stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view bytes);

// Hash formatted as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);

}  // namespace padlab
