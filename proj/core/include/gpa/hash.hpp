#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace gpa {

// FNV-1a, 64-bit. Stable across platforms, which matters for replay
// fixtures keyed by prompt digest.
constexpr std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value);

}  // namespace gpa
