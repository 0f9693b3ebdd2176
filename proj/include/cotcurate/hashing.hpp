#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cotcurate {

// 64-bit FNV-1a. Used for manifest fingerprints and per-record seed derivation, never for security.
class Fnv1a64 {
public:
    Fnv1a64& update(std::string_view bytes) noexcept {
        for (unsigned char c : bytes) {
            state_ ^= c;
            state_ *= 0x100000001b3ULL;
        }
        return *this;
    }
    std::uint64_t value() const noexcept { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t fnv1a64(std::string_view bytes) noexcept { return Fnv1a64{}.update(bytes).value(); }

std::string to_hex(std::uint64_t value);

}  // namespace cotcurate
