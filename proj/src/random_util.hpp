#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace cotcurate::detail {

// mt19937_64's output sequence is fixed by the standard, but the std distributions and
// std::shuffle are not; these helpers keep seeded draws identical across toolchains.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t v = rng();
        if (v >= threshold) return v % n;
    }
}

template <typename T>
void portable_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_below(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace cotcurate::detail
