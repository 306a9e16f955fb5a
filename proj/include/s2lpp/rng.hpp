#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace s2lpp {

/// Unbiased draw from [0, n) via rejection sampling. std::uniform_int_distribution
/// is implementation-defined, so seeded runs would not reproduce across
/// standard libraries; this does.
inline std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = gen();
    } while (v >= limit);
    return v % n;
}

/// k distinct indices from [0, n), in draw order (partial Fisher-Yates).
inline std::vector<std::size_t> sample_distinct_indices(std::mt19937_64& gen, std::size_t n,
                                                        std::size_t k) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> picked;
    picked.reserve(k);
    for (std::size_t i = 0; i < k && i < n; ++i) {
        std::size_t j = i + static_cast<std::size_t>(uniform_below(gen, n - i));
        std::swap(pool[i], pool[j]);
        picked.push_back(pool[i]);
    }
    return picked;
}

}  // namespace s2lpp
