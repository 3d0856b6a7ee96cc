#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace taskguard {

// Seeded RNG with hand-rolled bounded draws. std::uniform_int_distribution is
// implementation-defined, which would break byte-identical corpus output across
// toolchains; mt19937_64 itself is pinned by the standard.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, n). Modulo bias is negligible for the small n used here
    // and, more importantly, the algorithm is fixed.
    std::uint64_t below(std::uint64_t n) { return n ? engine_() % n : 0; }

    int range(int lo, int hi) {  // inclusive ends
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    double unit() {  // [0, 1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    bool chance(double p) { return unit() < p; }

    template <typename T>
    const T& pick(const std::vector<T>& pool) {
        return pool[static_cast<std::size_t>(below(pool.size()))];
    }

    // First k slots of a Fisher-Yates pass; deterministic subsample helper.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
};

inline std::vector<std::size_t> SeededRng::sample_indices(std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    if (k > n) k = n;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace taskguard
