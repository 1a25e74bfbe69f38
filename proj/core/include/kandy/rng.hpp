#ifndef KANDY_RNG_HPP
#define KANDY_RNG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <vector>

namespace kandy {

/// Deterministic random source.
///
/// Wraps mt19937_64 but implements every derived draw (bounded integers,
/// reals, gaussians, shuffles) by hand so that output streams are identical
/// across platforms and standard-library versions. The number of raw draws
/// consumed by each operation is part of the contract:
///   - index(n): zero draws when n == 1, otherwise one draw per Lemire
///     rejection round (almost always exactly one);
///   - real(): one draw;
///   - gaussian(): two draws (Box-Muller, no caching);
///   - shuffle(k items): k-1 bounded-index draws.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next() { return gen_(); }

    /// Uniform integer in [0, n). Requires n >= 1.
    size_t index(size_t n) {
        if (n <= 1) return 0;
        // Lemire's multiply-shift with rejection for exact uniformity.
        while (true) {
            uint64_t x = next();
            __uint128_t m = static_cast<__uint128_t>(x) * n;
            uint64_t lo = static_cast<uint64_t>(m);
            if (lo >= n) return static_cast<size_t>(m >> 64);
            uint64_t threshold = (0 - static_cast<uint64_t>(n)) % n;
            if (lo >= threshold) return static_cast<size_t>(m >> 64);
        }
    }

    /// Uniform integer in [lo, hi] inclusive.
    long long int_range(long long lo, long long hi) {
        return lo + static_cast<long long>(index(static_cast<size_t>(hi - lo + 1)));
    }

    /// Uniform double in [0, 1) with 53 bits of randomness.
    double real() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double range(double a, double b) { return a + (b - a) * real(); }

    bool bernoulli(double p) { return real() < p; }

    /// Zero-mean gaussian via Box-Muller; always consumes two draws.
    double gaussian(double sigma) {
        double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        double u2 = real();
        return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (size_t i = items.size(); i > 1; --i) {
            size_t j = index(i);
            if (j != i - 1) std::swap(items[i - 1], items[j]);
        }
    }

    /// Choose k distinct indices out of n, returned in ascending order.
    std::vector<size_t> sample_indices(size_t k, size_t n) {
        std::vector<size_t> pool(n);
        for (size_t i = 0; i < n; ++i) pool[i] = i;
        for (size_t i = 0; i < k; ++i) {
            size_t j = i + index(n - i);
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        std::sort(pool.begin(), pool.end());
        return pool;
    }

private:
    std::mt19937_64 gen_;
};

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a root seed and a path of
/// integers (task id, sample ordinal, stage tag, ...) via splitmix64 mixing.
inline uint64_t derive_stream(uint64_t seed, std::initializer_list<uint64_t> path) {
    uint64_t h = splitmix64(seed);
    for (uint64_t p : path) h = splitmix64(h ^ splitmix64(p));
    return h;
}

namespace stream_tag {
// Stage tags for derive_stream paths.
inline constexpr uint64_t generation = 0x67656e;   // symbol generation
inline constexpr uint64_t split = 0x73706c;        // dataset splitting
inline constexpr uint64_t materialize = 0x6d6174;  // with/without-replacement draws
inline constexpr uint64_t supervision = 0x737570;  // supervision schedule
inline constexpr uint64_t render = 0x726e64;       // per-image rendering
}  // namespace stream_tag

}  // namespace kandy

#endif
