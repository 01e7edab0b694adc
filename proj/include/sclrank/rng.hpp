#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace sclrank {

/// Seeded generator whose draws are identical across standard libraries.
///
/// std::mt19937_64 output is fully specified by the standard, but the
/// distributions and std::shuffle are not, so bounded draws and shuffles are
/// implemented here on top of the raw engine.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    /// Seed derived from a base seed and a stream coordinate (epoch, batch, ...).
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream)
    {
        // splitmix64 finalizer over the combined words
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t uniform_index(std::size_t n)
    {
        auto const bound = static_cast<std::uint64_t>(n);
        // reject the top partial block so every residue is equally likely
        std::uint64_t const limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
        std::uint64_t x = 0;
        do {
            x = engine_();
        } while (x > limit);
        return static_cast<std::size_t>(x % bound);
    }

    /// Uniform real in [0, 1) with 53 random bits.
    double uniform_real() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform_real(); }

    template <typename T>
    void shuffle(std::span<T> items)
    {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[uniform_index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace sclrank
