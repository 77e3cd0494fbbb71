#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace context_drift {

/// SplitMix64 (Steele, Lea & Flood). Used to expand a 64-bit seed into
/// generator state and to derive independent stream seeds.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

    std::uint64_t next() noexcept;

private:
    std::uint64_t state_;
};

/// Finalizer of SplitMix64 applied to a single value.
std::uint64_t mix64(std::uint64_t value) noexcept;

/// Seed for the sub-stream `label`/`index` of a master seed. Implemented as
/// mix64(seed ^ mix64(fnv1a64(label) + index)); stable across platforms.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t index) noexcept;

/// xoshiro256** 1.0 (Blackman & Vigna), state filled from SplitMix64(seed).
///
/// Every draw the harness makes goes through below() and unit(), whose
/// mappings are fixed here so datasets reproduce in any language that
/// implements the same three functions:
///   below(n): rejection sampling, reject r < (2^64 - n) mod n, return r mod n
///   unit():   (next() >> 11) * 2^-53
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept;
    explicit Rng(const std::array<std::uint64_t, 4>& state) noexcept : s_(state) {}

    std::uint64_t next() noexcept;
    std::uint64_t below(std::uint64_t bound);
    double unit() noexcept;

    template <class T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::array<std::uint64_t, 4> s_{};
};

}  // namespace context_drift
