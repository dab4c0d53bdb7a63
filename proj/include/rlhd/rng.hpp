#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace rlhd {

/// SplitMix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t value) noexcept;

/// Seed of a labeled substream. Adding a new label never perturbs existing ones.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label) noexcept;
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept;

// Deterministic stream on top of mt19937_64. All draws are built from raw
// engine output so results do not depend on the standard library's
// distribution implementations.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}
    RandomStream(std::uint64_t base, std::string_view label)
        : RandomStream(derive_seed(base, label)) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next() { return engine_(); }
    std::uint32_t next32() { return static_cast<std::uint32_t>(engine_() >> 32); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Unbiased integer in [0, n).
    std::size_t below(std::size_t n);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace rlhd
