#pragma once

#include <cstddef>
#include <cstdint>

namespace imtl {

/// xoshiro256** (Blackman & Vigna) seeded through splitmix64.
///
/// The four state words are derived from (seed, stream) as follows:
///   x = splitmix64(seed) ^ splitmix64(stream ^ 0xD1B54A32D192ED03)
///   s[i] = splitmix64 sequence started at x, i = 0..3
/// Only integer arithmetic is involved, so a given (seed, stream) pair
/// produces the same sequence on every platform.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);
    /// Uniform integer in [0, n). Unbiased (Lemire rejection). n must be > 0.
    std::size_t index(std::size_t n);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

private:
    std::uint64_t s_[4];
    std::uint64_t seed_;
    std::uint64_t stream_;
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Stream identifiers used to split one master seed into independent consumers.
namespace streams {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kArbitration = 2;
inline constexpr std::uint64_t kMinibatchBase = 0x100;  // + task index
inline constexpr std::uint64_t kDataBase = 0x200;       // + task kind
inline constexpr std::uint64_t kTeacher = 0x300;
}  // namespace streams

}  // namespace imtl
