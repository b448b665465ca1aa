#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ltest
{

/// Identifies one reproducible random stream.
///
/// The pair (master_seed, stream_index) is hashed with the SplitMix64 finalizer
/// into a 64-bit key; the key seeds a SplitMix64 sequence whose first four
/// outputs form the state of a xoshiro256** generator. Replicate r of any
/// Monte Carlo loop uses stream r, so results never depend on which worker
/// thread ran it.
struct RngSpec
{
    std::uint64_t master_seed = 0;
    std::uint64_t stream_index = 0;

    /// A fresh master seed derived from this spec, for nested loops
    /// (e.g. the permutation streams inside simulation replicate r).
    RngSpec child(std::uint64_t index) const noexcept;

    friend bool operator==(const RngSpec&, const RngSpec&) = default;
};

class RngStream
{
public:
    explicit RngStream(RngSpec spec) noexcept;

    std::uint64_t next_u64() noexcept;
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform on (0, 1).
    double uniform_open() noexcept;
    /// Uniform integer on [0, bound), bound > 0 (Lemire's unbiased method).
    std::uint64_t uniform_index(std::uint64_t bound) noexcept;
    /// Standard normal (Marsaglia polar; the spare deviate is cached).
    double normal() noexcept;
    /// Gamma(shape, 1) (Marsaglia-Tsang), shape > 0.
    double gamma(double shape) noexcept;
    /// Student t with nu > 0 degrees of freedom.
    double student_t(double nu) noexcept;

    /// In-place Fisher-Yates shuffle.
    template <class T>
    void shuffle(std::span<T> items) noexcept
    {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_index(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    /// Uniformly random permutation of {0, ..., n-1}.
    std::vector<std::size_t> permutation(std::size_t n) noexcept;

private:
    std::array<std::uint64_t, 4> state_{};
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

inline RngStream rng_stream(RngSpec spec) noexcept
{
    return RngStream(spec);
}

} // namespace ltest
