#pragma once

// Counter-based splittable RNG. Each stream is a pure function of
// (key, counter), so derived streams never share state and a stream can be
// reconstructed from its key alone. The mixer is the SplitMix64 finalizer,
// which is invertible and passes BigCrush when driven by a Weyl sequence.

#include <cstdint>
#include <limits>

namespace sechlab {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

} // namespace detail

class RngStream {
public:
    explicit RngStream(std::uint64_t key) noexcept : key_(key) {}

    // Child stream `index` of a master seed. Two levels of mixing keep the
    // key spacing of neighbouring indices uncorrelated with the counter
    // increment used inside a stream.
    static RngStream derive(std::uint64_t master, std::uint64_t index) noexcept {
        const std::uint64_t s = detail::mix64(master ^ detail::kGolden);
        return RngStream(detail::mix64(s + (index + 1) * 0xbf58476d1ce4e5b9ULL));
    }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

    std::uint64_t next_u64() noexcept {
        counter_ += detail::kGolden;
        return detail::mix64(key_ + counter_);
    }

    // Uniform on the open interval (0,1): (k + 1/2) * 2^-53 with k in
    // [0, 2^53). Never returns 0 or 1, so log/tan transforms are safe.
    double next_unit() noexcept {
        const std::uint64_t bits = next_u64() >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1p-53;
    }

    bool next_bool() noexcept { return (next_u64() >> 63) != 0; }

    // Unbiased integer in [0, bound) by rejection (Lemire's method).
    std::uint64_t below(std::uint64_t bound) noexcept {
        using u128 = unsigned __int128;
        std::uint64_t x = next_u64();
        u128 m = static_cast<u128>(x) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t threshold = (0ULL - bound) % bound;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<u128>(x) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace sechlab
