#pragma once

#include <cstdint>

namespace lipcert {

// Counter-based generator: every value is a pure function of
// (seed, stream, counter), so substreams can be handed to workers in any
// order and re-runs with the same seed reproduce results to the last bit.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_(mix(seed ^ 0xa0761d6478bd642full * (stream + 1))), counter_(0) {}

    std::uint64_t next_u64() noexcept
    {
        return mix(key_ + 0x9e3779b97f4a7c15ull * (++counter_));
    }

    // uniform on (0,1), never returns an exact endpoint
    double next_unit() noexcept
    {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    // uniform on [lo, hi]
    double next_in(double lo, double hi) noexcept
    {
        return lo + (hi - lo) * next_unit();
    }

    double next_normal() noexcept { return normal_quantile(next_unit()); }

    // standard normal quantile (Wichura's AS241, ~1 ulp over (0,1))
    static double normal_quantile(double p) noexcept;

private:
    static std::uint64_t mix(std::uint64_t x) noexcept
    {
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ull;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebull;
        x ^= x >> 31;
        return x;
    }

    std::uint64_t key_;
    std::uint64_t counter_;
};

} // namespace lipcert
