#pragma once

#include <array>
#include <cstdint>

namespace whitefem {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Counter-based source of i.i.d. standard normals.
///
/// Draw number `counter` of stream (seed, stream_id) is a pure function of
/// those three integers: Philox with key = seed and counter = (counter,
/// stream_id), the low 64 output bits mapped to a uniform in (0, 1) and then
/// through the inverse normal CDF. Copies are independent cursors.
class GaussianStream {
public:
    GaussianStream() = default;
    GaussianStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t counter = 0)
        : seed_(seed), stream_id_(stream_id), counter_(counter) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }
    std::uint64_t counter() const noexcept { return counter_; }

    /// Uniform in (0, 1) for draw `index`, without advancing.
    double uniform_at(std::uint64_t index) const noexcept;
    double normal_at(std::uint64_t index) const;

    double next_uniform() noexcept { return uniform_at(counter_++); }
    double next_normal() { return normal_at(counter_++); }

    template <typename It>
    void fill_normal(It first, It last) {
        for (; first != last; ++first) *first = next_normal();
    }

    bool operator==(const GaussianStream&) const = default;

private:
    std::uint64_t seed_ = 0;
    std::uint64_t stream_id_ = 0;
    std::uint64_t counter_ = 0;
};

/// Standard normal quantile.
double normal_quantile(double u);

}  // namespace whitefem
