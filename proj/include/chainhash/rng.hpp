#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace chainhash {

/// Seeded generator with a cross-platform stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Bounded integers use rejection sampling on the raw 64-bit output
/// and doubles take the top 53 bits, so no implementation-defined
/// distribution object is involved. Another language reproduces the stream by
/// implementing MT19937-64 plus these two reductions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);

    // Uniform in [lo, hi] inclusive.
    std::int64_t between(std::int64_t lo, std::int64_t hi);

    // Uniform in [0, 1).
    double unit();

private:
    std::mt19937_64 engine_;
};

/// Stateless uniform draw in [0, 1) keyed by (seed, label, counter). Derived
/// from SHA-256 so that independent keys give independent draws regardless
/// of call order.
double keyed_unit(std::uint64_t seed, std::string_view label, std::uint64_t counter);

}  // namespace chainhash
