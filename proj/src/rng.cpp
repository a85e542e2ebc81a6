#include "chainhash/rng.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

#include "chainhash/sha256.hpp"

namespace chainhash {

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) {
        throw std::invalid_argument("Rng::below: bound must be positive");
    }
    // Reject the top partial bucket so every residue is equally likely.
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = engine_();
    while (x >= limit) {
        x = engine_();
    }
    return x % bound;
}

std::int64_t Rng::between(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) {
        throw std::invalid_argument("Rng::between: empty range");
    }
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) {  // full 64-bit range
        return static_cast<std::int64_t>(engine_());
    }
    return lo + static_cast<std::int64_t>(below(span));
}

double Rng::unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double keyed_unit(std::uint64_t seed, std::string_view label, std::uint64_t counter) {
    std::vector<std::uint8_t> buf;
    buf.reserve(16 + label.size() + 4);
    for (int shift = 56; shift >= 0; shift -= 8) {
        buf.push_back(static_cast<std::uint8_t>(seed >> shift));
    }
    const auto len = static_cast<std::uint32_t>(label.size());
    for (int shift = 24; shift >= 0; shift -= 8) {
        buf.push_back(static_cast<std::uint8_t>(len >> shift));
    }
    buf.insert(buf.end(), label.begin(), label.end());
    for (int shift = 56; shift >= 0; shift -= 8) {
        buf.push_back(static_cast<std::uint8_t>(counter >> shift));
    }
    const Digest d = sha256(buf);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) {
        x = (x << 8) | d[i];
    }
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

}  // namespace chainhash
