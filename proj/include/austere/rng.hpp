#pragma once

#include <cstdint>
#include <limits>

namespace austere {

// Counter-based splittable generator.  Output i of a stream is a pure
// function of (key, i), so split streams are reproducible and independent
// of the order in which they are consumed.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    // Derive an independent child stream; does not advance this stream.
    Rng split(std::uint64_t stream) const;

    // Uniform on the open interval (0, 1).
    double uniform01();
    double normal();
    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    Rng(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

    std::uint64_t key_;
    std::uint64_t counter_;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace austere
