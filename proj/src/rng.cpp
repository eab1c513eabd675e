#include "austere/rng.hpp"

#include <cmath>

namespace austere {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : key_(mix64(seed ^ 0x6a09e667f3bcc908ULL)), counter_(0) {}

Rng::result_type Rng::operator()() {
    ++counter_;
    return mix64(key_ ^ mix64(counter_ * 0xd1b54a32d192ed03ULL));
}

Rng Rng::split(std::uint64_t stream) const {
    return Rng(mix64(key_ + mix64(stream + 0x3c6ef372fe94f82bULL)), 0);
}

double Rng::uniform01() {
    // 53 random bits centred in their cell: never exactly 0 or 1.
    const std::uint64_t bits = (*this)() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n <= 1) return 0;
    // Rejection to avoid modulo bias.
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
        x = (*this)();
    } while (x >= limit);
    return x % n;
}

}  // namespace austere
