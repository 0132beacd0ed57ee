#include "mlcomp/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mlcomp {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> coords) {
    if (coords.size() > 3) {
        throw std::invalid_argument("derive_seed: at most three coordinates");
    }
    // Pack coordinates into disjoint 20-bit fields; the count sits in the
    // top two bits so lists of different lengths never share a key.
    std::uint64_t packed = 0;
    int shift = 0;
    for (auto c : coords) {
        if (c >= (1ULL << 20)) {
            throw std::invalid_argument("derive_seed: coordinate out of range");
        }
        packed |= c << shift;
        shift += 20;
    }
    packed |= static_cast<std::uint64_t>(coords.size()) << 62;
    // splitmix64 is a bijection, so for fixed base the composition is injective.
    return splitmix64(splitmix64(base) ^ splitmix64(packed));
}

std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("uniform_index: empty range");
    }
    if ((n & (n - 1)) == 0) {
        return rng() & (n - 1);
    }
    const std::uint64_t limit = Rng::max() - (Rng::max() % n);
    for (;;) {
        const std::uint64_t r = rng();
        if (r < limit) return r % n;
    }
}

double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform_real(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

double standard_normal(Rng& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace mlcomp
