#include "tnn/random.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace tnn {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag)
{
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return splitmix64(master ^ h);
}

double Rng::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::uint64_t Rng::below(std::uint64_t k)
{
    if (k <= 1)
        return 0;
    // Largest multiple of k that fits; reject draws above it.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % k;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % k;
}

void Rng::shuffle(std::span<Index> values)
{
    for (std::size_t i = values.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(below(i));
        std::swap(values[i - 1], values[j]);
    }
}

}  // namespace tnn
