#pragma once

// Reproducible random streams.
//
// Engine: std::mt19937_64 (fully specified by the standard, so identical
// on every conforming platform). Derived quantities avoid the
// implementation-defined std:: distributions:
//
//   uniform()  (engine() >> 11) * 2^-53, in [0, 1)
//   normal()   Box-Muller: u1 = 1 - uniform(), u2 = uniform(),
//              r = sqrt(-2 ln u1); returns r cos(2 pi u2), then
//              r sin(2 pi u2) on the next call
//   below(k)   rejection sampling on engine() for an unbiased value in [0, k)
//   shuffle    Fisher-Yates from the back, swapping i with below(i + 1)
//
// A run has one master seed. Each consumer gets its own stream seeded
// with derive_seed(master, tag) = splitmix64(master ^ fnv1a64(tag)).
// Tags in use: "init", "shuffle", "data".

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

#include "tnn/tensor3.hpp"

namespace tnn {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform();
    double normal();
    std::uint64_t below(std::uint64_t k);
    void shuffle(std::span<Index> values);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace tnn
