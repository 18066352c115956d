#include "ledgerloop/rng.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace ledgerloop {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
    std::uint64_t h = basis;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::string hex64(std::uint64_t value) { return fmt::format("{:016x}", value); }

Rng Rng::derive(std::uint64_t seed, std::string_view key, std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = mix64(seed ^ 0x6a09e667f3bcc909ULL);
    s = mix64(s ^ fnv1a64(key));
    s = mix64(s ^ (a + 0x9e3779b97f4a7c15ULL));
    s = mix64(s ^ (b + 0xbb67ae8584caa73bULL));
    return Rng{s};
}

std::uint64_t Rng::next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return lo;
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next());
    // Rejection sampling on the top of the range.
    const std::uint64_t limit = max() - max() % span;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return lo + static_cast<std::int64_t>(x % span);
}

double Rng::normal(double mean, double stddev) {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mean + stddev * z;
}

double Rng::lognormal(double mu, double sigma) { return std::exp(normal(mu, sigma)); }

int poisson_quantile(double lambda, double u) {
    if (lambda <= 0.0) return 0;
    double p = std::exp(-lambda);
    double cdf = p;
    int k = 0;
    while (u > cdf && k < 1000) {
        ++k;
        p *= lambda / k;
        cdf += p;
    }
    return k;
}

int Rng::poisson(double lambda) { return poisson_quantile(lambda, uniform()); }

}  // namespace ledgerloop
