#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace ledgerloop {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);
/// SplitMix64 finalizer; a strong 64-bit bijective mixer.
std::uint64_t mix64(std::uint64_t x);
/// Zero-padded 16 hex digits.
std::string hex64(std::uint64_t value);

/// SplitMix64 stream. Streams are derived from (seed, key, counters) rather
/// than split from a parent, so a user's or a day's draws never depend on how
/// much randomness another stream consumed.
///
/// All distributions are implemented here instead of using <random>'s
/// distributions, whose output sequences differ between standard libraries.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t state = 0) : state_(state) {}

    static Rng derive(std::uint64_t seed, std::string_view key, std::uint64_t a = 0, std::uint64_t b = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() { return next(); }

    std::uint64_t next();
    /// Uniform on [0, 1) with 53 bits.
    double uniform();
    /// Uniform integer on [lo, hi] (inclusive), unbiased.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    bool bernoulli(double p) { return uniform() < p; }
    /// Box-Muller; consumes exactly two draws.
    double normal(double mean = 0.0, double stddev = 1.0);
    double lognormal(double mu, double sigma);
    /// Inverse-CDF Poisson from a single uniform draw (monotone in lambda for fixed draw).
    int poisson(double lambda);

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i - 1)));
            std::swap(items[i - 1], items[j]);
        }
    }

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

/// Poisson inverse CDF at a given uniform draw.
int poisson_quantile(double lambda, double u);

}  // namespace ledgerloop
