#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <span>
#include <utility>

namespace rtm {

/// Seedable generator shared by training and data generation.
///
/// Backed by std::mt19937_64, whose output sequence is fixed by the standard.
/// Real draws use the top 53 bits of one engine output; bounded integers use
/// rejection sampling. None of the <random> distributions are used, since
/// their output differs between standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 1) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("below(0)");
        const std::uint64_t threshold = (0 - n) % n;
        std::uint64_t r = engine_();
        while (r < threshold) r = engine_();
        return r % n;
    }

private:
    std::mt19937_64 engine_;
};

template <class R>
concept RandomSource = requires(R& r, std::uint64_t n) {
    { r.uniform() } -> std::convertible_to<double>;
    { r.below(n) } -> std::convertible_to<std::uint64_t>;
};

/// Bernoulli draw: true with probability p.
template <RandomSource R>
bool chance(R& rng, double p) {
    return rng.uniform() < p;
}

/// Fisher-Yates shuffle driven by Rng::below.
template <RandomSource R, class T>
void shuffle(std::span<T> xs, R& rng) {
    for (std::size_t i = xs.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        using std::swap;
        swap(xs[i - 1], xs[j]);
    }
}

/// Derive an independent stream seed (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace rtm
