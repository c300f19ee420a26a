#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mvp {

// Seed splitting: every consumer of randomness names a purpose string and
// receives an independent stream
//
//     stream_seed = splitmix64(root_seed ^ fnv1a64(purpose))
//
// so adding a new consumer never perturbs the existing streams.

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t stream_seed(std::uint64_t root, std::string_view purpose) {
    return splitmix64(root ^ fnv1a64(purpose));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t root, std::string_view purpose) : engine_(stream_seed(root, purpose)) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }
    double normal() { return normal_(engine_); }
    double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }
    double exponential(double rate) {
        return std::exponential_distribution<double>(rate)(engine_);
    }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace mvp
