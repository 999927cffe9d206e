#include "socmap/rng.hpp"

#include <cmath>

#include "socmap/types.hpp"

namespace socmap {

std::uint64_t hash_bytes(const void* data, std::size_t len, std::uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

Rng Rng::stream(std::string_view name, std::uint64_t index) const {
    std::uint64_t h = hash_bytes(&seed_, sizeof(seed_));
    h = hash_bytes(name.data(), name.size(), h);
    h = hash_bytes(&index, sizeof(index), h);
    return Rng(h);
}

double Rng::uniform() {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double v;
    do {
        v = u(gen_);
    } while (v <= 0.0);
    return v;
}

double Rng::normal() {
    std::normal_distribution<double> z(0.0, 1.0);
    return z(gen_);
}

double Rng::gamma(double shape, double rate) {
    return std::exp(log_gamma(shape, rate));
}

double Rng::log_gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
        throw parameter_error("log_gamma: shape and rate must be positive");
    if (shape < 1.0) {
        // boost-shape trick: G(a) = G(a+1) * U^{1/a}, taken in log domain
        std::gamma_distribution<double> g(shape + 1.0, 1.0);
        const double lg = std::log(g(gen_));
        return lg + std::log(uniform()) / shape - std::log(rate);
    }
    std::gamma_distribution<double> g(shape, 1.0);
    return std::log(g(gen_)) - std::log(rate);
}

}  // namespace socmap
