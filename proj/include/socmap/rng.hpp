#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace socmap {

/// FNV-1a over raw bytes; stable across platforms, used for substream
/// derivation and content keys.
std::uint64_t hash_bytes(const void* data, std::size_t len,
                         std::uint64_t h = 0xcbf29ce484222325ULL);

/// Seeded random source. All randomness in the project flows from a single
/// root seed through named substreams (fit, simulate, cv-fold,
/// prediction-noise, ...) so components can be re-run independently and
/// still reproduce bit-identical output.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Derive an independent substream from this stream's seed.
    Rng stream(std::string_view name, std::uint64_t index = 0) const;

    std::uint64_t seed() const { return seed_; }

    double uniform();                       // U(0,1), open at both ends
    double normal();                        // N(0,1)
    double gamma(double shape, double rate);
    /// log of a Gamma(shape, rate) draw, stable for small shapes where the
    /// linear-domain draw would underflow to zero.
    double log_gamma(double shape, double rate);

    std::mt19937_64& engine() { return gen_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace socmap
