#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string_view>

namespace cttp {

/// Mixes a master seed with a stream name and index so each consumer
/// (data, init, train-shuffle, noise, probe, ...) draws from its own
/// sequence. Changing how much one stream consumes never shifts another.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index = 0);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng stream(std::uint64_t master, std::string_view name, std::uint64_t index = 0) {
        return Rng(derive_seed(master, name, index));
    }

    double uniform(double lo, double hi) {
        if (lo == hi) return lo;
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }
    double normal(double mean, double stddev) {
        if (stddev == 0.0) return mean;
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }
    std::uint64_t next() { return engine_(); }

    template <class It>
    void shuffle(It first, It last) {
        std::shuffle(first, last, engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

} // namespace cttp
