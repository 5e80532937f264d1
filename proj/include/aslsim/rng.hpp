#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace aslsim {

// Counter-based seed derivation: every consumer of randomness gets its own
// stream keyed by (master, domain, index), so adding nodes or repeats never
// perturbs the streams of existing ones.
enum class SeedDomain : std::uint64_t {
    traffic = 1,
    agent = 2,
    link_loss = 3,
    contention = 4,
    repeat = 5,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, SeedDomain domain, std::uint64_t index) {
    std::uint64_t z = splitmix64(master ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(domain) + 1)));
    return splitmix64(z ^ (0xBF58476D1CE4E5B9ULL * (index + 1)));
}

// Stateless per-event hash used for link loss draws and contention winners.
inline std::uint64_t event_hash(std::uint64_t stream_seed, std::uint64_t counter) {
    return splitmix64(stream_seed ^ splitmix64(counter));
}

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform01_from_hash(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Polar Box-Muller; avoids std::normal_distribution so sequences are
// identical across standard library implementations.
class NormalSampler {
  public:
    double operator()(std::mt19937_64& rng, double mean, double stddev) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + stddev * spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01(rng) - 1.0;
            v = 2.0 * uniform01(rng) - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return mean + stddev * u * m;
    }

    void reset() { has_spare_ = false; }

  private:
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace aslsim
