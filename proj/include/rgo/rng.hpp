#pragma once

#include <cmath>
#include <cstdint>

namespace rgo {

// Self-contained xoshiro256++ with a splitmix64 seeder. Pinned in-repo so
// path streams are bit-identical across platforms and thread counts; streams
// are split deterministically from (seed, path index).
class Rng {
  public:
    Rng(uint64_t seed, uint64_t stream = 0) {
        uint64_t x = seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
        for (auto& si : s_) si = splitmix64(x);
        // decorrelate nearby streams
        for (int i = 0; i < 8; ++i) next();
    }

    uint64_t next() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform on (0, 1): 53-bit mantissa, never exactly 0
    double uniform() {
        return (double(next() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    // standard normal via Box-Muller (explicit formula, no rejection)
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u = uniform(), v = uniform();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double a = 2.0 * M_PI * v;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Gamma(shape, rate) via Marsaglia-Tsang squeeze
    double gamma(double shape, double rate) {
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        while (true) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
        }
    }

  private:
    static uint64_t splitmix64(uint64_t& x) {
        x += 0x9E3779B97F4A7C15ULL;
        uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t s_[4];
    double spare_ = 0;
    bool have_spare_ = false;
};

}  // namespace rgo
