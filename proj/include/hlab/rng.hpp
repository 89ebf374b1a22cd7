#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string_view>

namespace hlab {

// Deterministic counter-style generator (splitmix64). We do not use
// std::normal_distribution because its output sequence is
// implementation-defined; every artifact this lab writes must be
// bit-reproducible from the config seed alone.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform integer in [0, n)
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    // standard normal via Box-Muller
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 1e-300) u1 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::complex<double> next_complex_gaussian() {
        double re = next_gaussian();
        double im = next_gaussian();
        return {re, im};
    }

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// FNV-1a, used both for seed splitting and artifact integrity hashes.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derive an independent task stream from a root seed and a label.
inline std::uint64_t split_seed(std::uint64_t root, std::string_view task, std::uint64_t index = 0) {
    std::uint64_t h = fnv1a(task);
    h ^= root + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
    Rng mix(h);
    return mix.next_u64();
}

}  // namespace hlab
