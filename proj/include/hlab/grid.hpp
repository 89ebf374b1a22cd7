#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "hlab/errors.hpp"

namespace hlab {

// Periodic unit torus [0,1)^d, Fourier convention
//   f(x) = sum_xi fhat(xi) e^{2 pi i xi.x},  xi integer lattice,
// so the Laplacian symbol is -4 pi^2 |xi|^2.
//
// Coefficients are stored in FFT index order per dimension:
// index j in [0,n) carries frequency j for j < n/2 and j-n otherwise
// (the n/2 slot is the -n/2 mode). All representable |xi_j| <= n/2.
struct GridSpec {
    int d = 1;  // 1 or 2
    int n = 8;  // modes per dimension, power of two, >= 8

    void validate() const {
        if (d != 1 && d != 2) throw validation_error("grid: d must be 1 or 2");
        if (n < 8 || (n & (n - 1)) != 0) throw validation_error("grid: n must be a power of two >= 8");
    }

    std::size_t size() const { return d == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n; }

    // Largest |xi| on the lattice: sqrt(d) * n/2 (attained at the corner for d=2).
    double max_freq_norm() const { return std::sqrt(static_cast<double>(d)) * (n / 2); }

    bool operator==(const GridSpec& o) const { return d == o.d && n == o.n; }
};

inline int fft_freq(int index, int n) { return index < n / 2 ? index : index - n; }

// Signed frequency vector of a flattened (row-major) coefficient index.
inline std::array<int, 2> freq_of_index(const GridSpec& g, std::size_t idx) {
    if (g.d == 1) return {fft_freq(static_cast<int>(idx), g.n), 0};
    int i0 = static_cast<int>(idx / g.n);
    int i1 = static_cast<int>(idx % g.n);
    return {fft_freq(i0, g.n), fft_freq(i1, g.n)};
}

inline double freq_norm2(const std::array<int, 2>& xi) {
    return static_cast<double>(xi[0]) * xi[0] + static_cast<double>(xi[1]) * xi[1];
}

// Flattened index of a signed frequency (must be representable).
inline std::size_t index_of_freq(const GridSpec& g, int xi0, int xi1 = 0) {
    auto wrap = [&](int v) { return v >= 0 ? v : v + g.n; };
    if (g.d == 1) return static_cast<std::size_t>(wrap(xi0));
    return static_cast<std::size_t>(wrap(xi0)) * g.n + wrap(xi1);
}

}  // namespace hlab
