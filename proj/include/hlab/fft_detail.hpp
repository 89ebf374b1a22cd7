#pragma once

#include <vector>

#include "hlab/field.hpp"

namespace hlab::detail {

// c2c transforms on caller buffers (out-of-place). sign -1 = analysis
// direction (no scaling applied here), +1 = synthesis.
void dft(int d, int n, const cplx* in, cplx* out, int sign);

// Copy spectral data from an n-per-dim layout into an m-per-dim layout
// (m >= n, zero padded; the -n/2 slot is split across +-n/2 when m > n).
std::vector<cplx> embed(const cplx* src, int d, int n, int m);

// Inverse of embed: keep frequencies representable on the n grid
// (the +-m... contributions at the target Nyquist are merged).
std::vector<cplx> restrict_to(const cplx* src, int d, int m, int n);

// Smallest 5-smooth integer >= v (FFT-friendly padded sizes).
int next_fast_size(int v);

}  // namespace hlab::detail
