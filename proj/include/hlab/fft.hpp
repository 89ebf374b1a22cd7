#pragma once

#include <vector>

#include "hlab/field.hpp"

namespace hlab {

// Transforms; FFTW plans are cached per (d, n, direction) behind a mutex,
// execution is thread-safe on caller-owned buffers. Forward includes the
// 1/n^d factor so that synthesize(analyze(values)) == values and the stored
// coefficients are the fhat(xi) of the convention in grid.hpp.

// Physical samples (real part) of component c on an m-point-per-dim grid,
// m = refine*n via zero padding. refine >= 1. Row-major, x_j = i_j/m.
std::vector<double> to_physical(const SpectralField& f, int c, int refine = 1);

// All components at once: result[c] is the grid of component c.
std::vector<std::vector<double>> to_physical_all(const SpectralField& f, int refine = 1);

// Forward transform of real samples (size grid.size()*comps, component-major).
SpectralField from_physical(const GridSpec& grid, int components, const std::vector<double>& values);

// Pointwise product of two real fields, computed alias-free on a padded grid
// and returned on a grid of size out_n (frequencies beyond out_n are cut).
// a is c_a components, b is c_b components; result has c_a*c_b components
// laid out as (i,j) -> a_i * b_j at slot i*c_b + j.
SpectralField outer_product(const SpectralField& a, const SpectralField& b, int out_n);

// Contraction sum_j a_j * (b at slot offset+j stride) ... convenience wrappers
// are provided by callers; the core primitive above suffices.

// Mean over the torus of prod of |f|^p style integrands is taken by callers
// on refined physical grids; helper for one pointwise evaluation grid:
// samples of all components on m-per-dim grid (m >= n, zero padded).
std::vector<std::vector<double>> sampled_components(const SpectralField& f, int m);

}  // namespace hlab
