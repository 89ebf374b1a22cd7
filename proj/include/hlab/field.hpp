#pragma once

#include <complex>
#include <vector>

#include "hlab/grid.hpp"

namespace hlab {

using cplx = std::complex<double>;

// Complex Fourier coefficients of a real scalar/vector field on the torus.
// Storage is component-major: component c occupies coeffs[c*grid.size() ...].
struct SpectralField {
    GridSpec grid;
    int components = 1;
    std::vector<cplx> coeffs;

    SpectralField() = default;
    SpectralField(GridSpec g, int comps) : grid(g), components(comps), coeffs(g.size() * comps, cplx{0.0, 0.0}) {
        g.validate();
        if (comps < 1) throw validation_error("field: component count must be positive");
    }

    std::size_t size() const { return grid.size(); }
    cplx* comp(int c) { return coeffs.data() + static_cast<std::size_t>(c) * size(); }
    const cplx* comp(int c) const { return coeffs.data() + static_cast<std::size_t>(c) * size(); }

    cplx& at(int c, std::size_t idx) { return coeffs[static_cast<std::size_t>(c) * size() + idx]; }
    const cplx& at(int c, std::size_t idx) const { return coeffs[static_cast<std::size_t>(c) * size() + idx]; }
};

// ---- algebra ----
SpectralField operator+(const SpectralField& a, const SpectralField& b);
SpectralField operator-(const SpectralField& a, const SpectralField& b);
SpectralField operator*(double s, const SpectralField& f);
void axpy(SpectralField& y, double a, const SpectralField& x);  // y += a*x

// ---- norms and diagnostics ----
double l2_coeff_norm(const SpectralField& f);               // sqrt(sum |fhat|^2) over all components
double energy(const SpectralField& f);                      // 1/2 int |f|^2 = 1/2 sum |fhat|^2
double hermitian_defect(const SpectralField& f);            // max |fhat(-xi) - conj fhat(xi)|
double divergence_defect(const SpectralField& f);           // max_xi |sum_j 2 pi i xi_j fhat_j| / l2_coeff_norm
bool has_nan(const SpectralField& f);
std::size_t active_modes(const SpectralField& f);           // count of indices with any nonzero component

// ---- exact Fourier-symbol calculus ----
SpectralField gradient(const SpectralField& f);     // components*d outputs, (i,j) -> d_j f_i at slot i*d+j
SpectralField divergence(const SpectralField& f);   // vector (c=d) -> scalar; tensor (c=d*d) -> vector
SpectralField laplacian(const SpectralField& f);

// Restrict/embed onto another grid size, keeping matching frequencies.
SpectralField regrid(const SpectralField& f, int new_n);

}  // namespace hlab
